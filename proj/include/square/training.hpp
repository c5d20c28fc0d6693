#pragma once

#include "square/corpus.hpp"
#include "square/encoding.hpp"
#include "square/scorer.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace square {

/// Fine-tuning hyperparameters. Defaults:
/// 20 epochs, batch 32, Adam at a constant 1e-6, fp32, reshuffle per epoch,
/// keep the epoch with the best validation AUROC.
struct TrainConfig {
    int epochs = 20;
    int batch_size = 32;
    double learning_rate = 1e-6;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    bool shuffle_each_epoch = true;
    std::uint64_t seed = 0;
    Technique technique = Technique::Square;
    SelectionPolicy selection_policy;
    int max_units = kDefaultMaxUnits;

    void validate() const;
    /// Stable hash of every field that influences the trained weights.
    std::string fingerprint(std::string_view backbone_name) const;
};

struct EpochRecord {
    int epoch = 0;  // 1-based
    double mean_train_loss = 0;
    double val_accuracy = 0;
    double val_auroc = 0;
};

struct TrainLog {
    std::vector<EpochRecord> epochs;
    int selected_epoch = 0;  // 1-based

    std::string to_jsonl() const;
};

/// Pooled backbone vectors with labels, ready for the head.
struct FeatureSet {
    std::vector<Vector> features;
    std::vector<int> labels;
    std::vector<std::string> example_ids;

    std::size_t size() const { return labels.size(); }
};

/// Selects references, encodes with the technique's variant and runs the
/// backbone once. References are drawn once here, not per epoch.
FeatureSet featurize(const Dataset& d, Technique technique, const SelectionPolicy& policy,
                     int max_units, const Backbone& backbone);

inline constexpr double kProbabilityClamp = 1e-7;

/// Binary cross-entropy with p clamped to [1e-7, 1 - 1e-7].
double bce_loss(double p, int y);

struct HeadParams {
    std::vector<double> weights;
    double bias = 0;
};

/// Mean BCE of the affine head over the rows in `batch`.
double mean_loss(const FeatureSet& data, std::span<const std::size_t> batch, const HeadParams& head);

/// Analytic gradient of mean_loss: mean of (p - y) * x and mean of (p - y).
HeadParams mean_loss_gradient(const FeatureSet& data, std::span<const std::size_t> batch,
                              const HeadParams& head);

/// 1-based argmax; the first epoch wins ties. Empty input throws.
int select_best_epoch(std::span<const double> aurocs);

struct DevEvaluation {
    double accuracy = 0;
    double auroc = 0;
};

struct TrainHooks {
    /// Replaces the built-in dev evaluation; receives the 1-based epoch and
    /// the epoch's snapshot.
    std::function<DevEvaluation(int, const ScorerModel&)> evaluate;
    /// Called after every epoch record is appended.
    std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
    ScorerModel model;
    TrainLog log;
};

/// Minibatch Adam on the mean BCE of the head; the backbone is frozen. The
/// last partial batch is kept. Throws TrainingError on empty data, a
/// single-class dev set or a non-finite loss.
TrainResult train(const Dataset& train_set, const Dataset& dev_set, const TrainConfig& cfg,
                  std::shared_ptr<const Backbone> backbone, const TrainHooks& hooks = {});

}  // namespace square
