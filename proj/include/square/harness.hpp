#pragma once

#include "square/corpus.hpp"
#include "square/report.hpp"
#include "square/training.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace square {

struct DatasetRef {
    std::string name;  // defaults to the dataset's own name
    std::filesystem::path path;
};

enum class CheckpointMode { Shared, PerDataset };

/// One declarative experiment. Relative paths are resolved against the
/// directory of the config file. See docs/config.schema.json.
struct ExperimentConfig {
    std::string name = "experiment";
    std::string backbone = "toy";
    std::optional<DatasetRef> train_dataset;  // train + dev splits are read from it
    std::optional<std::filesystem::path> dev_path;  // separate dev file, optional
    std::vector<DatasetRef> eval_datasets;          // test split is scored
    Technique technique = Technique::Square;
    std::optional<Technique> baseline_technique;
    SelectionPolicy selection_policy;
    TrainConfig train_config;
    std::vector<std::string> external_scorers;
    CheckpointMode checkpoint_mode = CheckpointMode::Shared;
    bool drop_unencodable = false;
    bool plots = true;
    std::filesystem::path output_dir = "out";

    /// Throws ConfigError on inconsistent settings.
    void validate() const;

    nlohmann::ordered_json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

    /// Hash of the canonical JSON form.
    std::string hash() const;
};

ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// "0" for QT, "1" for the single-reference baselines, the policy
/// descriptor for the multi-reference variants.
std::string n_refs_descriptor(Technique t, const SelectionPolicy& policy);

/// Environment variable naming the checkpoint cache directory; when unset the
/// cache lives in <output_dir>/cache.
inline constexpr const char* kCacheDirEnv = "SQUARE_CACHE_DIR";
std::filesystem::path cache_dir_for(const ExperimentConfig& cfg);

enum class FailureKind { Config, Data, Runtime };

/// A pipeline stage failed; `stage` names it ("load", "train", "score", ...).
class StageFailure : public std::runtime_error {
public:
    StageFailure(std::string stage, FailureKind kind, const std::string& cause);
    const std::string& stage() const { return stage_; }
    FailureKind kind() const { return kind_; }

private:
    std::string stage_;
    FailureKind kind_;
};

struct TrainedModel {
    ScorerModel model;
    std::optional<TrainLog> log;  // empty on a cache hit
    bool cache_hit = false;
    std::filesystem::path checkpoint;
    std::string cache_key;
};

/// Trains `technique` on the given splits or loads the checkpoint cached
/// under the hash of (train config, datasets, backbone).
TrainedModel train_or_load(const ExperimentConfig& cfg, Technique technique, const Dataset& train_split,
                           const Dataset& dev_split);

/// Trains (or reuses) each technique, scores every eval dataset's test
/// split and writes report.json / report.txt / plots under output_dir.
/// Failures throw StageFailure after writing output_dir/failed/.
EvalReport run_experiment(const ExperimentConfig& cfg);

/// Five ablation runs: TQR_NEG with 1 reference,
/// SQUARE_POS with 5, SQUARE with 3, SQUARE with [1,5] and SQUARE with 5.
/// A failing run is reported as a failed row; the others still execute.
EvalReport run_ablation_matrix(const ExperimentConfig& base);

/// Scores a dataset with a checkpoint under a technique and selection policy.
ScoredSet score_dataset(const ScorerModel& model, const Dataset& d, Technique technique,
                        const SelectionPolicy& policy, int max_units, std::size_t batch_size = 32);

}  // namespace square
