#pragma once

#include <optional>
#include <string>
#include <vector>

namespace square {

/// Parallel vectors of metric scores and gold labels.
struct ScoredSet {
    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<std::string> example_ids;

    std::size_t size() const { return scores.size(); }
    /// Throws MetricError if empty, misaligned, or labels are not 0/1.
    void validate() const;
};

inline constexpr double kDecisionThreshold = 0.5;

/// Fraction of examples where (score >= threshold) matches the label.
double accuracy(const ScoredSet& s, double threshold = kDecisionThreshold);

/// Mann-Whitney AUROC via mid-ranks: the probability that a random positive
/// outscores a random negative, ties credited one half.
double auroc(const ScoredSet& s);

/// Point-biserial (sample Pearson) correlation between scores and labels.
double pearson(const ScoredSet& s);

/// 100 * (candidate - baseline) / baseline. Baseline must be positive.
double relative_delta(double candidate, double baseline);

/// Signed percentages; empty where the baseline value is not positive.
struct MetricDeltas {
    std::optional<double> accuracy;
    std::optional<double> auroc;
    std::optional<double> correlation;
};

struct MetricRow {
    std::string dataset;
    std::string technique;
    std::string n_refs_descriptor;
    double accuracy = 0;
    double auroc = 0;
    double correlation = 0;
    std::optional<MetricDeltas> relative;
    std::size_t n_examples = 0;
    bool failed = false;
    std::string error;
};

/// All three metrics of one scored set.
MetricRow compute_row(const ScoredSet& s, std::string dataset, std::string technique,
                      std::string n_refs_descriptor);

MetricDeltas relative_to(const MetricRow& candidate, const MetricRow& baseline);

}  // namespace square
