#pragma once

#include "square/corpus.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace square {

enum class SelectionMode { FixedK, RandomRange };
enum class SplitRule { Balanced, PositivesFirst };
enum class PolarityFilter { Both, PositiveOnly, NegativeOnly };

/// How many references accompany an example and how they are drawn.
struct SelectionPolicy {
    int total_budget = 5;
    SelectionMode mode = SelectionMode::FixedK;
    int range_low = 1;
    int range_high = 5;
    SplitRule split_rule = SplitRule::Balanced;
    std::uint64_t seed = 0;

    /// Throws ConfigError if the policy is unusable.
    void validate() const;

    /// "5" for fixed budgets, "[1,5]" for random ranges.
    std::string descriptor() const;
};

struct Selection {
    std::vector<Reference> pos;
    std::vector<Reference> neg;

    std::size_t size() const { return pos.size() + neg.size(); }
};

/// Budget actually used for this example (drawn per example under random_range).
int effective_budget(const QAExample& ex, const SelectionPolicy& policy);

/// Picks references from the example's pools. Balanced: ceil(k/2) positives
/// where available, the rest negatives, any leftover back to positives.
/// Sampling is uniform without replacement from a SplitMix64 stream seeded
/// by (policy.seed, example_id); chosen references keep pool order.
Selection select_references(const QAExample& ex, const SelectionPolicy& policy);

Selection restrict_polarity(Selection sel, PolarityFilter keep);

}  // namespace square
