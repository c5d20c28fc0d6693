#include "square/reference_selection.hpp"

#include "square/errors.hpp"
#include "square/hashing.hpp"

#include <algorithm>
#include <numeric>

namespace square {

void SelectionPolicy::validate() const {
    if (mode == SelectionMode::FixedK && total_budget < 1)
        throw ConfigError("selection budget must be >= 1");
    if (mode == SelectionMode::RandomRange) {
        if (range_low < 1) throw ConfigError("selection range_low must be >= 1");
        if (range_low > range_high) throw ConfigError("selection range_low exceeds range_high");
    }
}

std::string SelectionPolicy::descriptor() const {
    if (mode == SelectionMode::RandomRange)
        return "[" + std::to_string(range_low) + "," + std::to_string(range_high) + "]";
    return std::to_string(total_budget);
}

namespace {

std::vector<Reference> sample_in_order(const std::vector<Reference>& pool, std::size_t count,
                                       SplitMix64& rng) {
    count = std::min(count, pool.size());
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    // Partial Fisher-Yates: the first `count` slots end up a uniform sample.
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    std::vector<Reference> out;
    out.reserve(count);
    for (std::size_t i : idx) out.push_back(pool[i]);
    return out;
}

}  // namespace

int effective_budget(const QAExample& ex, const SelectionPolicy& policy) {
    if (policy.mode == SelectionMode::FixedK) return policy.total_budget;
    SplitMix64 rng(derive_stream_seed(policy.seed, ex.example_id));
    return static_cast<int>(rng.in_range(static_cast<std::uint64_t>(policy.range_low),
                                         static_cast<std::uint64_t>(policy.range_high)));
}

Selection select_references(const QAExample& ex, const SelectionPolicy& policy) {
    policy.validate();
    SplitMix64 rng(derive_stream_seed(policy.seed, ex.example_id));
    std::size_t k = static_cast<std::size_t>(policy.total_budget);
    if (policy.mode == SelectionMode::RandomRange)
        k = static_cast<std::size_t>(rng.in_range(static_cast<std::uint64_t>(policy.range_low),
                                                  static_cast<std::uint64_t>(policy.range_high)));

    const std::size_t n_pos_pool = ex.pos_refs.size();
    const std::size_t n_neg_pool = ex.neg_refs.size();
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    if (policy.split_rule == SplitRule::Balanced) {
        n_pos = std::min(n_pos_pool, (k + 1) / 2);
        n_neg = std::min(n_neg_pool, k - n_pos);
        n_pos = std::min(n_pos_pool, k - n_neg);
    } else {
        n_pos = std::min(n_pos_pool, k);
        n_neg = std::min(n_neg_pool, k - n_pos);
    }

    Selection sel;
    sel.pos = sample_in_order(ex.pos_refs, n_pos, rng);
    sel.neg = sample_in_order(ex.neg_refs, n_neg, rng);
    return sel;
}

Selection restrict_polarity(Selection sel, PolarityFilter keep) {
    if (keep == PolarityFilter::PositiveOnly) sel.neg.clear();
    if (keep == PolarityFilter::NegativeOnly) sel.pos.clear();
    return sel;
}

}  // namespace square
