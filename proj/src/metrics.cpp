#include "square/metrics.hpp"

#include "square/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace square {

void ScoredSet::validate() const {
    if (scores.empty()) throw MetricError("metric over an empty set");
    if (labels.size() != scores.size())
        throw MetricError("scores and labels differ in length");
    if (!example_ids.empty() && example_ids.size() != scores.size())
        throw MetricError("example_ids and scores differ in length");
    for (int l : labels)
        if (l != 0 && l != 1) throw MetricError("labels must be 0 or 1");
    for (double x : scores)
        if (!std::isfinite(x)) throw MetricError("non-finite score");
}

double accuracy(const ScoredSet& s, double threshold) {
    s.validate();
    std::size_t hits = 0;
    for (std::size_t i = 0; i < s.size(); ++i)
        hits += static_cast<int>(s.scores[i] >= threshold) == s.labels[i];
    return static_cast<double>(hits) / static_cast<double>(s.size());
}

double auroc(const ScoredSet& s) {
    s.validate();
    const std::size_t n = s.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s.scores[a] < s.scores[b]; });

    // Sum of 2 * mid-rank over positives, kept integral so the result is exact.
    double twice_rank_sum = 0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i + 1;
        while (j < n && s.scores[order[j]] == s.scores[order[i]]) ++j;
        // ranks i+1 .. j share the mid-rank (i + 1 + j) / 2
        const double twice_mid = static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (s.labels[order[k]] == 1) {
                twice_rank_sum += twice_mid;
                ++n_pos;
            }
        }
        i = j;
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) throw MetricError("AUROC undefined: only one class present");
    const double np = static_cast<double>(n_pos);
    const double twice_u = twice_rank_sum - np * (np + 1);
    return twice_u / (2.0 * np * static_cast<double>(n_neg));
}

double pearson(const ScoredSet& s) {
    s.validate();
    const double n = static_cast<double>(s.size());
    double mean_x = 0, mean_y = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        mean_x += s.scores[i];
        mean_y += s.labels[i];
    }
    mean_x /= n;
    mean_y /= n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double dx = s.scores[i] - mean_x;
        const double dy = s.labels[i] - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0) throw MetricError("correlation undefined: scores have zero variance");
    if (syy == 0) throw MetricError("correlation undefined: labels have zero variance");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double relative_delta(double candidate, double baseline) {
    if (!(baseline > 0)) throw MetricError("relative delta needs a positive baseline");
    return 100.0 * (candidate - baseline) / baseline;
}

MetricRow compute_row(const ScoredSet& s, std::string dataset, std::string technique,
                      std::string n_refs_descriptor) {
    MetricRow row;
    row.dataset = std::move(dataset);
    row.technique = std::move(technique);
    row.n_refs_descriptor = std::move(n_refs_descriptor);
    row.n_examples = s.size();
    row.accuracy = accuracy(s);
    row.auroc = auroc(s);
    row.correlation = pearson(s);
    return row;
}

MetricDeltas relative_to(const MetricRow& candidate, const MetricRow& baseline) {
    auto delta = [](double c, double b) -> std::optional<double> {
        if (!(b > 0)) return std::nullopt;
        return relative_delta(c, b);
    };
    return {delta(candidate.accuracy, baseline.accuracy), delta(candidate.auroc, baseline.auroc),
            delta(candidate.correlation, baseline.correlation)};
}

}  // namespace square
