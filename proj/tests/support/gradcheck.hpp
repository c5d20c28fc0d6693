#pragma once

#include "square/hashing.hpp"
#include "square/training.hpp"

#include <algorithm>
#include <cmath>

namespace square::testing {

inline constexpr double kFiniteDifferenceStep = 1e-4;

/// Worst per-coordinate relative error between the analytic head gradient
/// and central differences of mean_loss, on a random minibatch with a
/// random head. Coordinates where both values are ~0 are compared absolutely.
inline double gradient_check_error(const FeatureSet& data, SplitMix64& rng) {
    const std::size_t batch_size = static_cast<std::size_t>(rng.in_range(1, 32));
    std::vector<std::size_t> batch;
    for (std::size_t i = 0; i < batch_size; ++i) batch.push_back(static_cast<std::size_t>(rng.below(data.size())));

    HeadParams head;
    const std::size_t d = data.features.front().size();
    for (std::size_t k = 0; k < d; ++k) head.weights.push_back(4 * (2 * rng.uniform() - 1));
    head.bias = 2 * rng.uniform() - 1;

    const HeadParams analytic = mean_loss_gradient(data, batch, head);
    double worst = 0;
    auto compare = [&](double a, double& param) {
        const double saved = param;
        param = saved + kFiniteDifferenceStep;
        const double up = mean_loss(data, batch, head);
        param = saved - kFiniteDifferenceStep;
        const double down = mean_loss(data, batch, head);
        param = saved;
        const double numeric = (up - down) / (2 * kFiniteDifferenceStep);
        const double scale = std::max({std::abs(a), std::abs(numeric), 1e-6});
        worst = std::max(worst, std::abs(a - numeric) / scale);
    };
    for (std::size_t k = 0; k < d; ++k) compare(analytic.weights[k], head.weights[k]);
    compare(analytic.bias, head.bias);
    return worst;
}

}  // namespace square::testing
