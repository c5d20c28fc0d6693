#pragma once

#include "square/training.hpp"

namespace square::testing {

/// Learning rate for the toy backbone. The default 1e-6 suits a
/// pretrained transformer; the frozen hashed features here need a larger
/// step to move a zero-initialized head within 20 epochs.
inline constexpr double kToyLearningRate = 0.05;

inline TrainConfig toy_train_config() {
    TrainConfig cfg;
    cfg.learning_rate = kToyLearningRate;
    cfg.seed = 7;
    cfg.selection_policy.seed = 11;
    return cfg;
}

}  // namespace square::testing
