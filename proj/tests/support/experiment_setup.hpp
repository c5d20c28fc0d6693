#pragma once

#include "square/harness.hpp"
#include "square/synthetic.hpp"
#include "support/tmp.hpp"
#include "support/toy_setup.hpp"

#include <cstdlib>

namespace square::testing {

/// Writes the synthetic dataset under `dir` and returns a toy-backbone
/// experiment config that trains and evaluates on it.
inline ExperimentConfig toy_experiment(const std::filesystem::path& dir, const SyntheticSpec& spec = {}) {
    ::unsetenv(kCacheDirEnv);
    const auto data = dir / (spec.name + ".jsonl");
    if (!std::filesystem::exists(data)) save_jsonl(make_synthetic(spec), data);
    ExperimentConfig cfg;
    cfg.name = "toy";
    cfg.train_dataset = DatasetRef{"", data};
    cfg.eval_datasets = {DatasetRef{"", data}};
    cfg.train_config = toy_train_config();
    cfg.selection_policy.seed = 11;
    cfg.output_dir = dir / "out";
    return cfg;
}

inline nlohmann::json without_timestamps(nlohmann::json j) {
    if (j.contains("metadata")) {
        j["metadata"].erase("started_at");
        j["metadata"].erase("finished_at");
    }
    return j;
}

}  // namespace square::testing
