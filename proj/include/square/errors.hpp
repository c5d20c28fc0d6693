#pragma once

#include <stdexcept>
#include <string>

namespace square {

/// Invalid or inconsistent experiment configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input data (unparseable files, missing columns, bad records).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A metric is undefined for the given input (single class, zero variance).
struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Checkpoint cannot be read, is truncated, or does not match expectations.
struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Input cannot be encoded for the requested variant.
struct EncodingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Training diverged or was given unusable data.
struct TrainingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace square
