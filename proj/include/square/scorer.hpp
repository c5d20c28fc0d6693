#pragma once

#include "square/backbone.hpp"
#include "square/encoding.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace square {

inline constexpr const char* kModelVersion = "square-scorer/1";

/// Backbone plus a single affine head on the pooled vector; the score is
/// sigmoid(head(backbone(text))). Immutable once built, so one instance can
/// be shared by scoring threads.
struct ScorerModel {
    std::shared_ptr<const Backbone> backbone;
    std::vector<float> weights;  // size backbone->dim()
    float bias = 0.0f;
    std::string version = kModelVersion;
    std::string config_fingerprint;

    /// Zero head: every score is exactly 0.5.
    static ScorerModel zero_initialized(std::shared_ptr<const Backbone> backbone,
                                        std::string config_fingerprint = {});

    double logit(const Vector& pooled) const;
};

double sigmoid(double x);

double score(const ScorerModel& model, const EncodedInput& input);
std::vector<double> score_batch(const ScorerModel& model, std::span<const EncodedInput> inputs,
                                std::size_t batch_size);

/// File layout: 8-byte magic "SQUARECK", u32 little-endian header length,
/// JSON header {format, version, fingerprint, backbone, d, weight_count},
/// then weight_count little-endian float32 values (head weights, then bias).
void save_checkpoint(const ScorerModel& model, const std::filesystem::path& path);

/// Throws CheckpointError on a bad magic, truncated data, unknown version or,
/// when `expected_fingerprint` is given, a fingerprint mismatch.
ScorerModel load_checkpoint(const std::filesystem::path& path,
                            const std::optional<std::string>& expected_fingerprint = std::nullopt);

}  // namespace square
