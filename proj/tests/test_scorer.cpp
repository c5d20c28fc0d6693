#include "square/errors.hpp"
#include "square/hashing.hpp"
#include "square/scorer.hpp"
#include "support/tmp.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <fstream>

namespace square {
namespace {

EncodedInput input(std::string text) {
    EncodedInput in;
    in.text = std::move(text);
    return in;
}

ScorerModel random_model(std::uint64_t seed, double scale = 2.0) {
    ScorerModel m = ScorerModel::zero_initialized(make_backbone("toy"), "fp-test");
    SplitMix64 rng(seed);
    for (float& w : m.weights) w = static_cast<float>(scale * (2 * rng.uniform() - 1));
    m.bias = static_cast<float>(rng.uniform() - 0.5);
    return m;
}

std::vector<EncodedInput> sample_inputs(std::size_t n) {
    std::vector<EncodedInput> out;
    for (std::size_t i = 0; i < n; ++i)
        out.push_back(input("Question: q" + std::to_string(i) + " Target: answer " + std::to_string(i * 7) +
                            " Pos_Ref: answer " + std::to_string(i) + " Neg_Ref: other " + std::to_string(i % 3)));
    return out;
}

TEST(Score, ZeroHeadGivesOneHalf) {
    const auto m = ScorerModel::zero_initialized(make_backbone("toy"));
    EXPECT_EQ(score(m, input("Question: a Target: b")), 0.5);
    EXPECT_EQ(score(m, input("anything at all")), 0.5);
}

TEST(Score, DeterministicAndInRange) {
    const auto m = random_model(1, 500.0);
    for (const auto& in : sample_inputs(50)) {
        const double s = score(m, in);
        EXPECT_GE(s, 0.0);
        EXPECT_LE(s, 1.0);
        EXPECT_EQ(score(m, in), s);
    }
}

TEST(Score, EmptyInputIsAnError) {
    const auto m = ScorerModel::zero_initialized(make_backbone("toy"));
    EXPECT_THROW(score(m, input("")), std::invalid_argument);
    ScorerModel no_backbone;
    EXPECT_THROW(score(no_backbone, input("x")), std::runtime_error);
}

TEST(ScoreBatch, BatchSizeDoesNotChangeScores) {
    const auto m = random_model(2);
    const auto inputs = sample_inputs(33);
    const auto one = score_batch(m, inputs, 1);
    const auto many = score_batch(m, inputs, 32);
    ASSERT_EQ(one.size(), 33u);
    ASSERT_EQ(many.size(), 33u);
    for (std::size_t i = 0; i < one.size(); ++i) EXPECT_NEAR(one[i], many[i], 1e-6);
    EXPECT_TRUE(score_batch(m, {}, 4).empty());
    const auto single = score_batch(m, std::span(inputs.data(), 1), 8);
    ASSERT_EQ(single.size(), 1u);
    EXPECT_EQ(single[0], score(m, inputs[0]));
    EXPECT_THROW(score_batch(m, inputs, 0), std::invalid_argument);
}

class BrokenBackbone final : public Backbone {
public:
    std::string name() const override { return "broken"; }
    std::size_t dim() const override { return 4; }
    std::vector<Vector> encode_batch(std::span<const std::string>) const override {
        throw std::runtime_error("weights not found");
    }
};

TEST(Score, BackboneFailurePropagates) {
    ScorerModel m = ScorerModel::zero_initialized(std::make_shared<BrokenBackbone>());
    EXPECT_THROW(score(m, input("x")), std::runtime_error);
}

TEST(Backbone, RegistryAndToyShape) {
    EXPECT_THROW(make_backbone("deberta-v3-large"), ConfigError);
    auto toy = make_backbone("toy");
    EXPECT_EQ(toy->dim(), 64u);
    const auto v = toy->encode_batch(std::vector<std::string>{"Question: a b Target: c"});
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].size(), 64u);
    register_backbone("toy16", [] { return std::make_shared<const ToyBackbone>(16); });
    EXPECT_EQ(make_backbone("toy16")->dim(), 16u);
}

TEST(Backbone, ToyMatchFeaturesOccupyDistinctBuckets) {
    // The overlap signal must not cancel out through a hash collision.
    const auto b = [](const char* f) { return fnv1a64(f) % ToyBackbone::kDefaultDim; };
    EXPECT_NE(b("<match:pos>"), b("<match:neg>"));
    EXPECT_NE(b("<match:pos>"), b("<match:q>"));
    EXPECT_NE(b("<match:neg>"), b("<match:q>"));
}

TEST(Checkpoint, RoundTripScoresIdentically) {
    const auto dir = testing::scratch_dir("ckpt_roundtrip");
    const auto m = random_model(3);
    save_checkpoint(m, dir / "m.ckpt");
    const auto loaded = load_checkpoint(dir / "m.ckpt", std::string("fp-test"));
    EXPECT_EQ(loaded.config_fingerprint, "fp-test");
    EXPECT_EQ(loaded.version, kModelVersion);
    EXPECT_EQ(loaded.weights, m.weights);
    for (const auto& in : sample_inputs(20)) EXPECT_NEAR(score(loaded, in), score(m, in), 1e-7);
}

TEST(Checkpoint, TruncatedFileIsRejected) {
    const auto dir = testing::scratch_dir("ckpt_truncated");
    save_checkpoint(random_model(4), dir / "m.ckpt");
    const auto size = std::filesystem::file_size(dir / "m.ckpt");
    for (auto keep : {size - 1, size - 4, std::uintmax_t{20}, std::uintmax_t{5}, std::uintmax_t{0}}) {
        std::filesystem::copy_file(dir / "m.ckpt", dir / "t.ckpt", std::filesystem::copy_options::overwrite_existing);
        std::filesystem::resize_file(dir / "t.ckpt", keep);
        EXPECT_THROW(load_checkpoint(dir / "t.ckpt"), CheckpointError) << "kept " << keep << " bytes";
    }
    EXPECT_THROW(load_checkpoint(dir / "missing.ckpt"), CheckpointError);
}

TEST(Checkpoint, FingerprintMismatchNamesBoth) {
    const auto dir = testing::scratch_dir("ckpt_fingerprint");
    save_checkpoint(random_model(5), dir / "m.ckpt");
    try {
        load_checkpoint(dir / "m.ckpt", std::string("fp-other"));
        FAIL() << "expected CheckpointError";
    } catch (const CheckpointError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("fp-test"), std::string::npos);
        EXPECT_NE(msg.find("fp-other"), std::string::npos);
    }
}

TEST(Checkpoint, LayoutIsHeaderThenLittleEndianFloats) {
    const auto dir = testing::scratch_dir("ckpt_layout");
    ScorerModel m = ScorerModel::zero_initialized(make_backbone("toy"), "abc");
    m.weights[0] = 1.0f;
    m.bias = -2.0f;
    save_checkpoint(m, dir / "m.ckpt");
    std::ifstream in(dir / "m.ckpt", std::ios::binary);
    std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(blob.substr(0, 8), "SQUARECK");
    const auto header_len = static_cast<unsigned char>(blob[8]) | (static_cast<unsigned char>(blob[9]) << 8);
    const auto header = nlohmann::json::parse(blob.substr(12, header_len));
    EXPECT_EQ(header["d"], 64);
    EXPECT_EQ(header["backbone"], "toy");
    EXPECT_EQ(blob.size(), 12 + header_len + 4 * 65u);
    // 1.0f = 0x3f800000, stored little-endian
    EXPECT_EQ(blob.substr(12 + header_len, 4), std::string("\x00\x00\x80\x3f", 4));
    // -2.0f = 0xc0000000 as the trailing bias
    EXPECT_EQ(blob.substr(blob.size() - 4), std::string("\x00\x00\x00\xc0", 4));
}

}  // namespace
}  // namespace square
