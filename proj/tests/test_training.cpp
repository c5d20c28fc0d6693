#include "square/errors.hpp"
#include "square/metrics.hpp"
#include "square/synthetic.hpp"
#include "square/training.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"
#include "support/toy_setup.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace square {
namespace {

TEST(Loss, AnalyticValues) {
    EXPECT_NEAR(bce_loss(0.5, 1), std::log(2.0), 1e-12);
    EXPECT_NEAR(bce_loss(0.5, 1), 0.6931, 1e-4);
    EXPECT_NEAR(bce_loss(0.9, 1), 0.1054, 1e-4);
    EXPECT_NEAR(bce_loss(0.9, 0), -std::log(0.1), 1e-12);
}

TEST(Loss, ClampKeepsItFinite) {
    EXPECT_TRUE(std::isfinite(bce_loss(1.0, 0)));
    EXPECT_TRUE(std::isfinite(bce_loss(0.0, 1)));
    EXPECT_LE(bce_loss(1.0, 1), -std::log(1.0 - 1e-7) + 1e-15);
    EXPECT_NEAR(bce_loss(0.0, 1), -std::log(1e-7), 1e-9);
}

TEST(Loss, LabelFlipSymmetry) {
    for (double p : {1e-9, 0.01, 0.25, 0.5, 0.731, 0.99, 1.0}) EXPECT_EQ(bce_loss(p, 1), bce_loss(1 - p, 0));
}

class SyntheticData : public ::testing::Test {
protected:
    static void SetUpTestSuite() { data_ = new Dataset(make_synthetic()); }
    static void TearDownTestSuite() {
        delete data_;
        data_ = nullptr;
    }
    static Dataset split(Split s) { return select_split(*data_, s); }
    static Dataset* data_;
};
Dataset* SyntheticData::data_ = nullptr;

TEST_F(SyntheticData, LabelsFollowTheOverlapOracle) {
    EXPECT_EQ(split(Split::Train).size(), 500u);
    EXPECT_EQ(split(Split::Dev).size(), 200u);
    std::size_t positives = 0;
    for (const auto& ex : data_->examples) {
        ASSERT_EQ(oracle::overlap_label(ex), ex.label) << ex.example_id;
        ASSERT_FALSE(validate(ex).has_value()) << ex.example_id;
        positives += static_cast<std::size_t>(ex.label);
    }
    // Roughly balanced.
    EXPECT_GT(positives, data_->size() * 2 / 5);
    EXPECT_LT(positives, data_->size() * 3 / 5);
}

TEST_F(SyntheticData, GradientMatchesFiniteDifferences) {
    const auto fs = featurize(split(Split::Train), Technique::Square, SelectionPolicy{}, kDefaultMaxUnits,
                              *make_backbone("toy"));
    SplitMix64 rng(4242);
    for (int i = 0; i < 10; ++i) EXPECT_LT(testing::gradient_check_error(fs, rng), 1e-3);
}

TEST_F(SyntheticData, ToyTrainingSeparatesHeldOutData) {
    const auto cfg = testing::toy_train_config();
    const auto result = train(split(Split::Train), split(Split::Dev), cfg, make_backbone("toy"));
    ASSERT_EQ(result.log.epochs.size(), 20u);

    const auto test = split(Split::Test);
    ScoredSet s;
    std::vector<EncodedInput> inputs;
    for (const auto& ex : test.examples) {
        inputs.push_back(encode_example(ex, Technique::Square, cfg.selection_policy));
        s.labels.push_back(ex.label);
    }
    s.scores = score_batch(result.model, inputs, 32);
    EXPECT_GE(accuracy(s), 0.9);
    EXPECT_GE(auroc(s), 0.95);

    // A held-out positive scores above one half.
    for (std::size_t i = 0; i < test.size(); ++i) {
        if (s.labels[i] == 1) {
            EXPECT_GT(s.scores[i], 0.5);
            break;
        }
    }

    // The returned model is the argmax-AUROC snapshot.
    double best = 0;
    for (const auto& r : result.log.epochs) best = std::max(best, r.val_auroc);
    EXPECT_EQ(result.log.epochs[static_cast<std::size_t>(result.log.selected_epoch - 1)].val_auroc, best);
    ScoredSet dev;
    std::vector<EncodedInput> dev_inputs;
    for (const auto& ex : split(Split::Dev).examples) {
        dev_inputs.push_back(encode_example(ex, Technique::Square, cfg.selection_policy));
        dev.labels.push_back(ex.label);
    }
    dev.scores = score_batch(result.model, dev_inputs, 32);
    EXPECT_EQ(auroc(dev), best);
}

TEST_F(SyntheticData, TrainingIsReproducible) {
    auto cfg = testing::toy_train_config();
    cfg.epochs = 3;
    const auto a = train(split(Split::Train), split(Split::Dev), cfg, make_backbone("toy"));
    const auto b = train(split(Split::Train), split(Split::Dev), cfg, make_backbone("toy"));
    ASSERT_EQ(a.log.epochs.size(), b.log.epochs.size());
    for (std::size_t i = 0; i < a.log.epochs.size(); ++i)
        EXPECT_NEAR(a.log.epochs[i].mean_train_loss, b.log.epochs[i].mean_train_loss, 1e-6);
    EXPECT_EQ(a.model.weights, b.model.weights);
}

TEST_F(SyntheticData, SingleEpochLog) {
    auto cfg = testing::toy_train_config();
    cfg.epochs = 1;
    const auto r = train(split(Split::Train), split(Split::Dev), cfg, make_backbone("toy"));
    ASSERT_EQ(r.log.epochs.size(), 1u);
    EXPECT_EQ(r.log.selected_epoch, 1);
    EXPECT_EQ(r.log.epochs[0].epoch, 1);
}

TEST_F(SyntheticData, InjectedEvaluationSelectsArgmax) {
    auto cfg = testing::toy_train_config();
    cfg.epochs = 3;
    const std::vector<double> fake = {0.6, 0.9, 0.7};
    std::vector<ScorerModel> snapshots;
    TrainHooks hooks;
    hooks.evaluate = [&](int epoch, const ScorerModel& m) {
        snapshots.push_back(m);
        return DevEvaluation{0.5, fake[static_cast<std::size_t>(epoch - 1)]};
    };
    const auto r = train(split(Split::Train), split(Split::Dev), cfg, make_backbone("toy"), hooks);
    EXPECT_EQ(r.log.selected_epoch, 2);
    ASSERT_EQ(snapshots.size(), 3u);
    EXPECT_EQ(r.model.weights, snapshots[1].weights);
    EXPECT_NE(r.model.weights, snapshots[2].weights);
}

TEST_F(SyntheticData, SingleClassDevIsAnError) {
    Dataset dev = split(Split::Dev);
    std::erase_if(dev.examples, [](const QAExample& e) { return e.label == 0; });
    EXPECT_THROW(train(split(Split::Train), dev, testing::toy_train_config(), make_backbone("toy")), TrainingError);
    EXPECT_THROW(train(Dataset{}, split(Split::Dev), testing::toy_train_config(), make_backbone("toy")),
                 TrainingError);
}

class NanBackbone final : public Backbone {
public:
    std::string name() const override { return "nan"; }
    std::size_t dim() const override { return 2; }
    std::vector<Vector> encode_batch(std::span<const std::string> texts) const override {
        return std::vector<Vector>(texts.size(), Vector{std::numeric_limits<double>::quiet_NaN(), 1.0});
    }
};

TEST_F(SyntheticData, NonFiniteLossAbortsWithLocation) {
    try {
        train(split(Split::Train), split(Split::Dev), testing::toy_train_config(), std::make_shared<NanBackbone>());
        FAIL() << "expected TrainingError";
    } catch (const TrainingError& e) {
        EXPECT_NE(std::string(e.what()).find("epoch 1, step 1"), std::string::npos) << e.what();
    }
}

TEST(SelectBestEpoch, FirstMaximumWins) {
    EXPECT_EQ(select_best_epoch(std::vector<double>{0.6, 0.9, 0.7}), 2);
    EXPECT_EQ(select_best_epoch(std::vector<double>{0.8, 0.8, 0.7}), 1);
    EXPECT_EQ(select_best_epoch(std::vector<double>{0.5}), 1);
    EXPECT_THROW(select_best_epoch(std::vector<double>{}), std::invalid_argument);
}

TEST(TrainConfig, DefaultsAndValidation) {
    TrainConfig c;
    EXPECT_EQ(c.epochs, 20);
    EXPECT_EQ(c.batch_size, 32);
    EXPECT_DOUBLE_EQ(c.learning_rate, 1e-6);
    EXPECT_TRUE(c.shuffle_each_epoch);
    EXPECT_DOUBLE_EQ(c.adam_beta1, 0.9);
    EXPECT_DOUBLE_EQ(c.adam_beta2, 0.999);
    EXPECT_DOUBLE_EQ(c.adam_epsilon, 1e-8);
    c.epochs = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.learning_rate = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.batch_size = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    TrainConfig a, b;
    b.learning_rate = 1e-5;
    EXPECT_NE(a.fingerprint("toy"), b.fingerprint("toy"));
    EXPECT_EQ(a.fingerprint("toy"), TrainConfig{}.fingerprint("toy"));
}

}  // namespace
}  // namespace square
