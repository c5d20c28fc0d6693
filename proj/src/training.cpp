#include "square/training.hpp"

#include "square/errors.hpp"
#include "square/hashing.hpp"
#include "square/metrics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace square {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(learning_rate > 0)) throw ConfigError("learning_rate must be > 0");
    if (!(adam_beta1 >= 0 && adam_beta1 < 1) || !(adam_beta2 >= 0 && adam_beta2 < 1))
        throw ConfigError("Adam betas must lie in [0, 1)");
    if (!(adam_epsilon > 0)) throw ConfigError("Adam epsilon must be > 0");
    if (max_units < 1) throw ConfigError("max_units must be >= 1");
    selection_policy.validate();
}

std::string TrainConfig::fingerprint(std::string_view backbone_name) const {
    std::ostringstream s;
    s.precision(17);
    s << "epochs=" << epochs << ";batch=" << batch_size << ";lr=" << learning_rate
      << ";b1=" << adam_beta1 << ";b2=" << adam_beta2 << ";eps=" << adam_epsilon
      << ";shuffle=" << shuffle_each_epoch << ";seed=" << seed << ";technique=" << to_string(technique)
      << ";refs=" << selection_policy.descriptor() << ";k=" << selection_policy.total_budget
      << ";mode=" << static_cast<int>(selection_policy.mode)
      << ";split=" << static_cast<int>(selection_policy.split_rule)
      << ";sel_seed=" << selection_policy.seed << ";max_units=" << max_units
      << ";backbone=" << backbone_name << ";version=" << kModelVersion;
    return to_hex(fnv1a64(s.str()));
}

std::string TrainLog::to_jsonl() const {
    std::string out;
    for (const auto& r : epochs) {
        nlohmann::ordered_json j;
        j["epoch"] = r.epoch;
        j["mean_train_loss"] = r.mean_train_loss;
        j["val_accuracy"] = r.val_accuracy;
        j["val_auroc"] = r.val_auroc;
        j["selected"] = r.epoch == selected_epoch;
        out += j.dump();
        out += '\n';
    }
    return out;
}

FeatureSet featurize(const Dataset& d, Technique technique, const SelectionPolicy& policy,
                     int max_units, const Backbone& backbone) {
    FeatureSet fs;
    std::vector<std::string> texts;
    texts.reserve(d.size());
    for (const auto& ex : d.examples) {
        texts.push_back(encode_example(ex, technique, policy, max_units).text);
        fs.labels.push_back(ex.label);
        fs.example_ids.push_back(ex.example_id);
    }
    fs.features = backbone.encode_batch(texts);
    if (fs.features.size() != texts.size())
        throw std::runtime_error("backbone '" + backbone.name() + "' returned the wrong number of vectors");
    return fs;
}

double bce_loss(double p, int y) {
    // Clamp the probability given to the true class so loss(p, 1) == loss(1 - p, 0).
    const double p_true = std::clamp(y == 1 ? p : 1.0 - p, kProbabilityClamp, 1.0 - kProbabilityClamp);
    return -std::log(p_true);
}

namespace {

double head_logit(const Vector& x, const HeadParams& head) {
    double z = head.bias;
    for (std::size_t i = 0; i < x.size(); ++i) z += head.weights[i] * x[i];
    return z;
}

}  // namespace

double mean_loss(const FeatureSet& data, std::span<const std::size_t> batch, const HeadParams& head) {
    if (batch.empty()) throw std::invalid_argument("empty minibatch");
    double total = 0;
    for (std::size_t i : batch) total += bce_loss(sigmoid(head_logit(data.features[i], head)), data.labels[i]);
    return total / static_cast<double>(batch.size());
}

HeadParams mean_loss_gradient(const FeatureSet& data, std::span<const std::size_t> batch,
                              const HeadParams& head) {
    if (batch.empty()) throw std::invalid_argument("empty minibatch");
    HeadParams g;
    g.weights.assign(head.weights.size(), 0.0);
    for (std::size_t i : batch) {
        const Vector& x = data.features[i];
        const double residual = sigmoid(head_logit(x, head)) - data.labels[i];
        for (std::size_t k = 0; k < x.size(); ++k) g.weights[k] += residual * x[k];
        g.bias += residual;
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    for (double& w : g.weights) w *= inv;
    g.bias *= inv;
    return g;
}

int select_best_epoch(std::span<const double> aurocs) {
    if (aurocs.empty()) throw std::invalid_argument("no epochs to select from");
    // max_element returns the first maximum.
    return static_cast<int>(std::max_element(aurocs.begin(), aurocs.end()) - aurocs.begin()) + 1;
}

namespace {

class Adam {
public:
    Adam(std::size_t n, const TrainConfig& cfg)
        : m_(n + 1, 0.0), v_(n + 1, 0.0), cfg_(cfg) {}

    void step(HeadParams& head, const HeadParams& grad) {
        ++t_;
        const double c1 = 1.0 - std::pow(cfg_.adam_beta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(cfg_.adam_beta2, static_cast<double>(t_));
        auto update = [&](double& param, double g, std::size_t k) {
            m_[k] = cfg_.adam_beta1 * m_[k] + (1.0 - cfg_.adam_beta1) * g;
            v_[k] = cfg_.adam_beta2 * v_[k] + (1.0 - cfg_.adam_beta2) * g * g;
            param -= cfg_.learning_rate * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + cfg_.adam_epsilon);
        };
        for (std::size_t k = 0; k < head.weights.size(); ++k) update(head.weights[k], grad.weights[k], k);
        update(head.bias, grad.bias, head.weights.size());
    }

private:
    std::vector<double> m_, v_;
    const TrainConfig& cfg_;
    long t_ = 0;
};

ScorerModel snapshot(const HeadParams& head, const std::shared_ptr<const Backbone>& backbone,
                     const std::string& fingerprint) {
    ScorerModel m = ScorerModel::zero_initialized(backbone, fingerprint);
    for (std::size_t k = 0; k < head.weights.size(); ++k) m.weights[k] = static_cast<float>(head.weights[k]);
    m.bias = static_cast<float>(head.bias);
    return m;
}

DevEvaluation evaluate_features(const ScorerModel& model, const FeatureSet& dev) {
    ScoredSet s;
    s.labels = dev.labels;
    s.example_ids = dev.example_ids;
    s.scores.reserve(dev.size());
    for (const auto& x : dev.features) s.scores.push_back(sigmoid(model.logit(x)));
    return {accuracy(s), auroc(s)};
}

}  // namespace

TrainResult train(const Dataset& train_set, const Dataset& dev_set, const TrainConfig& cfg,
                  std::shared_ptr<const Backbone> backbone, const TrainHooks& hooks) {
    cfg.validate();
    if (!backbone) throw std::invalid_argument("train needs a backbone");
    if (train_set.empty()) throw TrainingError("training set is empty");
    if (dev_set.empty()) throw TrainingError("dev set is empty");
    const bool dev_pos = std::any_of(dev_set.examples.begin(), dev_set.examples.end(),
                                     [](const QAExample& e) { return e.label == 1; });
    const bool dev_neg = std::any_of(dev_set.examples.begin(), dev_set.examples.end(),
                                     [](const QAExample& e) { return e.label == 0; });
    if (!hooks.evaluate && !(dev_pos && dev_neg))
        throw TrainingError("dev set has a single class; AUROC is undefined");

    const FeatureSet train_fs = featurize(train_set, cfg.technique, cfg.selection_policy, cfg.max_units, *backbone);
    const FeatureSet dev_fs = featurize(dev_set, cfg.technique, cfg.selection_policy, cfg.max_units, *backbone);
    const std::string fingerprint = cfg.fingerprint(backbone->name());

    HeadParams head;
    head.weights.assign(backbone->dim(), 0.0);
    Adam adam(backbone->dim(), cfg);
    SplitMix64 rng(derive_stream_seed(cfg.seed, "train-shuffle"));

    std::vector<std::size_t> order(train_fs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainResult result{ScorerModel::zero_initialized(backbone, fingerprint), {}};
    std::vector<double> aurocs;
    const auto batch = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (cfg.shuffle_each_epoch) {
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[static_cast<std::size_t>(rng.below(i))]);
        }
        double loss_sum = 0;
        int step = 0;
        for (std::size_t start = 0; start < order.size(); start += batch, ++step) {
            const std::span<const std::size_t> mb(order.data() + start, std::min(batch, order.size() - start));
            const double loss = mean_loss(train_fs, mb, head);
            if (!std::isfinite(loss))
                throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", step " +
                                    std::to_string(step + 1));
            loss_sum += loss * static_cast<double>(mb.size());
            adam.step(head, mean_loss_gradient(train_fs, mb, head));
        }

        ScorerModel snap = snapshot(head, backbone, fingerprint);
        const DevEvaluation eval = hooks.evaluate ? hooks.evaluate(epoch, snap) : evaluate_features(snap, dev_fs);
        EpochRecord rec{epoch, loss_sum / static_cast<double>(order.size()), eval.accuracy, eval.auroc};
        result.log.epochs.push_back(rec);
        aurocs.push_back(eval.auroc);
        if (hooks.on_epoch) hooks.on_epoch(rec);
        if (select_best_epoch(aurocs) == epoch) result.model = std::move(snap);
    }
    result.log.selected_epoch = select_best_epoch(aurocs);
    return result;
}

}  // namespace square
