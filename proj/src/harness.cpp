#include "square/harness.hpp"

#include "square/errors.hpp"
#include "square/external.hpp"
#include "square/hashing.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

namespace square {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config (de)serialization

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + ": key '" + key + "' has the wrong type");
    }
}

fs::path resolve(const fs::path& p, const fs::path& base) {
    if (p.empty() || p.is_absolute() || base.empty()) return p;
    return (base / p).lexically_normal();
}

Technique technique_from(const std::string& s, const std::string& where) {
    auto t = parse_technique(s);
    if (!t) throw ConfigError(where + ": unknown technique '" + s + "'");
    return *t;
}

ojson policy_to_json(const SelectionPolicy& p) {
    ojson j;
    j["mode"] = p.mode == SelectionMode::FixedK ? "fixed_k" : "random_range";
    j["total_budget"] = p.total_budget;
    j["range_low"] = p.range_low;
    j["range_high"] = p.range_high;
    j["split_rule"] = p.split_rule == SplitRule::Balanced ? "balanced" : "positives_first";
    j["seed"] = p.seed;
    return j;
}

SelectionPolicy policy_from_json(const json& j) {
    const std::string where = "selection_policy";
    reject_unknown_keys(j, {"mode", "total_budget", "range_low", "range_high", "split_rule", "seed"}, where);
    SelectionPolicy p;
    const auto mode = get_or<std::string>(j, "mode", "fixed_k", where);
    if (mode == "fixed_k") p.mode = SelectionMode::FixedK;
    else if (mode == "random_range") p.mode = SelectionMode::RandomRange;
    else throw ConfigError(where + ": unknown mode '" + mode + "'");
    p.total_budget = get_or<int>(j, "total_budget", p.total_budget, where);
    p.range_low = get_or<int>(j, "range_low", p.range_low, where);
    p.range_high = get_or<int>(j, "range_high", p.range_high, where);
    const auto rule = get_or<std::string>(j, "split_rule", "balanced", where);
    if (rule == "balanced") p.split_rule = SplitRule::Balanced;
    else if (rule == "positives_first") p.split_rule = SplitRule::PositivesFirst;
    else throw ConfigError(where + ": unknown split_rule '" + rule + "'");
    p.seed = get_or<std::uint64_t>(j, "seed", p.seed, where);
    return p;
}

ojson train_config_to_json(const TrainConfig& c) {
    ojson j;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["learning_rate"] = c.learning_rate;
    j["optimizer"] = "adam";
    j["adam_beta1"] = c.adam_beta1;
    j["adam_beta2"] = c.adam_beta2;
    j["adam_epsilon"] = c.adam_epsilon;
    j["precision"] = "fp32";
    j["shuffle_each_epoch"] = c.shuffle_each_epoch;
    j["seed"] = c.seed;
    j["selection_metric"] = "auroc";
    j["max_units"] = c.max_units;
    return j;
}

TrainConfig train_config_from_json(const json& j) {
    const std::string where = "train_config";
    reject_unknown_keys(j, {"epochs", "batch_size", "learning_rate", "optimizer", "adam_beta1", "adam_beta2",
                            "adam_epsilon", "precision", "shuffle_each_epoch", "seed", "selection_metric",
                            "max_units"},
                        where);
    TrainConfig c;
    c.epochs = get_or<int>(j, "epochs", c.epochs, where);
    c.batch_size = get_or<int>(j, "batch_size", c.batch_size, where);
    c.learning_rate = get_or<double>(j, "learning_rate", c.learning_rate, where);
    c.adam_beta1 = get_or<double>(j, "adam_beta1", c.adam_beta1, where);
    c.adam_beta2 = get_or<double>(j, "adam_beta2", c.adam_beta2, where);
    c.adam_epsilon = get_or<double>(j, "adam_epsilon", c.adam_epsilon, where);
    c.shuffle_each_epoch = get_or<bool>(j, "shuffle_each_epoch", c.shuffle_each_epoch, where);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed, where);
    c.max_units = get_or<int>(j, "max_units", c.max_units, where);
    if (get_or<std::string>(j, "optimizer", "adam", where) != "adam")
        throw ConfigError(where + ": only the adam optimizer is supported");
    if (get_or<std::string>(j, "precision", "fp32", where) != "fp32")
        throw ConfigError(where + ": only fp32 precision is supported");
    if (get_or<std::string>(j, "selection_metric", "auroc", where) != "auroc")
        throw ConfigError(where + ": only auroc checkpoint selection is supported");
    return c;
}

DatasetRef dataset_ref_from_json(const json& j, const fs::path& base, const std::string& where) {
    if (j.is_string()) return {"", resolve(j.get<std::string>(), base)};
    reject_unknown_keys(j, {"name", "path"}, where);
    if (!j.contains("path")) throw ConfigError(where + ": missing 'path'");
    return {get_or<std::string>(j, "name", "", where), resolve(get_or<std::string>(j, "path", "", where), base)};
}

ojson dataset_ref_to_json(const DatasetRef& r) {
    ojson j;
    j["name"] = r.name;
    j["path"] = r.path.string();
    return j;
}

}  // namespace

void ExperimentConfig::validate() const {
    selection_policy.validate();
    train_config.validate();
    if (backbone.empty()) throw ConfigError("backbone must be named");
    if (checkpoint_mode == CheckpointMode::Shared && !train_dataset && !eval_datasets.empty())
        throw ConfigError("train_dataset is required in shared checkpoint mode");
    for (const auto& d : eval_datasets)
        if (d.path.empty()) throw ConfigError("eval dataset without a path");
    const int budget_low =
        selection_policy.mode == SelectionMode::FixedK ? selection_policy.total_budget : selection_policy.range_low;
    for (const std::optional<Technique>& t : {std::optional<Technique>(technique), baseline_technique}) {
        if (!t) continue;
        if (variant_for(*t).max_refs_used() != 0 && budget_low < 1)
            throw ConfigError(std::string(to_string(*t)) + " needs a reference budget of at least 1");
    }
}

ojson ExperimentConfig::to_json() const {
    ojson j;
    j["name"] = name;
    j["backbone"] = backbone;
    if (train_dataset) j["train_dataset"] = dataset_ref_to_json(*train_dataset);
    if (dev_path) j["dev_path"] = dev_path->string();
    ojson evals = ojson::array();
    for (const auto& d : eval_datasets) evals.push_back(dataset_ref_to_json(d));
    j["eval_datasets"] = evals;
    j["technique"] = std::string(to_string(technique));
    if (baseline_technique) j["baseline_technique"] = std::string(to_string(*baseline_technique));
    j["selection_policy"] = policy_to_json(selection_policy);
    j["train_config"] = train_config_to_json(train_config);
    j["external_scorers"] = external_scorers;
    j["checkpoint_mode"] = checkpoint_mode == CheckpointMode::Shared ? "shared" : "per_dataset";
    j["drop_unencodable"] = drop_unencodable;
    j["plots"] = plots;
    j["output_dir"] = output_dir.string();
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const fs::path& base_dir) {
    const std::string where = "experiment config";
    reject_unknown_keys(j,
                        {"name", "backbone", "train_dataset", "dev_path", "eval_datasets", "technique",
                         "baseline_technique", "selection_policy", "train_config", "external_scorers",
                         "checkpoint_mode", "drop_unencodable", "plots", "output_dir", "$schema"},
                        where);
    ExperimentConfig c;
    c.name = get_or<std::string>(j, "name", c.name, where);
    c.backbone = get_or<std::string>(j, "backbone", c.backbone, where);
    if (j.contains("train_dataset") && !j["train_dataset"].is_null())
        c.train_dataset = dataset_ref_from_json(j["train_dataset"], base_dir, "train_dataset");
    if (j.contains("dev_path") && !j["dev_path"].is_null())
        c.dev_path = resolve(get_or<std::string>(j, "dev_path", "", where), base_dir);
    if (j.contains("eval_datasets")) {
        if (!j["eval_datasets"].is_array()) throw ConfigError("eval_datasets must be an array");
        for (const auto& d : j["eval_datasets"])
            c.eval_datasets.push_back(dataset_ref_from_json(d, base_dir, "eval_datasets"));
    }
    c.technique = technique_from(get_or<std::string>(j, "technique", "SQUARE", where), where);
    if (j.contains("baseline_technique") && !j["baseline_technique"].is_null())
        c.baseline_technique = technique_from(get_or<std::string>(j, "baseline_technique", "", where), where);
    if (j.contains("selection_policy")) c.selection_policy = policy_from_json(j["selection_policy"]);
    if (j.contains("train_config")) c.train_config = train_config_from_json(j["train_config"]);
    c.external_scorers = get_or<std::vector<std::string>>(j, "external_scorers", {}, where);
    const auto mode = get_or<std::string>(j, "checkpoint_mode", "shared", where);
    if (mode == "shared") c.checkpoint_mode = CheckpointMode::Shared;
    else if (mode == "per_dataset") c.checkpoint_mode = CheckpointMode::PerDataset;
    else throw ConfigError(where + ": unknown checkpoint_mode '" + mode + "'");
    c.drop_unencodable = get_or<bool>(j, "drop_unencodable", c.drop_unencodable, where);
    c.plots = get_or<bool>(j, "plots", c.plots, where);
    c.output_dir = resolve(get_or<std::string>(j, "output_dir", "out", where), base_dir);
    c.validate();
    return c;
}

std::string ExperimentConfig::hash() const {
    return to_hex(fnv1a64(to_json().dump()));
}

ExperimentConfig load_experiment_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return ExperimentConfig::from_json(j, fs::absolute(path).parent_path());
}

std::string n_refs_descriptor(Technique t, const SelectionPolicy& policy) {
    const int max_refs = variant_for(t).max_refs_used();
    if (max_refs >= 0) return std::to_string(max_refs);
    return policy.descriptor();
}

fs::path cache_dir_for(const ExperimentConfig& cfg) {
    if (const char* env = std::getenv(kCacheDirEnv); env && *env) return env;
    return cfg.output_dir / "cache";
}

StageFailure::StageFailure(std::string stage, FailureKind kind, const std::string& cause)
    : std::runtime_error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)), kind_(kind) {}

// ---------------------------------------------------------------------------
// Running

namespace {

FailureKind classify(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return FailureKind::Config;
    if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const EncodingError*>(&e) ||
        dynamic_cast<const MetricError*>(&e))
        return FailureKind::Data;
    if (auto* sf = dynamic_cast<const StageFailure*>(&e)) return sf->kind();
    return FailureKind::Runtime;
}

template <typename F>
auto stage(const std::string& name, F&& body) {
    try {
        return body();
    } catch (const StageFailure&) {
        throw;
    } catch (const std::exception& e) {
        throw StageFailure(name, classify(e), e.what());
    }
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

struct LoadedEval {
    std::string name;
    Dataset full;
    Dataset test;
};

ojson rejects_to_json(const std::vector<Reject>& rejects) {
    ojson j;
    j["count"] = rejects.size();
    ojson sample = ojson::array();
    for (std::size_t i = 0; i < rejects.size() && i < 20; ++i)
        sample.push_back({{"line", rejects[i].line}, {"reason", rejects[i].reason}});
    j["first"] = sample;
    return j;
}

// Drops examples the technique cannot encode when the config allows it.
Dataset encodable_subset(const Dataset& d, Technique t, const ExperimentConfig& cfg, std::size_t& dropped) {
    if (!cfg.drop_unencodable) return d;
    Dataset out;
    out.name = d.name;
    out.provenance = d.provenance;
    for (const auto& ex : d.examples) {
        try {
            encode_example(ex, t, cfg.selection_policy, cfg.train_config.max_units);
            out.examples.push_back(ex);
        } catch (const EncodingError&) {
            ++dropped;
        }
    }
    return out;
}

}  // namespace

ScoredSet score_dataset(const ScorerModel& model, const Dataset& d, Technique technique,
                        const SelectionPolicy& policy, int max_units, std::size_t batch_size) {
    std::vector<EncodedInput> inputs;
    ScoredSet s;
    inputs.reserve(d.size());
    for (const auto& ex : d.examples) {
        inputs.push_back(encode_example(ex, technique, policy, max_units));
        s.labels.push_back(ex.label);
        s.example_ids.push_back(ex.example_id);
    }
    s.scores = score_batch(model, inputs, batch_size);
    return s;
}

TrainedModel train_or_load(const ExperimentConfig& cfg, Technique technique, const Dataset& train_split,
                           const Dataset& dev_split) {
    TrainConfig tc = cfg.train_config;
    tc.technique = technique;
    tc.selection_policy = cfg.selection_policy;
    auto backbone = make_backbone(cfg.backbone);

    const std::string train_fp = tc.fingerprint(backbone->name());
    TrainedModel out;
    out.cache_key = to_hex(fnv1a64(train_fp + "|" + fingerprint(train_split) + "|" + fingerprint(dev_split)));
    const fs::path dir = cache_dir_for(cfg);
    out.checkpoint = dir / (out.cache_key + ".ckpt");

    if (fs::exists(out.checkpoint)) {
        out.model = load_checkpoint(out.checkpoint, train_fp);
        out.cache_hit = true;
        return out;
    }
    TrainResult r = train(train_split, dev_split, tc, backbone);
    fs::create_directories(dir);
    save_checkpoint(r.model, out.checkpoint);
    write_file(dir / (out.cache_key + ".trainlog.jsonl"), r.log.to_jsonl());
    out.model = std::move(r.model);
    out.log = std::move(r.log);
    return out;
}

EvalReport run_experiment(const ExperimentConfig& cfg) {
    EvalReport report;
    ojson runs = ojson::array();
    const fs::path out_dir = cfg.output_dir;
    std::error_code ec;
    fs::remove_all(out_dir / "failed", ec);
    fs::remove_all(out_dir / "trainlogs", ec);

    try {
        report.metadata["name"] = cfg.name;
        report.metadata["config_hash"] = cfg.hash();
        report.metadata["started_at"] = utc_now();
        report.metadata["backbone"] = cfg.backbone;
        report.metadata["technique"] = std::string(to_string(cfg.technique));
        if (cfg.baseline_technique)
            report.metadata["baseline_technique"] = std::string(to_string(*cfg.baseline_technique));
        report.metadata["checkpoint_mode"] = cfg.checkpoint_mode == CheckpointMode::Shared ? "shared" : "per_dataset";

        stage("config", [&] { cfg.validate(); return 0; });

        // -- load
        ojson fingerprints = ojson::object();
        Dataset train_split, dev_split;
        std::vector<LoadedEval> evals;
        stage("load", [&] {
            if (cfg.train_dataset) {
                LoadResult lr = load_jsonl(cfg.train_dataset->path);
                report.rejects["train:" + lr.dataset.name] = rejects_to_json(lr.rejects);
                train_split = select_split(lr.dataset, Split::Train);
                if (cfg.dev_path) {
                    LoadResult dr = load_jsonl(*cfg.dev_path);
                    report.rejects["dev:" + dr.dataset.name] = rejects_to_json(dr.rejects);
                    dev_split = select_split(dr.dataset, Split::Dev);
                } else {
                    dev_split = select_split(lr.dataset, Split::Dev);
                }
                fingerprints["train"] = {{"path", cfg.train_dataset->path.string()},
                                         {"fingerprint", fingerprint(lr.dataset)},
                                         {"train_examples", train_split.size()},
                                         {"dev_examples", dev_split.size()}};
            }
            for (const auto& ref : cfg.eval_datasets) {
                LoadResult lr = load_jsonl(ref.path);
                LoadedEval e;
                e.name = ref.name.empty() ? lr.dataset.name : ref.name;
                report.rejects[e.name] = rejects_to_json(lr.rejects);
                e.test = select_split(lr.dataset, Split::Test);
                fingerprints[e.name] = {{"path", ref.path.string()},
                                        {"fingerprint", fingerprint(lr.dataset)},
                                        {"test_examples", e.test.size()}};
                e.full = std::move(lr.dataset);
                evals.push_back(std::move(e));
            }
            return 0;
        });
        report.metadata["datasets"] = fingerprints;

        std::vector<Technique> techniques = {cfg.technique};
        if (cfg.baseline_technique && *cfg.baseline_technique != cfg.technique)
            techniques.push_back(*cfg.baseline_technique);

        auto record_run = [&](Technique t, const std::string& scope, const TrainedModel& tm) {
            runs.push_back({{"technique", std::string(to_string(t))},
                            {"scope", scope},
                            {"cache_key", tm.cache_key},
                            {"cache_hit", tm.cache_hit},
                            {"checkpoint", tm.checkpoint.string()},
                            {"selected_epoch", tm.log ? ojson(tm.log->selected_epoch) : ojson(nullptr)}});
            if (tm.log)
                write_file(out_dir / "trainlogs" / (std::string(to_string(t)) + "_" + scope + ".jsonl"),
                           tm.log->to_jsonl());
        };

        std::size_t dropped = 0;
        for (Technique t : techniques) {
            std::optional<TrainedModel> shared;
            if (cfg.checkpoint_mode == CheckpointMode::Shared && !evals.empty()) {
                shared = stage("train", [&] {
                    return train_or_load(cfg, t, encodable_subset(train_split, t, cfg, dropped),
                                         encodable_subset(dev_split, t, cfg, dropped));
                });
                record_run(t, "shared", *shared);
            }
            for (const auto& e : evals) {
                std::optional<TrainedModel> own;
                if (!shared) {
                    own = stage("train", [&] {
                        return train_or_load(cfg, t,
                                             encodable_subset(select_split(e.full, Split::Train), t, cfg, dropped),
                                             encodable_subset(select_split(e.full, Split::Dev), t, cfg, dropped));
                    });
                    record_run(t, e.name, *own);
                }
                const TrainedModel& tm = shared ? *shared : *own;
                const ScoredSet scored = stage("score", [&] {
                    const Dataset test = encodable_subset(e.test, t, cfg, dropped);
                    return score_dataset(tm.model, test, t, cfg.selection_policy, cfg.train_config.max_units,
                                         static_cast<std::size_t>(cfg.train_config.batch_size));
                });
                MetricRow row = stage("metrics", [&] {
                    return compute_row(scored, e.name, display_name(t), n_refs_descriptor(t, cfg.selection_policy));
                });
                report.add_row(std::move(row), scored);
            }
        }

        for (const auto& adapter : cfg.external_scorers) {
            for (const auto& e : evals) {
                const ScoredSet scored = stage("external", [&] { return score_with_external(adapter, e.test); });
                MetricRow row = stage("metrics", [&] { return compute_row(scored, e.name, adapter, "-"); });
                report.add_row(std::move(row), scored);
            }
        }
        if (cfg.drop_unencodable) report.rejects["unencodable_dropped"] = dropped;

        if (cfg.baseline_technique) {
            const std::string base_name = display_name(*cfg.baseline_technique);
            for (auto& row : report.rows) {
                for (const auto& b : report.rows) {
                    if (b.dataset == row.dataset && b.technique == base_name && !b.failed) {
                        row.relative = relative_to(row, b);
                        break;
                    }
                }
            }
        }

        report.metadata["finished_at"] = utc_now();
        stage("report", [&] {
            EvalReport to_write = report;
            if (!cfg.plots) to_write.scores.assign(to_write.rows.size(), std::nullopt);
            write_report(to_write, out_dir);
            write_file(out_dir / "run.json", runs.dump(2) + "\n");
            return 0;
        });
    } catch (const StageFailure& failure) {
        ojson marker;
        marker["stage"] = failure.stage();
        marker["error"] = failure.what();
        marker["runs"] = runs;
        try {
            write_file(out_dir / "failed" / "FAILED.json", marker.dump(2) + "\n");
            if (!report.rows.empty()) write_report(report, out_dir / "failed");
        } catch (const std::exception&) {
            // the original failure is the one worth reporting
        }
        throw;
    }
    report.metadata["runs"] = runs.size();
    return report;
}

EvalReport run_ablation_matrix(const ExperimentConfig& base) {
    struct Row {
        Technique technique;
        SelectionPolicy policy;
    };
    auto fixed = [&](int k) {
        SelectionPolicy p = base.selection_policy;
        p.mode = SelectionMode::FixedK;
        p.total_budget = k;
        return p;
    };
    SelectionPolicy random_range = base.selection_policy;
    random_range.mode = SelectionMode::RandomRange;
    random_range.range_low = 1;
    random_range.range_high = 5;
    const std::vector<Row> matrix = {{Technique::TqrNeg, fixed(1)},
                                     {Technique::SquarePos, fixed(5)},
                                     {Technique::Square, fixed(3)},
                                     {Technique::Square, random_range},
                                     {Technique::Square, fixed(5)}};

    base.validate();
    EvalReport report;
    report.metadata["name"] = base.name + "-ablation";
    report.metadata["config_hash"] = base.hash();
    report.metadata["started_at"] = utc_now();
    ojson runs = ojson::array();

    for (std::size_t i = 0; i < matrix.size(); ++i) {
        ExperimentConfig cfg = base;
        cfg.technique = matrix[i].technique;
        cfg.selection_policy = matrix[i].policy;
        cfg.baseline_technique.reset();
        cfg.external_scorers.clear();
        const std::string desc = n_refs_descriptor(cfg.technique, cfg.selection_policy);
        std::string dir_name = std::to_string(i + 1) + "_" + std::string(to_string(cfg.technique)) + "_" + desc;
        for (char& c : dir_name)
            if (c == '[' || c == ']' || c == ',') c = '_';
        cfg.output_dir = base.output_dir / "ablation" / dir_name;
        cfg.name = base.name + "/" + dir_name;
        try {
            EvalReport sub = run_experiment(cfg);
            for (std::size_t r = 0; r < sub.rows.size(); ++r) report.add_row(sub.rows[r], sub.scores[r]);
            runs.push_back({{"row", i + 1}, {"output_dir", cfg.output_dir.string()}, {"status", "ok"}});
        } catch (const std::exception& e) {
            const std::vector<std::string> names = [&] {
                std::vector<std::string> n;
                for (const auto& d : cfg.eval_datasets) n.push_back(d.name.empty() ? d.path.stem().string() : d.name);
                if (n.empty()) n.push_back("-");
                return n;
            }();
            for (const auto& name : names) {
                MetricRow failed;
                failed.dataset = name;
                failed.technique = display_name(cfg.technique);
                failed.n_refs_descriptor = desc;
                failed.failed = true;
                failed.error = e.what();
                report.add_row(std::move(failed));
            }
            runs.push_back({{"row", i + 1}, {"output_dir", cfg.output_dir.string()}, {"status", "failed"},
                            {"error", e.what()}});
        }
    }
    report.metadata["rows"] = runs;
    report.metadata["finished_at"] = utc_now();
    EvalReport to_write = report;
    if (!base.plots) to_write.scores.assign(to_write.rows.size(), std::nullopt);
    write_report(to_write, base.output_dir / "ablation");
    return report;
}

}  // namespace square
