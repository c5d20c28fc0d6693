// square: command-line front end for conversion, training, scoring and
// evaluation.
//
// Exit codes: 0 ok, 1 usage, 2 configuration, 3 data, 4 runtime.

#include "square/corpus.hpp"
#include "square/errors.hpp"
#include "square/harness.hpp"
#include "square/report.hpp"
#include "square/scorer.hpp"
#include "square/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace square;

namespace {

enum Exit { kOk = 0, kUsage = 1, kConfig = 2, kData = 3, kRuntime = 4 };

void print_rejects(const std::vector<Reject>& rejects, std::size_t limit = 10) {
    for (std::size_t i = 0; i < rejects.size() && i < limit; ++i)
        std::cerr << "  rejected line " << rejects[i].line << ": " << rejects[i].reason << "\n";
    if (rejects.size() > limit) std::cerr << "  ... " << rejects.size() - limit << " more\n";
}

struct ConvertArgs {
    std::string format;
    fs::path in, out, votes;
    std::string name, split = "test";
    bool clean = false;
};

int cmd_convert(const ConvertArgs& a) {
    LoadResult lr;
    if (a.format == "jsonl") {
        lr = load_jsonl(a.in);
    } else {
        const auto fmt = parse_table_format(a.format);
        if (!fmt) throw ConfigError("unknown --format '" + a.format + "'");
        AdaptOptions opts;
        opts.dataset_name = a.name;
        const auto split = parse_split(a.split);
        if (!split) throw ConfigError("unknown --split '" + a.split + "'");
        opts.split = *split;
        lr = adapt_as2_table(a.in, *fmt, opts);
    }
    if (!a.name.empty()) lr.dataset.name = a.name;
    if (!a.votes.empty()) {
        const auto records = load_annotations(a.votes);
        LoadResult relabeled = apply_majority_labels(lr.dataset, records);
        lr.dataset = std::move(relabeled.dataset);
        lr.rejects.insert(lr.rejects.end(), relabeled.rejects.begin(), relabeled.rejects.end());
    }
    if (a.clean) lr.dataset = filter_clean_setting(lr.dataset);
    save_jsonl(lr.dataset, a.out);
    std::cout << "wrote " << lr.dataset.size() << " examples to " << a.out.string() << " ("
              << lr.rejects.size() << " rejected)\n";
    print_rejects(lr.rejects);
    return kOk;
}

int cmd_synth(const fs::path& out, const SyntheticSpec& spec) {
    const Dataset d = make_synthetic(spec);
    save_jsonl(d, out);
    std::cout << "wrote " << d.size() << " synthetic examples to " << out.string() << "\n";
    return kOk;
}

int cmd_train(const fs::path& config_path, bool force) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    cfg.validate();
    if (!cfg.train_dataset) throw ConfigError("train requires 'train_dataset' in the config");
    const LoadResult lr = load_jsonl(cfg.train_dataset->path);
    print_rejects(lr.rejects);
    const Dataset train_split = select_split(lr.dataset, Split::Train);
    const Dataset dev_split = cfg.dev_path ? select_split(load_jsonl(*cfg.dev_path).dataset, Split::Dev)
                                           : select_split(lr.dataset, Split::Dev);

    TrainedModel tm = train_or_load(cfg, cfg.technique, train_split, dev_split);
    if (tm.cache_hit && force) {
        fs::remove(tm.checkpoint);
        tm = train_or_load(cfg, cfg.technique, train_split, dev_split);
    }
    const std::string tech(to_string(cfg.technique));
    const fs::path dest = cfg.output_dir / "checkpoints" / (tech + ".ckpt");
    fs::create_directories(dest.parent_path());
    fs::copy_file(tm.checkpoint, dest, fs::copy_options::overwrite_existing);
    if (tm.log) {
        std::ofstream(cfg.output_dir / "checkpoints" / (tech + ".trainlog.jsonl")) << tm.log->to_jsonl();
        for (const auto& e : tm.log->epochs)
            std::cout << "epoch " << e.epoch << " loss=" << e.mean_train_loss << " dev_acc=" << e.val_accuracy
                      << " dev_auroc=" << e.val_auroc << (e.epoch == tm.log->selected_epoch ? "  *" : "")
                      << "\n";
    } else {
        std::cout << "cache hit (" << tm.cache_key << "); use --force to retrain\n";
    }
    std::cout << "checkpoint: " << dest.string() << "\n";
    return kOk;
}

struct ScoreArgs {
    fs::path checkpoint, in, out;
    std::string technique = "SQUARE", split;
    int k = 5, range_low = 0, range_high = 0, max_units = kDefaultMaxUnits;
    std::uint64_t seed = 0;
};

int cmd_score(const ScoreArgs& a) {
    const auto technique = parse_technique(a.technique);
    if (!technique) throw ConfigError("unknown technique '" + a.technique + "'");
    SelectionPolicy policy;
    policy.total_budget = a.k;
    policy.seed = a.seed;
    if (a.range_low > 0 || a.range_high > 0) {
        policy.mode = SelectionMode::RandomRange;
        policy.range_low = a.range_low;
        policy.range_high = a.range_high;
    }
    policy.validate();

    const ScorerModel model = load_checkpoint(a.checkpoint);
    LoadResult lr = load_jsonl(a.in);
    print_rejects(lr.rejects);
    Dataset d = lr.dataset;
    if (!a.split.empty()) {
        const auto split = parse_split(a.split);
        if (!split) throw ConfigError("unknown --split '" + a.split + "'");
        d = select_split(d, *split);
    }
    const ScoredSet s = score_dataset(model, d, *technique, policy, a.max_units);
    std::ofstream out(a.out);
    if (!out) throw std::runtime_error("cannot write " + a.out.string());
    for (std::size_t i = 0; i < s.size(); ++i)
        out << nlohmann::ordered_json{{"example_id", s.example_ids[i]}, {"score", s.scores[i]}, {"label", s.labels[i]}}
                   .dump()
            << "\n";
    std::cout << "scored " << s.size() << " examples to " << a.out.string() << "\n";
    return kOk;
}

int cmd_evaluate(const fs::path& config_path, const std::string& baseline, const std::string& output_dir) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (!baseline.empty()) {
        const auto t = parse_technique(baseline);
        if (!t) throw ConfigError("unknown technique '" + baseline + "'");
        cfg.baseline_technique = *t;
    }
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    const EvalReport report = run_experiment(cfg);
    std::cout << report.render_table() << "report: " << (cfg.output_dir / "report.json").string() << "\n";
    return kOk;
}

int cmd_ablate(const fs::path& config_path, const std::string& output_dir) {
    ExperimentConfig cfg = load_experiment_config(config_path);
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    const EvalReport report = run_ablation_matrix(cfg);
    std::cout << report.render_table() << "report: " << (cfg.output_dir / "ablation" / "report.json").string()
              << "\n";
    bool any_ok = false;
    for (const auto& r : report.rows) any_ok |= !r.failed;
    return any_ok || report.rows.empty() ? kOk : kRuntime;
}

int cmd_report(const fs::path& in, bool as_json) {
    std::ifstream f(in);
    if (!f) throw DataError("cannot open " + in.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw DataError(in.string() + ": " + e.what());
    }
    const EvalReport report = EvalReport::from_json(j);
    if (as_json) std::cout << report.to_json().dump(2) << "\n";
    else std::cout << report.render_table();
    return kOk;
}

int exit_code_for(FailureKind k) {
    switch (k) {
        case FailureKind::Config: return kConfig;
        case FailureKind::Data: return kData;
        case FailureKind::Runtime: return kRuntime;
    }
    return kRuntime;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Reference-augmented answer correctness scoring"};
    app.require_subcommand(1);

    ConvertArgs conv;
    auto* convert = app.add_subcommand("convert", "Convert an answer-selection table or JSONL into canonical JSONL");
    convert->add_option("--format", conv.format, "wikiqa_tsv | trecqa | jsonl")
        ->required()
        ->check(CLI::IsMember({"wikiqa_tsv", "trecqa", "jsonl"}));
    convert->add_option("--in", conv.in)->required()->check(CLI::ExistingFile);
    convert->add_option("--out", conv.out)->required();
    convert->add_option("--name", conv.name, "dataset name (default: input file stem)");
    convert->add_option("--split", conv.split, "split assigned to converted tables")
        ->check(CLI::IsMember({"train", "dev", "test"}));
    convert->add_option("--votes", conv.votes, "annotation JSONL {example_id, votes}; labels become the majority")
        ->check(CLI::ExistingFile);
    convert->add_flag("--clean", conv.clean, "keep questions with both a correct and an incorrect candidate");

    fs::path synth_out;
    SyntheticSpec spec;
    auto* synth = app.add_subcommand("synth", "Write the synthetic toy dataset");
    synth->add_option("--out", synth_out)->required();
    synth->add_option("--seed", spec.seed);
    synth->add_option("--n-train", spec.n_train);
    synth->add_option("--n-dev", spec.n_dev);
    synth->add_option("--n-test", spec.n_test);
    synth->add_option("--name", spec.name);

    fs::path config;
    bool force = false;
    auto* train = app.add_subcommand("train", "Train the configured technique (or reuse the cached checkpoint)");
    train->add_option("--config", config)->required()->check(CLI::ExistingFile);
    train->add_flag("--force", force, "retrain even when a cached checkpoint exists");

    ScoreArgs sc;
    auto* score = app.add_subcommand("score", "Score a JSONL dataset with a checkpoint");
    score->add_option("--checkpoint", sc.checkpoint)->required()->check(CLI::ExistingFile);
    score->add_option("--in", sc.in)->required()->check(CLI::ExistingFile);
    score->add_option("--out", sc.out)->required();
    score->add_option("--technique", sc.technique, "SQUARE QT TR TQR TQR_NEG SQUARE_POS");
    score->add_option("--k", sc.k, "fixed reference budget");
    score->add_option("--range-low", sc.range_low, "random budget lower bound");
    score->add_option("--range-high", sc.range_high, "random budget upper bound");
    score->add_option("--seed", sc.seed, "selection seed");
    score->add_option("--split", sc.split, "only score this split");
    score->add_option("--max-units", sc.max_units);

    std::string baseline, output_dir;
    auto* evaluate = app.add_subcommand("evaluate", "Train or reuse, score every eval dataset and write a report");
    evaluate->add_option("--config", config)->required()->check(CLI::ExistingFile);
    evaluate->add_option("--baseline", baseline, "baseline technique for relative deltas");
    evaluate->add_option("--output-dir", output_dir, "override the config's output_dir");

    auto* ablate = app.add_subcommand("ablate", "Run the five-row reference ablation");
    ablate->add_option("--config", config)->required()->check(CLI::ExistingFile);
    ablate->add_option("--output-dir", output_dir, "override the config's output_dir");

    fs::path report_in;
    bool as_json = false;
    auto* report = app.add_subcommand("report", "Render a report.json as a table");
    report->add_option("--in", report_in)->required()->check(CLI::ExistingFile);
    report->add_flag("--json", as_json, "print normalized JSON instead of the table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (*convert) return cmd_convert(conv);
        if (*synth) return cmd_synth(synth_out, spec);
        if (*train) return cmd_train(config, force);
        if (*score) return cmd_score(sc);
        if (*evaluate) return cmd_evaluate(config, baseline, output_dir);
        if (*ablate) return cmd_ablate(config, output_dir);
        if (*report) return cmd_report(report_in, as_json);
    } catch (const StageFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const EncodingError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
    return kUsage;
}
