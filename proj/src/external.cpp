#include "square/external.hpp"

#include "square/errors.hpp"
#include "square/text.hpp"

#include <json.hpp>

#include <fstream>
#include <mutex>

namespace square {

namespace {

class ConstantAdapter final : public ExternalAdapter {
public:
    explicit ConstantAdapter(double value) : value_(value) {}
    std::string name() const override { return "constant"; }
    std::map<std::string, double> score(const Dataset& d) const override {
        std::map<std::string, double> out;
        for (const auto& ex : d.examples) out[ex.example_id] = value_;
        return out;
    }

private:
    double value_;
};

class LabelOracleAdapter final : public ExternalAdapter {
public:
    std::string name() const override { return "label_oracle"; }
    std::map<std::string, double> score(const Dataset& d) const override {
        std::map<std::string, double> out;
        for (const auto& ex : d.examples) out[ex.example_id] = ex.label;
        return out;
    }
};

class ScoresFileAdapter final : public ExternalAdapter {
public:
    explicit ScoresFileAdapter(std::string path) : path_(std::move(path)) {}
    std::string name() const override { return "scores_file"; }
    std::map<std::string, double> score(const Dataset&) const override {
        std::ifstream in(path_);
        if (!in) throw DataError("cannot open scores file " + path_);
        std::map<std::string, double> out;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (text::is_blank(line)) continue;
            try {
                const auto j = nlohmann::json::parse(line);
                out[j.at("example_id").get<std::string>()] = j.at("score").get<double>();
            } catch (const nlohmann::json::exception& e) {
                throw DataError(path_ + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
        return out;
    }

private:
    std::string path_;
};

struct Registry {
    std::mutex mu;
    std::map<std::string, AdapterFactory> factories;

    Registry() {
        factories["constant"] = [](const std::string& arg) {
            return std::make_unique<ConstantAdapter>(arg.empty() ? 0.5 : std::stod(arg));
        };
        factories["label_oracle"] = [](const std::string&) { return std::make_unique<LabelOracleAdapter>(); };
        factories["scores_file"] = [](const std::string& arg) {
            if (arg.empty()) throw ConfigError("scores_file adapter needs a path: scores_file:PATH");
            return std::make_unique<ScoresFileAdapter>(arg);
        };
    }
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

void register_adapter(const std::string& name, AdapterFactory factory) {
    auto& r = registry();
    std::lock_guard lock(r.mu);
    r.factories[name] = std::move(factory);
}

std::unique_ptr<ExternalAdapter> make_adapter(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    AdapterFactory factory;
    {
        auto& r = registry();
        std::lock_guard lock(r.mu);
        auto it = r.factories.find(name);
        if (it == r.factories.end()) throw ConfigError("unknown external adapter '" + name + "'");
        factory = it->second;
    }
    return factory(arg);
}

ScoredSet score_with_external(const ExternalAdapter& adapter, const Dataset& d) {
    const auto scores = adapter.score(d);
    ScoredSet out;
    std::vector<std::string> missing;
    for (const auto& ex : d.examples) {
        auto it = scores.find(ex.example_id);
        if (it == scores.end()) {
            missing.push_back(ex.example_id);
            continue;
        }
        out.scores.push_back(it->second);
        out.labels.push_back(ex.label);
        out.example_ids.push_back(ex.example_id);
    }
    if (!missing.empty()) {
        std::string msg = "adapter '" + adapter.name() + "' returned no score for " +
                          std::to_string(missing.size()) + " example(s):";
        for (const auto& id : missing) msg += " " + id;
        throw DataError(msg);
    }
    return out;
}

ScoredSet score_with_external(const std::string& adapter_spec, const Dataset& d) {
    return score_with_external(*make_adapter(adapter_spec), d);
}

}  // namespace square
