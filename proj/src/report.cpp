#include "square/report.hpp"

#include "square/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace square {

using ojson = nlohmann::ordered_json;

void EvalReport::add_row(MetricRow row, std::optional<ScoredSet> scored) {
    rows.push_back(std::move(row));
    scores.push_back(std::move(scored));
}

ojson row_to_json(const MetricRow& row) {
    ojson j;
    j["Dataset"] = row.dataset;
    j["Technique"] = row.technique;
    j["# Refs"] = row.n_refs_descriptor;
    j["status"] = row.failed ? "failed" : "ok";
    if (row.failed) {
        j["error"] = row.error;
        return j;
    }
    j["Accuracy"] = row.accuracy;
    j["AUROC"] = row.auroc;
    j["Correlation"] = row.correlation;
    j["n_examples"] = row.n_examples;
    if (row.relative) {
        auto opt = [](const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); };
        j["relative"] = {{"Accuracy", opt(row.relative->accuracy)},
                         {"AUROC", opt(row.relative->auroc)},
                         {"Correlation", opt(row.relative->correlation)}};
    }
    return j;
}

MetricRow row_from_json(const nlohmann::json& j) {
    MetricRow row;
    row.dataset = j.at("Dataset").get<std::string>();
    row.technique = j.at("Technique").get<std::string>();
    row.n_refs_descriptor = j.at("# Refs").get<std::string>();
    row.failed = j.value("status", "ok") == "failed";
    if (row.failed) {
        row.error = j.value("error", "");
        return row;
    }
    row.accuracy = j.at("Accuracy").get<double>();
    row.auroc = j.at("AUROC").get<double>();
    row.correlation = j.at("Correlation").get<double>();
    row.n_examples = j.value("n_examples", std::size_t{0});
    if (j.contains("relative")) {
        const auto& r = j["relative"];
        auto opt = [&](const char* k) -> std::optional<double> {
            if (!r.contains(k) || r[k].is_null()) return std::nullopt;
            return r[k].get<double>();
        };
        row.relative = MetricDeltas{opt("Accuracy"), opt("AUROC"), opt("Correlation")};
    }
    return row;
}

ojson EvalReport::to_json() const {
    ojson j;
    j["metadata"] = metadata;
    ojson arr = ojson::array();
    for (const auto& r : rows) arr.push_back(row_to_json(r));
    j["rows"] = std::move(arr);
    j["rejects"] = rejects;
    return j;
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
    EvalReport r;
    try {
        if (j.contains("metadata")) r.metadata = ojson::parse(j["metadata"].dump());
        if (j.contains("rejects")) r.rejects = ojson::parse(j["rejects"].dump());
        for (const auto& row : j.at("rows")) r.add_row(row_from_json(row));
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("malformed report: ") + e.what());
    }
    return r;
}

namespace {

std::string fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string percent(const std::optional<double>& v) {
    if (!v) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%+.2f%%", *v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string file_stem_for(const MetricRow& row, std::size_t index) {
    std::string s = std::to_string(index) + "_" + row.dataset + "_" + row.technique + "_" + row.n_refs_descriptor;
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') c = '_';
    return s;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

}  // namespace

std::string EvalReport::render_table() const {
    const bool with_delta = std::any_of(rows.begin(), rows.end(), [](const MetricRow& r) { return r.relative.has_value(); });
    std::vector<std::string> header = {"Dataset", "Technique", "# Refs", "Accuracy", "AUROC", "Correlation"};
    if (with_delta) {
        header.push_back("dAccuracy");
        header.push_back("dAUROC");
        header.push_back("dCorrelation");
    }
    header.push_back("Status");

    std::vector<std::vector<std::string>> cells;
    for (const auto& r : rows) {
        std::vector<std::string> line = {r.dataset, r.technique, r.n_refs_descriptor};
        if (r.failed) {
            line.insert(line.end(), {"-", "-", "-"});
            if (with_delta) line.insert(line.end(), {"-", "-", "-"});
            line.push_back("failed: " + r.error);
        } else {
            line.insert(line.end(), {fixed(r.accuracy), fixed(r.auroc), fixed(r.correlation)});
            if (with_delta) {
                if (r.relative)
                    line.insert(line.end(), {percent(r.relative->accuracy), percent(r.relative->auroc),
                                             percent(r.relative->correlation)});
                else
                    line.insert(line.end(), {"", "", ""});
            }
            line.push_back("ok");
        }
        cells.push_back(std::move(line));
    }

    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& line : cells) width[c] = std::max(width[c], line[c].size());
    }
    std::ostringstream out;
    auto emit = [&](const std::vector<std::string>& line) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            out << line[c];
            if (c + 1 < line.size()) out << std::string(width[c] - line[c].size() + 2, ' ');
        }
        out << '\n';
    };
    emit(header);
    std::size_t total = 0;
    for (std::size_t w : width) total += w + 2;
    out << std::string(total - 2, '-') << '\n';
    for (const auto& line : cells) emit(line);
    return out.str();
}

std::string score_histogram_svg(const ScoredSet& s, const std::string& title, int bins) {
    bins = std::max(bins, 1);
    std::vector<int> pos(static_cast<std::size_t>(bins), 0), neg(static_cast<std::size_t>(bins), 0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const int b = std::clamp(static_cast<int>(s.scores[i] * bins), 0, bins - 1);
        (s.labels[i] == 1 ? pos : neg)[static_cast<std::size_t>(b)]++;
    }
    const int peak = std::max(1, std::max(*std::max_element(pos.begin(), pos.end()),
                                          *std::max_element(neg.begin(), neg.end())));
    const double w = 640, h = 320, left = 40, bottom = 280, plot_h = 240;
    const double bar_w = (w - 2 * left) / bins;
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << left << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
        << xml_escape(title) << "</text>\n";
    for (int b = 0; b < bins; ++b) {
        const double x = left + b * bar_w;
        const double hp = plot_h * pos[static_cast<std::size_t>(b)] / peak;
        const double hn = plot_h * neg[static_cast<std::size_t>(b)] / peak;
        svg << "<rect x=\"" << x << "\" y=\"" << bottom - hn << "\" width=\"" << bar_w / 2
            << "\" height=\"" << hn << "\" fill=\"#d62728\"/>\n";
        svg << "<rect x=\"" << x + bar_w / 2 << "\" y=\"" << bottom - hp << "\" width=\"" << bar_w / 2
            << "\" height=\"" << hp << "\" fill=\"#2ca02c\"/>\n";
    }
    svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << w - left << "\" y2=\"" << bottom
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << left << "\" y=\"300\" font-family=\"sans-serif\" font-size=\"11\">0</text>\n";
    svg << "<text x=\"" << w - left << "\" y=\"300\" font-family=\"sans-serif\" font-size=\"11\">1</text>\n";
    svg << "<text x=\"" << w / 2 - 80 << "\" y=\"315\" font-family=\"sans-serif\" font-size=\"11\">"
        << "score (red: label 0, green: label 1)</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

std::string metric_bars_svg(const std::vector<MetricRow>& rows, const std::string& title) {
    const double group_w = 120, left = 40, plot_h = 240, bottom = 280;
    const double w = left * 2 + group_w * std::max<std::size_t>(rows.size(), 1);
    const char* colors[] = {"#1f77b4", "#ff7f0e", "#9467bd"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"360\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << left << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
        << xml_escape(title) << "</text>\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const MetricRow& r = rows[i];
        const double x0 = left + group_w * static_cast<double>(i);
        if (!r.failed) {
            const double values[] = {r.accuracy, r.auroc, std::max(0.0, r.correlation)};
            for (int k = 0; k < 3; ++k) {
                const double bh = plot_h * std::clamp(values[k], 0.0, 1.0);
                svg << "<rect x=\"" << x0 + 10 + 30 * k << "\" y=\"" << bottom - bh << "\" width=\"28\" height=\""
                    << bh << "\" fill=\"" << colors[k] << "\"/>\n";
            }
        }
        svg << "<text x=\"" << x0 + 10 << "\" y=\"300\" font-family=\"sans-serif\" font-size=\"10\">"
            << xml_escape(r.technique) << "</text>\n";
        svg << "<text x=\"" << x0 + 10 << "\" y=\"314\" font-family=\"sans-serif\" font-size=\"10\">"
            << xml_escape(r.dataset + " (" + r.n_refs_descriptor + ")") << "</text>\n";
    }
    svg << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << w - left << "\" y2=\"" << bottom
        << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << left << "\" y=\"345\" font-family=\"sans-serif\" font-size=\"11\">"
        << "blue: accuracy, orange: AUROC, purple: correlation</text>\n";
    svg << "</svg>\n";
    return svg.str();
}

void write_report(const EvalReport& report, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    write_text(dir / "report.json", report.to_json().dump(2) + "\n");
    write_text(dir / "report.txt", report.render_table());

    fs::create_directories(dir / "plots");
    write_text(dir / "plots" / "metrics.svg", metric_bars_svg(report.rows, "Agreement with human labels"));
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        if (i >= report.scores.size() || !report.scores[i]) continue;
        const auto& s = *report.scores[i];
        const std::string stem = file_stem_for(report.rows[i], i);
        write_text(dir / "plots" / (stem + "_hist.svg"),
                   score_histogram_svg(s, report.rows[i].technique + " on " + report.rows[i].dataset));
        fs::create_directories(dir / "scores");
        std::string lines;
        for (std::size_t k = 0; k < s.size(); ++k) {
            ojson j;
            j["example_id"] = k < s.example_ids.size() ? s.example_ids[k] : std::to_string(k);
            j["score"] = s.scores[k];
            j["label"] = s.labels[k];
            lines += j.dump() + "\n";
        }
        write_text(dir / "scores" / (stem + ".jsonl"), lines);
    }
}

}  // namespace square
