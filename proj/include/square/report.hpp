#pragma once

#include "square/metrics.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace square {

/// Metric table for one run. Rows carry the columns Technique, # Refs,
/// Accuracy, AUROC, Correlation; `scores` optionally holds the scored set
/// behind each row (used for plots and score dumps, not serialized).
struct EvalReport {
    std::vector<MetricRow> rows;
    std::vector<std::optional<ScoredSet>> scores;
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
    nlohmann::ordered_json rejects = nlohmann::ordered_json::object();

    void add_row(MetricRow row, std::optional<ScoredSet> scored = std::nullopt);

    nlohmann::ordered_json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);

    /// Aligned plain-text table, one line per row.
    std::string render_table() const;
};

nlohmann::ordered_json row_to_json(const MetricRow& row);
MetricRow row_from_json(const nlohmann::json& j);

/// Writes report.json, report.txt, scores/*.jsonl and plots/*.svg.
void write_report(const EvalReport& report, const std::filesystem::path& dir);

/// Histogram of scores split by gold label, as a standalone SVG document.
std::string score_histogram_svg(const ScoredSet& s, const std::string& title, int bins = 20);

/// Grouped bar chart of accuracy / AUROC / correlation per row.
std::string metric_bars_svg(const std::vector<MetricRow>& rows, const std::string& title);

}  // namespace square
