#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace square {

enum class Polarity { Positive, Negative };
enum class Split { Train, Dev, Test };

std::string_view to_string(Split s);
std::optional<Split> parse_split(std::string_view s);

struct Reference {
    std::string text;
    Polarity polarity = Polarity::Positive;

    bool operator==(const Reference&) const = default;
};

/// One question, the answer being judged, its gold label and the labelled
/// reference pools that accompany it.
struct QAExample {
    std::string example_id;
    std::string question;
    std::string target_answer;
    int label = 0;
    std::vector<Reference> pos_refs;
    std::vector<Reference> neg_refs;
    std::string dataset_name;
    Split split = Split::Test;

    bool operator==(const QAExample&) const = default;
};

struct AnnotationRecord {
    std::string example_id;
    std::vector<int> votes;
};

struct Dataset {
    std::string name;
    std::vector<QAExample> examples;
    std::map<std::string, std::string> provenance;

    std::size_t size() const { return examples.size(); }
    bool empty() const { return examples.empty(); }
};

/// A record that failed validation. `line` is 1-based (data rows for TSV
/// input are numbered as file lines, header included).
struct Reject {
    std::size_t line = 0;
    std::string reason;
};

struct LoadResult {
    Dataset dataset;
    std::vector<Reject> rejects;
};

/// Returns an empty optional when the example satisfies every invariant,
/// otherwise a human-readable reason.
std::optional<std::string> validate(const QAExample& ex);

/// Canonical JSONL. Malformed JSON throws DataError naming the line;
/// records violating invariants are collected into `rejects`.
LoadResult load_jsonl(const std::filesystem::path& path);
LoadResult parse_jsonl(std::string_view content, std::string_view source_name = "<memory>");

std::string to_json_line(const QAExample& ex);
std::string to_jsonl(const Dataset& d);
void save_jsonl(const Dataset& d, const std::filesystem::path& path);

enum class TableFormat { WikiqaTsv, Trecqa };
std::optional<TableFormat> parse_table_format(std::string_view s);

struct AdaptOptions {
    std::string dataset_name;  // defaults to the file stem
    Split split = Split::Test;
};

/// Leave-one-out conversion of an answer-sentence-selection table: each
/// candidate row becomes a target whose references are the other candidates
/// of its question, partitioned by label.
LoadResult adapt_as2_table(const std::filesystem::path& path, TableFormat format,
                           const AdaptOptions& opts = {});
LoadResult adapt_as2_text(std::string_view content, TableFormat format,
                          const AdaptOptions& opts);

/// Keeps examples whose question has at least one correct and one incorrect
/// candidate among {own label} and the reference pools.
Dataset filter_clean_setting(const Dataset& d);

/// Strict majority; ties resolve to 0. Throws DataError on empty or non-binary votes.
int majority_vote(const AnnotationRecord& r);

/// Parses {"example_id": str, "votes": [0|1, ...]} lines.
std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path);

/// Replaces each example's label by the majority vote of its annotations.
/// Examples without annotations are returned in `rejects`.
LoadResult apply_majority_labels(const Dataset& d, std::span<const AnnotationRecord> records);

/// Content hash over the canonical serialization.
std::string fingerprint(const Dataset& d);

/// Subset of examples with the given split, provenance copied.
Dataset select_split(const Dataset& d, Split s);

}  // namespace square
