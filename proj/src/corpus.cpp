#include "square/corpus.hpp"

#include "square/errors.hpp"
#include "square/hashing.hpp"
#include "square/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

namespace square {

using nlohmann::json;

std::string_view to_string(Split s) {
    switch (s) {
        case Split::Train: return "train";
        case Split::Dev: return "dev";
        case Split::Test: return "test";
    }
    return "test";
}

std::optional<Split> parse_split(std::string_view s) {
    if (s == "train") return Split::Train;
    if (s == "dev") return Split::Dev;
    if (s == "test") return Split::Test;
    return std::nullopt;
}

std::optional<TableFormat> parse_table_format(std::string_view s) {
    if (s == "wikiqa_tsv") return TableFormat::WikiqaTsv;
    if (s == "trecqa") return TableFormat::Trecqa;
    return std::nullopt;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string_view> split_lines(std::string_view content) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start < content.size()) {
        std::size_t end = content.find('\n', start);
        if (end == std::string_view::npos) end = content.size();
        std::string_view line = content.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.push_back(line);
        start = end + 1;
    }
    return lines;
}

// Type errors inside a well-formed JSON object are record-level problems.
struct RecordError {
    std::string reason;
};

const json& field(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw RecordError{std::string("missing field '") + key + "'"};
    return *it;
}

std::string string_field(const json& obj, const char* key) {
    const json& v = field(obj, key);
    if (!v.is_string()) throw RecordError{std::string("field '") + key + "' is not a string"};
    return v.get<std::string>();
}

std::vector<Reference> ref_list(const json& obj, const char* key, Polarity polarity) {
    const json& v = field(obj, key);
    if (!v.is_array()) throw RecordError{std::string("field '") + key + "' is not an array"};
    std::vector<Reference> out;
    for (const json& item : v) {
        if (!item.is_string())
            throw RecordError{std::string("field '") + key + "' holds a non-string"};
        out.push_back({item.get<std::string>(), polarity});
    }
    return out;
}

QAExample example_from_json(const json& obj) {
    if (!obj.is_object()) throw RecordError{"line is not a JSON object"};
    QAExample ex;
    ex.example_id = string_field(obj, "example_id");
    ex.question = string_field(obj, "question");
    ex.target_answer = string_field(obj, "target_answer");
    const json& label = field(obj, "label");
    if (!label.is_number_integer()) throw RecordError{"label is not an integer"};
    const auto l = label.get<long long>();
    if (l != 0 && l != 1) throw RecordError{"label must be 0 or 1, got " + std::to_string(l)};
    ex.label = static_cast<int>(l);
    ex.pos_refs = ref_list(obj, "pos_refs", Polarity::Positive);
    ex.neg_refs = ref_list(obj, "neg_refs", Polarity::Negative);
    ex.dataset_name = string_field(obj, "dataset_name");
    const std::string split = string_field(obj, "split");
    auto s = parse_split(split);
    if (!s) throw RecordError{"unknown split '" + split + "'"};
    ex.split = *s;
    return ex;
}

json refs_to_json(const std::vector<Reference>& refs) {
    json arr = json::array();
    for (const auto& r : refs) arr.push_back(r.text);
    return arr;
}

}  // namespace

std::optional<std::string> validate(const QAExample& ex) {
    if (ex.example_id.empty()) return "empty example_id";
    if (text::is_blank(ex.question)) return "empty question";
    if (text::is_blank(ex.target_answer)) return "empty target_answer";
    if (ex.label != 0 && ex.label != 1) return "label must be 0 or 1";
    const std::string target = text::normalize_for_match(ex.target_answer);
    auto check_pool = [&](const std::vector<Reference>& pool, Polarity expected,
                          const char* name) -> std::optional<std::string> {
        for (const auto& r : pool) {
            if (r.polarity != expected) return std::string(name) + " holds a reference of the wrong polarity";
            if (text::is_blank(r.text)) return std::string(name) + " holds an empty reference";
            if (text::normalize_for_match(r.text) == target)
                return std::string("target answer leaks into ") + name;
        }
        return std::nullopt;
    };
    if (auto err = check_pool(ex.pos_refs, Polarity::Positive, "pos_refs")) return err;
    if (auto err = check_pool(ex.neg_refs, Polarity::Negative, "neg_refs")) return err;
    return std::nullopt;
}

LoadResult parse_jsonl(std::string_view content, std::string_view source_name) {
    LoadResult result;
    std::set<std::string> seen;
    const auto lines = split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (text::is_blank(lines[i])) continue;
        json obj;
        try {
            obj = json::parse(lines[i]);
        } catch (const json::parse_error& e) {
            throw DataError(std::string(source_name) + ":" + std::to_string(line_no) +
                            ": malformed JSON: " + e.what());
        }
        QAExample ex;
        try {
            ex = example_from_json(obj);
        } catch (const RecordError& e) {
            result.rejects.push_back({line_no, e.reason});
            continue;
        }
        if (auto err = validate(ex)) {
            result.rejects.push_back({line_no, *err});
            continue;
        }
        if (!seen.insert(ex.example_id).second) {
            result.rejects.push_back({line_no, "duplicate example_id '" + ex.example_id + "'"});
            continue;
        }
        result.dataset.examples.push_back(std::move(ex));
    }
    result.dataset.provenance["source"] = std::string(source_name);
    result.dataset.provenance["adapter"] = "jsonl";
    if (!result.dataset.examples.empty()) result.dataset.name = result.dataset.examples.front().dataset_name;
    return result;
}

LoadResult load_jsonl(const std::filesystem::path& path) {
    LoadResult r = parse_jsonl(read_file(path), path.string());
    if (r.dataset.name.empty()) r.dataset.name = path.stem().string();
    return r;
}

std::string to_json_line(const QAExample& ex) {
    // fixed key order
    nlohmann::ordered_json obj;
    obj["example_id"] = ex.example_id;
    obj["question"] = ex.question;
    obj["target_answer"] = ex.target_answer;
    obj["label"] = ex.label;
    obj["pos_refs"] = refs_to_json(ex.pos_refs);
    obj["neg_refs"] = refs_to_json(ex.neg_refs);
    obj["dataset_name"] = ex.dataset_name;
    obj["split"] = std::string(to_string(ex.split));
    return obj.dump();
}

std::string to_jsonl(const Dataset& d) {
    std::string out;
    for (const auto& ex : d.examples) {
        out += to_json_line(ex);
        out += '\n';
    }
    return out;
}

void save_jsonl(const Dataset& d, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << to_jsonl(d);
}

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    while (true) {
        std::size_t end = line.find('\t', start);
        if (end == std::string_view::npos) {
            cols.push_back(line.substr(start));
            break;
        }
        cols.push_back(line.substr(start, end - start));
        start = end + 1;
    }
    return cols;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

struct Candidate {
    std::size_t line;
    std::string text;
    int label;
};

struct QuestionGroup {
    std::string question;
    std::vector<Candidate> candidates;
    std::set<std::string> normalized;
};

}  // namespace

LoadResult adapt_as2_text(std::string_view content, TableFormat format, const AdaptOptions& opts) {
    LoadResult result;
    Dataset& d = result.dataset;
    d.name = opts.dataset_name;
    d.provenance["adapter"] = format == TableFormat::WikiqaTsv ? "wikiqa_tsv" : "trecqa";

    const auto lines = split_lines(content);
    std::size_t header_idx = 0;
    while (header_idx < lines.size() && text::is_blank(lines[header_idx])) ++header_idx;
    if (header_idx == lines.size()) return result;

    std::optional<std::size_t> q_col, s_col, l_col, qid_col;
    const auto header = split_tabs(lines[header_idx]);
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string name = lower(text::collapse_whitespace(header[c]));
        if (name == "question") q_col = c;
        else if (name == "sentence") s_col = c;
        else if (name == "label") l_col = c;
        else if (name == "questionid") qid_col = c;
    }
    if (!q_col || !s_col || !l_col)
        throw DataError("table header must name columns question, sentence and label");
    // TREC-QA dumps carry no stable question id; questions are keyed by text.
    if (format == TableFormat::Trecqa) qid_col.reset();
    const std::size_t needed = std::max({*q_col, *s_col, *l_col, qid_col.value_or(0)}) + 1;

    std::vector<std::string> order;
    std::unordered_map<std::string, QuestionGroup> groups;
    for (std::size_t i = header_idx + 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (text::is_blank(lines[i])) continue;
        const auto cols = split_tabs(lines[i]);
        if (cols.size() < needed) {
            result.rejects.push_back({line_no, "missing column"});
            continue;
        }
        std::string question = text::collapse_whitespace(cols[*q_col]);
        std::string sentence = text::collapse_whitespace(cols[*s_col]);
        const std::string label = text::collapse_whitespace(cols[*l_col]);
        if (question.empty() || sentence.empty()) {
            result.rejects.push_back({line_no, "empty question or sentence"});
            continue;
        }
        if (label != "0" && label != "1") {
            result.rejects.push_back({line_no, "label must be 0 or 1, got '" + label + "'"});
            continue;
        }
        const std::string key = qid_col ? std::string(text::collapse_whitespace(cols[*qid_col])) : question;
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) {
            it->second.question = question;
            order.push_back(key);
        }
        QuestionGroup& g = it->second;
        if (!g.normalized.insert(text::normalize_for_match(sentence)).second) {
            result.rejects.push_back({line_no, "duplicate candidate within question"});
            continue;
        }
        g.candidates.push_back({line_no, std::move(sentence), label == "1" ? 1 : 0});
    }

    for (std::size_t gi = 0; gi < order.size(); ++gi) {
        const QuestionGroup& g = groups.at(order[gi]);
        for (std::size_t ci = 0; ci < g.candidates.size(); ++ci) {
            QAExample ex;
            ex.example_id = d.name + "-q" + std::to_string(gi) + "-a" + std::to_string(ci);
            ex.question = g.question;
            ex.target_answer = g.candidates[ci].text;
            ex.label = g.candidates[ci].label;
            ex.dataset_name = d.name;
            ex.split = opts.split;
            for (std::size_t oi = 0; oi < g.candidates.size(); ++oi) {
                if (oi == ci) continue;
                const Candidate& other = g.candidates[oi];
                if (other.label == 1)
                    ex.pos_refs.push_back({other.text, Polarity::Positive});
                else
                    ex.neg_refs.push_back({other.text, Polarity::Negative});
            }
            d.examples.push_back(std::move(ex));
        }
    }
    return result;
}

LoadResult adapt_as2_table(const std::filesystem::path& path, TableFormat format,
                           const AdaptOptions& opts) {
    AdaptOptions o = opts;
    if (o.dataset_name.empty()) o.dataset_name = path.stem().string();
    LoadResult r = adapt_as2_text(read_file(path), format, o);
    r.dataset.provenance["source"] = path.string();
    return r;
}

Dataset filter_clean_setting(const Dataset& d) {
    Dataset out;
    out.name = d.name;
    out.provenance = d.provenance;
    out.provenance["filter"] = "clean";
    for (const auto& ex : d.examples) {
        const bool has_pos = ex.label == 1 || !ex.pos_refs.empty();
        const bool has_neg = ex.label == 0 || !ex.neg_refs.empty();
        if (has_pos && has_neg) out.examples.push_back(ex);
    }
    return out;
}

int majority_vote(const AnnotationRecord& r) {
    if (r.votes.empty()) throw DataError("no votes for example '" + r.example_id + "'");
    std::size_t ones = 0;
    for (int v : r.votes) {
        if (v != 0 && v != 1) throw DataError("non-binary vote for example '" + r.example_id + "'");
        ones += static_cast<std::size_t>(v);
    }
    return 2 * ones > r.votes.size() ? 1 : 0;
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path) {
    std::vector<AnnotationRecord> out;
    const std::string content = read_file(path);
    const auto lines = split_lines(content);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (text::is_blank(lines[i])) continue;
        const std::string where = path.string() + ":" + std::to_string(i + 1);
        json obj;
        try {
            obj = json::parse(lines[i]);
        } catch (const json::parse_error& e) {
            throw DataError(where + ": malformed JSON: " + e.what());
        }
        if (!obj.is_object() || !obj.contains("example_id") || !obj["example_id"].is_string() ||
            !obj.contains("votes") || !obj["votes"].is_array())
            throw DataError(where + ": expected {\"example_id\": str, \"votes\": [...]}");
        AnnotationRecord rec;
        rec.example_id = obj["example_id"].get<std::string>();
        for (const auto& v : obj["votes"]) {
            if (!v.is_number_integer()) throw DataError(where + ": votes must be integers");
            rec.votes.push_back(v.get<int>());
        }
        out.push_back(std::move(rec));
    }
    return out;
}

LoadResult apply_majority_labels(const Dataset& d, std::span<const AnnotationRecord> records) {
    std::unordered_map<std::string, const AnnotationRecord*> by_id;
    for (const auto& r : records) by_id[r.example_id] = &r;
    LoadResult result;
    result.dataset.name = d.name;
    result.dataset.provenance = d.provenance;
    result.dataset.provenance["labels"] = "majority_vote";
    for (std::size_t i = 0; i < d.examples.size(); ++i) {
        const QAExample& ex = d.examples[i];
        auto it = by_id.find(ex.example_id);
        if (it == by_id.end()) {
            result.rejects.push_back({i + 1, "no annotations for '" + ex.example_id + "'"});
            continue;
        }
        QAExample labelled = ex;
        labelled.label = majority_vote(*it->second);
        result.dataset.examples.push_back(std::move(labelled));
    }
    return result;
}

std::string fingerprint(const Dataset& d) {
    return to_hex(fnv1a64(to_jsonl(d)));
}

Dataset select_split(const Dataset& d, Split s) {
    Dataset out;
    out.name = d.name;
    out.provenance = d.provenance;
    for (const auto& ex : d.examples)
        if (ex.split == s) out.examples.push_back(ex);
    return out;
}

}  // namespace square
