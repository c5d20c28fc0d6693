#include "square/encoding.hpp"

#include "square/errors.hpp"
#include "square/text.hpp"

#include <array>
#include <vector>

namespace square {

int EncodingVariant::max_refs_used() const {
    switch (name) {
        case VariantName::QT: return 0;
        case VariantName::TR:
        case VariantName::TQR: return 1;
        case VariantName::Square: return -1;
    }
    return -1;
}

std::string_view to_string(Technique t) {
    switch (t) {
        case Technique::Square: return "SQUARE";
        case Technique::QT: return "QT";
        case Technique::TR: return "TR";
        case Technique::TQR: return "TQR";
        case Technique::TqrNeg: return "TQR_NEG";
        case Technique::SquarePos: return "SQUARE_POS";
    }
    return "SQUARE";
}

std::optional<Technique> parse_technique(std::string_view s) {
    for (Technique t : {Technique::Square, Technique::QT, Technique::TR, Technique::TQR,
                        Technique::TqrNeg, Technique::SquarePos})
        if (to_string(t) == s) return t;
    return std::nullopt;
}

EncodingVariant variant_for(Technique t) {
    switch (t) {
        case Technique::Square: return {VariantName::Square, PolarityFilter::Both};
        case Technique::QT: return {VariantName::QT, PolarityFilter::Both};
        case Technique::TR: return {VariantName::TR, PolarityFilter::PositiveOnly};
        case Technique::TQR: return {VariantName::TQR, PolarityFilter::PositiveOnly};
        case Technique::TqrNeg: return {VariantName::TQR, PolarityFilter::NegativeOnly};
        case Technique::SquarePos: return {VariantName::Square, PolarityFilter::PositiveOnly};
    }
    return {};
}

PolarityFilter polarity_for(Technique t) {
    return variant_for(t).refs;
}

std::string display_name(Technique t) {
    switch (t) {
        case Technique::Square: return "SQuArE";
        case Technique::QT: return "AVA-QT";
        case Technique::TR: return "AVA-TR";
        case Technique::TQR: return "AVA-TQR";
        case Technique::TqrNeg: return "AVA-TQR(-)";
        case Technique::SquarePos: return "SQuArE(+)";
    }
    return "SQuArE";
}

namespace {

constexpr std::array<std::string_view, 4> kTags = {"Question:", "Target:", "Pos_Ref:", "Neg_Ref:"};

bool has_tag_literal(std::string_view s) {
    for (auto tag : kTags)
        if (s.find(tag) != std::string_view::npos) return true;
    return false;
}

std::size_t count_units(std::string_view s) {
    return text::split_whitespace(s).size();
}

struct Segment {
    std::string text;  // includes the leading " Tag: "
    std::size_t units;
};

Segment make_segment(std::string_view tag, const std::string& body) {
    Segment seg;
    seg.text = " ";
    seg.text += tag;
    seg.text += ' ';
    seg.text += body;
    seg.units = 1 + count_units(body);
    return seg;
}

std::string describe(std::string_view example_id) {
    return example_id.empty() ? std::string("input") : "example '" + std::string(example_id) + "'";
}

}  // namespace

EncodedInput encode(std::string_view question, std::string_view target,
                    std::span<const std::string> pos, std::span<const std::string> neg,
                    const EncodingVariant& variant, int max_units, std::string_view example_id) {
    if (max_units < 1) throw EncodingError("max_units must be positive");
    const std::string q = text::collapse_whitespace(question);
    const std::string a = text::collapse_whitespace(target);
    if (a.empty()) throw EncodingError(describe(example_id) + ": empty target answer");
    if (variant.uses_question() && q.empty())
        throw EncodingError(describe(example_id) + ": empty question");

    EncodedInput out;
    out.variant = variant;
    out.contains_tag_literal = has_tag_literal(question) || has_tag_literal(target);

    std::vector<Segment> refs;
    auto add_refs = [&](std::span<const std::string> pool, std::string_view tag, std::size_t limit) {
        for (std::size_t i = 0; i < pool.size() && i < limit; ++i) {
            out.contains_tag_literal = out.contains_tag_literal || has_tag_literal(pool[i]);
            const std::string body = text::collapse_whitespace(pool[i]);
            if (body.empty()) throw EncodingError(describe(example_id) + ": empty reference");
            refs.push_back(make_segment(tag, body));
        }
    };
    const bool want_pos = variant.refs != PolarityFilter::NegativeOnly;
    const bool want_neg = variant.refs != PolarityFilter::PositiveOnly;

    switch (variant.name) {
        case VariantName::QT:
            break;
        case VariantName::Square:
            if (want_pos) add_refs(pos, "Pos_Ref:", pos.size());
            if (want_neg) add_refs(neg, "Neg_Ref:", neg.size());
            break;
        case VariantName::TR:
        case VariantName::TQR: {
            const bool negative = variant.refs == PolarityFilter::NegativeOnly;
            auto pool = negative ? neg : pos;
            if (pool.empty())
                throw EncodingError(describe(example_id) + ": variant needs a " +
                                    (negative ? "negative" : "positive") + " reference but the pool is empty");
            add_refs(pool, negative ? "Neg_Ref:" : "Pos_Ref:", 1);
            break;
        }
    }

    std::string head;
    std::size_t units = 0;
    if (variant.uses_question()) {
        head = "Question: " + q + " ";
        units += 1 + count_units(q);
    }
    head += "Target: " + a;
    units += 1 + count_units(a);

    std::size_t kept = refs.size();
    std::size_t total = units;
    for (const auto& seg : refs) total += seg.units;
    while (kept > 0 && total > static_cast<std::size_t>(max_units)) {
        total -= refs[--kept].units;
        out.truncated = true;
    }

    out.text = std::move(head);
    for (std::size_t i = 0; i < kept; ++i) out.text += refs[i].text;
    return out;
}

namespace {
std::vector<std::string> texts(const std::vector<Reference>& refs) {
    std::vector<std::string> out;
    out.reserve(refs.size());
    for (const auto& r : refs) out.push_back(r.text);
    return out;
}
}  // namespace

EncodedInput encode(const QAExample& ex, const Selection& sel, const EncodingVariant& variant,
                    int max_units) {
    const auto pos = texts(sel.pos);
    const auto neg = texts(sel.neg);
    return encode(ex.question, ex.target_answer, pos, neg, variant, max_units, ex.example_id);
}

EncodedInput encode_example(const QAExample& ex, Technique technique,
                            const SelectionPolicy& policy, int max_units) {
    const EncodingVariant variant = variant_for(technique);
    QAExample pools = ex;
    if (variant.refs == PolarityFilter::PositiveOnly) pools.neg_refs.clear();
    if (variant.refs == PolarityFilter::NegativeOnly) pools.pos_refs.clear();
    Selection sel = variant.name == VariantName::QT ? Selection{}
                                                    : restrict_polarity(select_references(pools, policy), variant.refs);
    return encode(ex, sel, variant, max_units);
}

}  // namespace square
