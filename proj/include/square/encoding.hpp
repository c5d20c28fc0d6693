#pragma once

#include "square/reference_selection.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace square {

enum class VariantName { Square, QT, TR, TQR };

/// Layout of the serialized input. `refs` restricts which reference pool a
/// variant draws from: TQR over negatives is the AVA-TQR(-) baseline and
/// SQUARE over positives is SQuArE(+).
struct EncodingVariant {
    VariantName name = VariantName::Square;
    PolarityFilter refs = PolarityFilter::Both;

    bool uses_question() const { return name != VariantName::TR; }
    bool uses_target() const { return true; }
    /// -1 means unbounded.
    int max_refs_used() const;

    bool operator==(const EncodingVariant&) const = default;
};

/// The six metric configurations compared in the experiments.
enum class Technique { Square, QT, TR, TQR, TqrNeg, SquarePos };

std::string_view to_string(Technique t);
std::optional<Technique> parse_technique(std::string_view s);
EncodingVariant variant_for(Technique t);
/// Pool restriction applied before reference selection.
PolarityFilter polarity_for(Technique t);
/// Name used in report tables ("SQuArE", "AVA-QT", ...).
std::string display_name(Technique t);

inline constexpr int kDefaultMaxUnits = 512;

struct EncodedInput {
    std::string text;
    EncodingVariant variant;
    bool truncated = false;
    /// Some input contained "Question:", "Target:", "Pos_Ref:" or "Neg_Ref:".
    bool contains_tag_literal = false;
};

/// Serializes (q, a, references) as
///   "Question: q Target: a Pos_Ref: p1 ... Neg_Ref: n1 ..."
/// with per-variant omissions. Inputs are whitespace-normalized first. When
/// the whitespace-token count exceeds max_units, whole references are
/// dropped from the end; question and target are always kept.
EncodedInput encode(std::string_view question, std::string_view target,
                    std::span<const std::string> pos, std::span<const std::string> neg,
                    const EncodingVariant& variant, int max_units = kDefaultMaxUnits,
                    std::string_view example_id = {});

/// Convenience over a QAExample and a selection result.
EncodedInput encode(const QAExample& ex, const Selection& sel, const EncodingVariant& variant,
                    int max_units = kDefaultMaxUnits);

/// Restricts pools by the technique's polarity, selects and encodes.
EncodedInput encode_example(const QAExample& ex, Technique technique,
                            const SelectionPolicy& policy, int max_units = kDefaultMaxUnits);

}  // namespace square
