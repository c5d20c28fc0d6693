#pragma once

// Hand-built byte-exact expectations for the prompt grammar
//   "Question: " q " Target: " a {" Pos_Ref: " ref} {" Neg_Ref: " ref}
// Unit counts for truncation cases (whitespace tokens, tags included):
//   Question: Who wrote Hamlet?        4
//   Target: Shakespeare did.           3
//   Pos_Ref: Hamlet is by Shakespeare. 5
//   Pos_Ref: Shakespeare wrote it.     4
//   Neg_Ref: Hamlet is a village.      5
//   Neg_Ref: Marlowe wrote it.         4   -> full SQUARE string = 25 units

#include "square/encoding.hpp"

#include <string>
#include <vector>

namespace square::golden {

struct EncodingCase {
    std::string name;
    Technique technique;
    std::string question;
    std::string target;
    std::vector<std::string> pos;
    std::vector<std::string> neg;
    int max_units;
    std::string expected;
    bool truncated;
    bool tag_literal;
};

inline const std::string kQ = "Who wrote Hamlet?";
inline const std::string kA = "Shakespeare did.";
inline const std::string kP1 = "Hamlet is by Shakespeare.";
inline const std::string kP2 = "Shakespeare wrote it.";
inline const std::string kN1 = "Hamlet is a village.";
inline const std::string kN2 = "Marlowe wrote it.";

inline std::vector<EncodingCase> encoding_cases() {
    const std::string head = "Question: Who wrote Hamlet? Target: Shakespeare did.";
    const std::string p1 = " Pos_Ref: Hamlet is by Shakespeare.";
    const std::string p2 = " Pos_Ref: Shakespeare wrote it.";
    const std::string n1 = " Neg_Ref: Hamlet is a village.";
    const std::string n2 = " Neg_Ref: Marlowe wrote it.";
    const std::vector<std::string> P = {kP1, kP2};
    const std::vector<std::string> N = {kN1, kN2};
    return {
        {"square_one_each", Technique::Square, kQ, kA, {kP1}, {kN1}, 512,
         "Question: Who wrote Hamlet? Target: Shakespeare did. Pos_Ref: Hamlet is by Shakespeare. Neg_Ref: Hamlet is a village.",
         false, false},
        {"qt", Technique::QT, kQ, kA, {kP1}, {kN1}, 512, "Question: Who wrote Hamlet? Target: Shakespeare did.", false, false},
        {"square_empty_pools", Technique::Square, kQ, kA, {}, {}, 512, head, false, false},
        {"square_two_each", Technique::Square, kQ, kA, P, N, 512, head + p1 + p2 + n1 + n2, false, false},
        {"square_negatives_only", Technique::Square, kQ, kA, {}, N, 512, head + n1 + n2, false, false},
        {"tr", Technique::TR, kQ, kA, P, N, 512, "Target: Shakespeare did." + p1, false, false},
        {"tqr", Technique::TQR, kQ, kA, P, N, 512, head + p1, false, false},
        {"tqr_neg", Technique::TqrNeg, kQ, kA, P, N, 512, head + n1, false, false},
        {"square_pos", Technique::SquarePos, kQ, kA, P, N, 512, head + p1 + p2, false, false},
        {"square_pos_empty_positives", Technique::SquarePos, kQ, kA, {}, N, 512, head, false, false},
        {"qt_whitespace_normalized", Technique::QT, "  Who   wrote\tHamlet? ", "Shakespeare\n did.", {}, {}, 512,
         head, false, false},
        {"square_reference_whitespace", Technique::Square, kQ, kA, {"  Hamlet  is by\nShakespeare. "}, {}, 512,
         head + p1, false, false},
        {"truncate_last_negative", Technique::Square, kQ, kA, P, N, 24, head + p1 + p2 + n1, true, false},
        {"truncate_all_negatives", Technique::Square, kQ, kA, P, N, 16, head + p1 + p2, true, false},
        {"truncate_to_one_positive", Technique::Square, kQ, kA, P, N, 15, head + p1, true, false},
        {"exact_fit_not_truncated", Technique::Square, kQ, kA, P, N, 25, head + p1 + p2 + n1 + n2, false, false},
        {"question_and_target_never_dropped", Technique::Square, kQ, kA, P, N, 3, head, true, false},
        {"tqr_truncated", Technique::TQR, kQ, kA, P, {}, 7, head, true, false},
        {"tr_truncated", Technique::TR, kQ, kA, P, {}, 3, "Target: Shakespeare did.", true, false},
        {"tag_literal_flagged", Technique::Square, kQ, kA, {"Target: trick"}, {}, 512,
         head + " Pos_Ref: Target: trick", false, true},
    };
}

}  // namespace square::golden
