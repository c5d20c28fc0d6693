#pragma once

#include "square/corpus.hpp"

#include <cstdint>

namespace square {

/// Generator for a desk-scale dataset whose label is a pure function of
/// token overlap: a target is correct iff it shares at least three tokens
/// with a positive reference. Correct targets take 4 of the question's 6
/// "answer" tokens and every positive reference takes 5 of them, so the
/// overlap is always >= 3. Incorrect targets draw from a disjoint set of
/// 6 "distractor" tokens (which the negative references use) plus at most
/// one answer token. Fillers come from per-role vocabularies, which keeps
/// accidental overlaps out.
struct SyntheticSpec {
    std::size_t n_train = 500;
    std::size_t n_dev = 200;
    std::size_t n_test = 200;
    std::size_t pos_pool = 3;
    std::size_t neg_pool = 4;
    std::uint64_t seed = 20240;
    std::string name = "synthetic";
};

Dataset make_synthetic(const SyntheticSpec& spec = {});

}  // namespace square
