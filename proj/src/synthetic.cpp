#include "square/synthetic.hpp"

#include "square/hashing.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace square {

namespace {

constexpr std::array<const char*, 12> kOnsets = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t"};
constexpr std::array<const char*, 5> kVowels = {"a", "e", "i", "o", "u"};

// Distinct two-syllable pseudo-words: index -> CV-CV.
std::string pseudo_word(std::size_t i) {
    const std::size_t n = kOnsets.size() * kVowels.size();
    const std::size_t a = i % n;
    const std::size_t b = (i / n) % n;
    return std::string(kOnsets[a % kOnsets.size()]) + kVowels[a / kOnsets.size()] +
           kOnsets[b % kOnsets.size()] + kVowels[b / kOnsets.size()];
}

struct Vocab {
    std::size_t offset;
    std::size_t size;
    std::string word(std::size_t i) const { return pseudo_word(offset + i); }
};

// 60 * 60 = 3600 distinct words; the ranges below are disjoint.
constexpr Vocab kQuestionWords{0, 300};
constexpr Vocab kContentWords{300, 600};
constexpr Vocab kTargetFiller{900, 400};
constexpr Vocab kRefFiller{1300, 400};

std::vector<std::size_t> sample(std::size_t n, std::size_t k, SplitMix64& rng) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) std::swap(idx[i], idx[i + rng.below(n - i)]);
    idx.resize(k);
    return idx;
}

std::string sentence(std::vector<std::string> words, SplitMix64& rng) {
    for (std::size_t i = words.size(); i > 1; --i) std::swap(words[i - 1], words[rng.below(i)]);
    std::string out;
    for (const auto& w : words) {
        if (!out.empty()) out += ' ';
        out += w;
    }
    out[0] = static_cast<char>(out[0] - 'a' + 'A');
    return out + ".";
}

std::vector<std::string> pick(const std::vector<std::string>& from, std::size_t k, SplitMix64& rng) {
    std::vector<std::string> out;
    for (std::size_t i : sample(from.size(), k, rng)) out.push_back(from[i]);
    return out;
}

std::vector<std::string> fill(const Vocab& v, std::size_t k, SplitMix64& rng) {
    std::vector<std::string> out;
    for (std::size_t i : sample(v.size, k, rng)) out.push_back(v.word(i));
    return out;
}

QAExample make_example(const std::string& id, const std::string& dataset, Split split, int label,
                       const SyntheticSpec& spec, SplitMix64& rng) {
    QAExample ex;
    ex.example_id = id;
    ex.dataset_name = dataset;
    ex.split = split;
    ex.label = label;

    const auto q = fill(kQuestionWords, 4, rng);
    ex.question = "What " + q[0] + " " + q[1] + " does " + q[2] + " " + q[3] + "?";

    const auto content = sample(kContentWords.size, 12, rng);
    std::vector<std::string> answer, distractor;
    for (std::size_t i = 0; i < 6; ++i) answer.push_back(kContentWords.word(content[i]));
    for (std::size_t i = 6; i < 12; ++i) distractor.push_back(kContentWords.word(content[i]));

    for (std::size_t r = 0; r < spec.pos_pool; ++r) {
        auto words = pick(answer, 5, rng);
        for (auto& w : fill(kRefFiller, 3, rng)) words.push_back(w);
        ex.pos_refs.push_back({sentence(words, rng), Polarity::Positive});
    }
    for (std::size_t r = 0; r < spec.neg_pool; ++r) {
        auto words = pick(distractor, 5, rng);
        for (auto& w : fill(kRefFiller, 3, rng)) words.push_back(w);
        ex.neg_refs.push_back({sentence(words, rng), Polarity::Negative});
    }

    std::vector<std::string> target;
    if (label == 1) {
        target = pick(answer, 4, rng);
    } else {
        target = pick(distractor, 4, rng);
        if (rng.below(2) == 1) target.push_back(answer[rng.below(answer.size())]);
    }
    for (auto& w : fill(kTargetFiller, 4, rng)) target.push_back(w);
    ex.target_answer = sentence(target, rng);
    return ex;
}

}  // namespace

Dataset make_synthetic(const SyntheticSpec& spec) {
    Dataset d;
    d.name = spec.name;
    d.provenance["adapter"] = "synthetic";
    d.provenance["seed"] = std::to_string(spec.seed);
    SplitMix64 rng(spec.seed);
    auto emit = [&](Split split, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::string id = spec.name + "-" + std::string(to_string(split)) + "-" + std::to_string(i);
            const int label = static_cast<int>(rng.below(2));
            d.examples.push_back(make_example(id, spec.name, split, label, spec, rng));
        }
    };
    emit(Split::Train, spec.n_train);
    emit(Split::Dev, spec.n_dev);
    emit(Split::Test, spec.n_test);
    return d;
}

}  // namespace square
