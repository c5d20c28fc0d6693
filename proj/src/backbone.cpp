#include "square/backbone.hpp"

#include "square/errors.hpp"
#include "square/hashing.hpp"
#include "square/text.hpp"

#include <cctype>
#include <map>
#include <mutex>
#include <set>

namespace square {

namespace {

struct Registry {
    std::mutex mu;
    std::map<std::string, BackboneFactory> factories;

    Registry() {
        factories["toy"] = [] { return std::make_shared<const ToyBackbone>(); };
    }
};

Registry& registry() {
    static Registry r;
    return r;
}

enum class Role { None, Question, Target, PosRef, NegRef };

std::string_view role_name(Role r) {
    switch (r) {
        case Role::None: return "none";
        case Role::Question: return "q";
        case Role::Target: return "t";
        case Role::PosRef: return "p";
        case Role::NegRef: return "n";
    }
    return "none";
}

std::string clean_token(std::string_view raw) {
    std::size_t b = 0;
    std::size_t e = raw.size();
    auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
    while (b < e && !alnum(raw[b])) ++b;
    while (e > b && !alnum(raw[e - 1])) --e;
    std::string out(raw.substr(b, e - b));
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace

void register_backbone(const std::string& name, BackboneFactory factory) {
    auto& r = registry();
    std::lock_guard lock(r.mu);
    r.factories[name] = std::move(factory);
}

std::shared_ptr<const Backbone> make_backbone(const std::string& name) {
    BackboneFactory factory;
    {
        auto& r = registry();
        std::lock_guard lock(r.mu);
        auto it = r.factories.find(name);
        if (it == r.factories.end()) throw ConfigError("unknown backbone '" + name + "'");
        factory = it->second;
    }
    auto backbone = factory();
    if (!backbone) throw std::runtime_error("backbone '" + name + "' failed to initialize");
    return backbone;
}

std::vector<std::string> registered_backbones() {
    auto& r = registry();
    std::lock_guard lock(r.mu);
    std::vector<std::string> names;
    for (const auto& [name, _] : r.factories) names.push_back(name);
    return names;
}

ToyBackbone::ToyBackbone(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw ConfigError("toy backbone dimension must be positive");
}

Vector ToyBackbone::encode_one(std::string_view text_in) const {
    std::vector<std::pair<Role, std::string>> tokens;
    Role role = Role::None;
    for (const auto& raw : text::split_whitespace(text_in)) {
        if (raw == "Question:") role = Role::Question;
        else if (raw == "Target:") role = Role::Target;
        else if (raw == "Pos_Ref:") role = Role::PosRef;
        else if (raw == "Neg_Ref:") role = Role::NegRef;
        else if (auto tok = clean_token(raw); !tok.empty()) tokens.emplace_back(role, std::move(tok));
    }

    std::set<std::string> in_question, in_pos, in_neg;
    for (const auto& [r, tok] : tokens) {
        if (r == Role::Question) in_question.insert(tok);
        if (r == Role::PosRef) in_pos.insert(tok);
        if (r == Role::NegRef) in_neg.insert(tok);
    }

    Vector v(dim_, 0.0);
    std::size_t count = 0;
    auto add = [&](std::string_view feature) {
        const std::uint64_t h = fnv1a64(feature);
        v[h % dim_] += (h >> 63) ? -1.0 : 1.0;
        ++count;
    };
    for (const auto& [r, tok] : tokens) {
        std::string feature(role_name(r));
        feature += ':';
        feature += tok;
        add(feature);
        if (r != Role::Target) continue;
        if (in_pos.count(tok)) add("<match:pos>");
        if (in_neg.count(tok)) add("<match:neg>");
        if (in_question.count(tok)) add("<match:q>");
    }
    if (count > 0)
        for (double& x : v) x /= static_cast<double>(count);
    return v;
}

std::vector<Vector> ToyBackbone::encode_batch(std::span<const std::string> texts) const {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(encode_one(t));
    return out;
}

}  // namespace square
