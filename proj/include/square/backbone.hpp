#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace square {

using Vector = std::vector<double>;

/// Text encoder producing one pooled d-dimensional vector per input. Each
/// backbone chooses its own pooling (first position for transformers, mean
/// for the toy backbone). Must be deterministic for fixed weights.
class Backbone {
public:
    virtual ~Backbone() = default;

    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::vector<Vector> encode_batch(std::span<const std::string> texts) const = 0;
};

using BackboneFactory = std::function<std::shared_ptr<const Backbone>()>;

/// Backbones are looked up by name; "toy" is always registered.
void register_backbone(const std::string& name, BackboneFactory factory);
std::shared_ptr<const Backbone> make_backbone(const std::string& name);
std::vector<std::string> registered_backbones();

/// Hashed bag-of-tokens. The serialized input is split into its tagged
/// segments; every token contributes a signed one-hot feature hashed from
/// (segment role, token), and every target token that also occurs in a
/// positive reference, negative reference or the question contributes a
/// match feature. The output is the mean of all feature vectors.
class ToyBackbone final : public Backbone {
public:
    static constexpr std::size_t kDefaultDim = 64;

    explicit ToyBackbone(std::size_t dim = kDefaultDim);

    std::string name() const override { return "toy"; }
    std::size_t dim() const override { return dim_; }
    std::vector<Vector> encode_batch(std::span<const std::string> texts) const override;

    Vector encode_one(std::string_view text) const;

private:
    std::size_t dim_;
};

}  // namespace square
