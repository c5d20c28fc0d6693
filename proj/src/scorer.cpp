#include "square/scorer.hpp"

#include "square/errors.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace square {

namespace {

constexpr std::array<char, 8> kMagic = {'S', 'Q', 'U', 'A', 'R', 'E', 'C', 'K'};
constexpr int kFormat = 1;

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace

ScorerModel ScorerModel::zero_initialized(std::shared_ptr<const Backbone> backbone,
                                          std::string config_fingerprint) {
    if (!backbone) throw std::invalid_argument("scorer needs a backbone");
    ScorerModel m;
    m.weights.assign(backbone->dim(), 0.0f);
    m.backbone = std::move(backbone);
    m.config_fingerprint = std::move(config_fingerprint);
    return m;
}

double ScorerModel::logit(const Vector& pooled) const {
    if (pooled.size() != weights.size())
        throw std::runtime_error("backbone produced " + std::to_string(pooled.size()) +
                                 "-d vector, head expects " + std::to_string(weights.size()));
    double z = bias;
    for (std::size_t i = 0; i < pooled.size(); ++i) z += static_cast<double>(weights[i]) * pooled[i];
    return z;
}

double sigmoid(double x) {
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double score(const ScorerModel& model, const EncodedInput& input) {
    return score_batch(model, std::span(&input, 1), 1).front();
}

std::vector<double> score_batch(const ScorerModel& model, std::span<const EncodedInput> inputs,
                                std::size_t batch_size) {
    if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");
    if (!model.backbone) throw std::runtime_error("scorer has no backbone loaded");
    std::vector<double> out;
    out.reserve(inputs.size());
    for (std::size_t start = 0; start < inputs.size(); start += batch_size) {
        const std::size_t end = std::min(inputs.size(), start + batch_size);
        std::vector<std::string> texts;
        for (std::size_t i = start; i < end; ++i) {
            if (inputs[i].text.empty()) throw std::invalid_argument("cannot score an empty input");
            texts.push_back(inputs[i].text);
        }
        const auto pooled = model.backbone->encode_batch(texts);
        if (pooled.size() != texts.size())
            throw std::runtime_error("backbone '" + model.backbone->name() + "' returned " +
                                     std::to_string(pooled.size()) + " vectors for " +
                                     std::to_string(texts.size()) + " inputs");
        for (const auto& v : pooled) out.push_back(sigmoid(model.logit(v)));
    }
    return out;
}

void save_checkpoint(const ScorerModel& model, const std::filesystem::path& path) {
    if (!model.backbone) throw CheckpointError("cannot save a scorer without a backbone");
    nlohmann::ordered_json header;
    header["format"] = kFormat;
    header["version"] = model.version;
    header["fingerprint"] = model.config_fingerprint;
    header["backbone"] = model.backbone->name();
    header["d"] = model.weights.size();
    header["weight_count"] = model.weights.size() + 1;
    const std::string header_text = header.dump();

    std::string blob(kMagic.begin(), kMagic.end());
    put_u32(blob, static_cast<std::uint32_t>(header_text.size()));
    blob += header_text;
    auto put_float = [&](float f) { put_u32(blob, std::bit_cast<std::uint32_t>(f)); };
    for (float w : model.weights) put_float(w);
    put_float(model.bias);

    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    // write then rename
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw CheckpointError("cannot write " + tmp.string());
        out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
        if (!out) throw CheckpointError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

ScorerModel load_checkpoint(const std::filesystem::path& path,
                            const std::optional<std::string>& expected_fingerprint) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
    const std::string blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
    const std::string where = "checkpoint " + path.string();

    if (blob.size() < kMagic.size() + 4 || std::memcmp(blob.data(), kMagic.data(), kMagic.size()) != 0)
        throw CheckpointError(where + ": bad magic or truncated header");
    const std::size_t header_len = get_u32(bytes + kMagic.size());
    const std::size_t header_start = kMagic.size() + 4;
    if (blob.size() < header_start + header_len) throw CheckpointError(where + ": truncated header");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(blob.substr(header_start, header_len));
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(where + ": unreadable header: " + e.what());
    }

    ScorerModel m;
    std::size_t d = 0, count = 0;
    std::string backbone_name;
    try {
        if (header.at("format").get<int>() != kFormat)
            throw CheckpointError(where + ": unsupported format " + header.at("format").dump());
        m.version = header.at("version").get<std::string>();
        m.config_fingerprint = header.at("fingerprint").get<std::string>();
        backbone_name = header.at("backbone").get<std::string>();
        d = header.at("d").get<std::size_t>();
        count = header.at("weight_count").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(where + ": malformed header: " + e.what());
    }
    if (m.version != kModelVersion)
        throw CheckpointError(where + ": version '" + m.version + "' does not match '" + kModelVersion + "'");
    if (expected_fingerprint && *expected_fingerprint != m.config_fingerprint)
        throw CheckpointError(where + ": config fingerprint mismatch: checkpoint has '" +
                              m.config_fingerprint + "', expected '" + *expected_fingerprint + "'");
    if (count != d + 1) throw CheckpointError(where + ": weight_count must be d + 1");

    const std::size_t data_start = header_start + header_len;
    if (blob.size() != data_start + 4 * count)
        throw CheckpointError(where + ": expected " + std::to_string(4 * count) + " weight bytes, found " +
                              std::to_string(blob.size() - data_start));
    auto get_float = [&](std::size_t i) { return std::bit_cast<float>(get_u32(bytes + data_start + 4 * i)); };
    m.weights.resize(d);
    for (std::size_t i = 0; i < d; ++i) m.weights[i] = get_float(i);
    m.bias = get_float(d);

    try {
        m.backbone = make_backbone(backbone_name);
    } catch (const std::exception& e) {
        throw CheckpointError(where + ": " + e.what());
    }
    if (m.backbone->dim() != d)
        throw CheckpointError(where + ": backbone '" + backbone_name + "' has dimension " +
                              std::to_string(m.backbone->dim()) + ", checkpoint has " + std::to_string(d));
    return m;
}

}  // namespace square
