#include "fedfeed/model.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

namespace fedfeed {

namespace {

const std::vector<std::string>& default_category_names() {
    static const std::vector<std::string> names = {"news",   "media",  "politics", "sports",
                                                   "community-services", "technology"};
    return names;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> in, std::size_t at) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
    return v;
}

}  // namespace

CategorySet::CategorySet(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty()) throw std::invalid_argument("category set must be nonempty");
    auto sorted = names_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("category labels must be unique");
    for (const auto& n : names_)
        if (n.empty()) throw std::invalid_argument("category labels must be nonempty");
}

CategorySet CategorySet::defaults() { return CategorySet(default_category_names()); }

CategorySet CategorySet::first(std::size_t k) {
    if (k == 0) throw std::invalid_argument("category count must be positive");
    std::vector<std::string> names;
    const auto& defaults = default_category_names();
    for (std::size_t i = 0; i < k; ++i)
        names.push_back(i < defaults.size() ? defaults[i] : "cat" + std::to_string(i));
    return CategorySet(std::move(names));
}

std::size_t CategorySet::index_of(std::string_view label) const {
    auto it = std::find(names_.begin(), names_.end(), label);
    return static_cast<std::size_t>(std::distance(names_.begin(), it));
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(std::move(cur));
    return tokens;
}

FeatureVector featurize(std::string_view text, std::uint32_t feature_dim) {
    if (feature_dim == 0 || (feature_dim & (feature_dim - 1)) != 0)
        throw ContractViolation("feature_dim must be a power of two");
    std::map<std::uint32_t, double> counts;
    for (const auto& tok : tokenize(text))
        counts[static_cast<std::uint32_t>(fnv1a64(tok) & (feature_dim - 1))] += 1.0;
    FeatureVector fv;
    fv.indices.reserve(counts.size());
    fv.values.reserve(counts.size());
    for (const auto& [idx, n] : counts) {
        fv.indices.push_back(idx);
        fv.values.push_back(n);
    }
    return fv;
}

Evaluation evaluate(const ModelParams& params, std::span<const Example> examples) {
    if (examples.empty()) return {};
    double loss = 0.0;
    std::size_t correct = 0;
    for (const auto& ex : examples) {
        auto p = predict_category(params, ex.features);
        loss -= std::log(std::max(p(static_cast<Eigen::Index>(ex.label)), 1e-300));
        if (argmax(p) == ex.label) ++correct;
    }
    const auto n = static_cast<double>(examples.size());
    return {loss / n, static_cast<double>(correct) / n};
}

std::vector<std::uint8_t> encode_checkpoint(const ModelParams& params) {
    std::vector<std::uint8_t> out{'F', 'F', 'M', 'L'};
    put_u32(out, kCheckpointVersion);
    put_u32(out, params.num_categories());
    put_u32(out, params.feature_dim());
    const auto& w = params.weights();
    out.reserve(out.size() + static_cast<std::size_t>(w.size()) * 8);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            const auto bits = std::bit_cast<std::uint64_t>(w(r, c));
            for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
        }
    }
    return out;
}

ModelParams decode_checkpoint(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 16 || std::memcmp(bytes.data(), "FFML", 4) != 0)
        throw std::runtime_error("checkpoint: bad magic");
    const auto version = get_u32(bytes, 4);
    if (version != kCheckpointVersion)
        throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
    const auto k = get_u32(bytes, 8);
    const auto d = get_u32(bytes, 12);
    const std::size_t expected = 16 + static_cast<std::size_t>(k) * d * 8;
    if (bytes.size() != expected) throw std::runtime_error("checkpoint: truncated or oversized payload");
    ModelParams::Matrix w(k, d);
    std::size_t at = 16;
    for (std::uint32_t r = 0; r < k; ++r) {
        for (std::uint32_t c = 0; c < d; ++c) {
            std::uint64_t bits = 0;
            for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[at + i]) << (8 * i);
            at += 8;
            w(r, c) = std::bit_cast<double>(bits);
        }
    }
    return ModelParams(std::move(w));
}

void write_checkpoint(const std::filesystem::path& path, const ModelParams& params) {
    const auto bytes = encode_checkpoint(params);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write on checkpoint " + path.string());
}

ModelParams read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace fedfeed
