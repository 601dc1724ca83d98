#include "peacegrid/embed.hpp"

#include <cctype>
#include <cmath>
#include <string_view>

#include "peacegrid/errors.hpp"
#include "peacegrid/kernels.hpp"
#include "peacegrid/rng.hpp"

namespace peacegrid {

void EmbedderConfig::validate() const {
    if (dim < 2) throw InputError("embedder dim must be >= 2");
    if (batch_size < 1) throw InputError("embedder batch_size must be >= 1");
}

EmbeddingVector normalize(const std::vector<float>& v) {
    for (float x : v)
        if (!std::isfinite(x)) throw InputError("vector has a non-finite component");
    const double sq = kernels::squared_norm(v.data(), v.size());
    if (sq == 0.0) throw InputError("zero vector cannot be normalized");
    const double norm = std::sqrt(sq);

    EmbeddingVector out;
    out.values.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        out.values[i] = static_cast<float>(static_cast<double>(v[i]) / norm);
    return out;
}

namespace {

std::uint64_t seeded_hash(std::string_view feature, std::uint64_t seed) {
    return mix64(fnv1a64(feature) ^ (seed * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull));
}

void accumulate_feature(std::string_view feature, std::uint64_t seed, std::vector<float>& buckets) {
    const std::uint64_t h = seeded_hash(feature, seed);
    const std::size_t bucket = static_cast<std::size_t>(h % buckets.size());
    buckets[bucket] += (h >> 63) ? 1.0f : -1.0f;
}

}  // namespace

EmbeddingVector embed_hash(const std::string& text, const EmbedderConfig& cfg) {
    cfg.validate();

    std::string lowered = text;
    for (char& c : lowered)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    std::vector<std::string_view> tokens;
    const std::string_view sv = lowered;
    std::size_t i = 0;
    while (i < sv.size()) {
        while (i < sv.size() && std::isspace(static_cast<unsigned char>(sv[i]))) ++i;
        std::size_t start = i;
        while (i < sv.size() && !std::isspace(static_cast<unsigned char>(sv[i]))) ++i;
        if (i > start) tokens.push_back(sv.substr(start, i - start));
    }
    if (tokens.empty()) throw InputError("empty text");

    std::vector<float> buckets(cfg.dim, 0.0f);
    std::string bigram;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        accumulate_feature(tokens[t], cfg.seed, buckets);
        if (t + 1 < tokens.size()) {
            bigram.assign(tokens[t]);
            bigram.push_back(' ');
            bigram.append(tokens[t + 1]);
            accumulate_feature(bigram, cfg.seed, buckets);
        }
    }

    if (kernels::squared_norm(buckets.data(), buckets.size()) == 0.0)
        throw InternalError("hashing embedder produced an all-zero accumulation");
    return normalize(buckets);
}

}  // namespace peacegrid
