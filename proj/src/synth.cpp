#include "peacegrid/synth.hpp"

#include <cmath>
#include <cstdio>

#include "peacegrid/embed.hpp"
#include "peacegrid/errors.hpp"
#include "peacegrid/rng.hpp"

namespace peacegrid {

namespace {

constexpr std::size_t kPoolSize = 500;

std::uint64_t stream_seed(std::uint64_t seed, const std::string& country,
                          std::string_view stream) {
    return mix64(seed ^ fnv1a64(country) ^ fnv1a64(stream));
}

std::uint64_t article_seed(std::uint64_t seed, const std::string& country, std::size_t index) {
    return mix64(seed ^ fnv1a64(country) ^ ((index + 1) * 0x9E3779B97F4A7C15ull));
}

std::vector<double> gaussian_direction(SplitMix64& rng, std::size_t dim) {
    std::vector<double> v(dim);
    double sq = 0.0;
    do {
        sq = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            v[i] = rng.gaussian();
            sq += v[i] * v[i];
        }
    } while (sq == 0.0);
    const double inv = 1.0 / std::sqrt(sq);
    for (double& x : v) x *= inv;
    return v;
}

std::string article_id(const std::string& country, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "-a%05llu", static_cast<unsigned long long>(index));
    return country + buf;
}

LabelEntry synth_label(std::uint64_t seed, const std::string& country, bool peaceful) {
    SplitMix64 rng(stream_seed(seed, country, "index-value"));
    LabelEntry entry;
    entry.peace_label = peaceful ? PeaceLabel::Peaceful : PeaceLabel::NonPeaceful;
    // Disjoint index bands give the scatter report a visible spread.
    entry.index_value = (peaceful ? 0.70 : 0.30) + 0.25 * rng.uniform01();
    return entry;
}

}  // namespace

SynthMode parse_synth_mode(const std::string& s) {
    if (s == "vectors") return SynthMode::Vectors;
    if (s == "texts") return SynthMode::Texts;
    throw InputError("unknown synthesis mode '" + s + "' (expected vectors or texts)");
}

std::string to_string(SynthMode mode) {
    return mode == SynthMode::Vectors ? "vectors" : "texts";
}

void SynthParams::validate() const {
    if (n_countries < 2) throw InputError("synthesis needs at least 2 countries");
    if (n_peaceful < 1 || n_peaceful > n_countries - 1) {
        throw InputError("n_peaceful must lie in [1, n_countries - 1]");
    }
    if (articles_per_country.empty() ||
        (articles_per_country.size() != 1 && articles_per_country.size() != n_countries)) {
        throw InputError("articles_per_country must be one constant or one entry per country");
    }
    for (std::size_t count : articles_per_country) {
        if (count == 0) throw InputError("every country needs at least 1 article");
    }
    if (separability < 0.0) throw InputError("separability must be >= 0");
    if (mode == SynthMode::Texts && separability > 1.0) {
        throw InputError("text mode requires separability <= 1");
    }
    if (country_spread < 0.0) throw InputError("country_spread must be >= 0");
    if (!(noise > 0.0)) throw InputError("noise must be > 0");
    if (dim < 2) throw InputError("dimension must be >= 2");
    if (n_countries > 99999) throw InputError("too many countries");
}

std::size_t SynthParams::articles_for(std::size_t country_index) const {
    return articles_per_country.size() == 1 ? articles_per_country[0]
                                            : articles_per_country[country_index];
}

std::string synth_country_name(std::size_t index, std::size_t n_countries) {
    int width = 2;
    for (std::size_t v = n_countries - 1; v >= 100; v /= 10) ++width;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "c%0*llu", width, static_cast<unsigned long long>(index));
    return buf;
}

VectorCorpus generate_vectors(const SynthParams& p) {
    p.validate();
    if (p.mode != SynthMode::Vectors) throw InputError("generate_vectors needs mode = vectors");

    SplitMix64 axis_rng(mix64(p.seed ^ fnv1a64("class-axis")));
    const std::vector<double> axis = gaussian_direction(axis_rng, p.dim);

    VectorCorpus out;
    for (std::size_t c = 0; c < p.n_countries; ++c) {
        const std::string country = synth_country_name(c, p.n_countries);
        const bool peaceful = c < p.n_peaceful;
        out.labels.entries[country] = synth_label(p.seed, country, peaceful);

        const double side = peaceful ? 1.0 : -1.0;
        std::vector<double> centroid(p.dim);
        for (std::size_t i = 0; i < p.dim; ++i) {
            centroid[i] = side * (p.separability / 2.0) * axis[i];
        }
        if (p.country_spread > 0.0) {
            SplitMix64 offset_rng(stream_seed(p.seed, country, "country-offset"));
            const std::vector<double> offset = gaussian_direction(offset_rng, p.dim);
            for (std::size_t i = 0; i < p.dim; ++i) centroid[i] += p.country_spread * offset[i];
        }

        const std::size_t count = p.articles_for(c);
        for (std::size_t a = 0; a < count; ++a) {
            SplitMix64 rng(article_seed(p.seed, country, a));
            std::vector<float> values(p.dim);
            for (std::size_t i = 0; i < p.dim; ++i) {
                values[i] = static_cast<float>(centroid[i] + p.noise * rng.gaussian());
            }
            EmbeddedArticle article;
            article.id = article_id(country, a);
            article.country = country;
            article.peace_label = peaceful ? PeaceLabel::Peaceful : PeaceLabel::NonPeaceful;
            article.vector = normalize(values);
            out.articles.push_back(std::move(article));
        }
    }
    return out;
}

TextCorpus generate_texts(const SynthParams& p) {
    p.validate();
    if (p.mode != SynthMode::Texts) throw InputError("generate_texts needs mode = texts");

    std::vector<std::string> peace_pool(kPoolSize), conflict_pool(kPoolSize);
    for (std::size_t i = 0; i < kPoolSize; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "pax%04zu", i);
        peace_pool[i] = buf;
        std::snprintf(buf, sizeof(buf), "war%04zu", i);
        conflict_pool[i] = buf;
    }

    TextCorpus out;
    for (std::size_t c = 0; c < p.n_countries; ++c) {
        const std::string country = synth_country_name(c, p.n_countries);
        const bool peaceful = c < p.n_peaceful;
        out.labels.entries[country] = synth_label(p.seed, country, peaceful);

        const double peace_rate = 0.5 + (peaceful ? 1.0 : -1.0) * (p.separability / 2.0);
        const std::size_t count = p.articles_for(c);
        for (std::size_t a = 0; a < count; ++a) {
            SplitMix64 rng(article_seed(p.seed, country, a));
            const std::size_t length = 30 + rng.bounded(51);  // 30..80 tokens
            std::string text;
            for (std::size_t t = 0; t < length; ++t) {
                const bool from_peace = rng.uniform01() < peace_rate;
                const auto& pool = from_peace ? peace_pool : conflict_pool;
                if (t) text += ' ';
                text += pool[rng.bounded(kPoolSize)];
            }
            Article article;
            article.id = article_id(country, a);
            article.country = country;
            article.word_count = length;
            article.text = std::move(text);
            out.articles.push_back(std::move(article));
        }
    }
    return out;
}

}  // namespace peacegrid
