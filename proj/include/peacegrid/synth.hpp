#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "peacegrid/corpus.hpp"
#include "peacegrid/vstore.hpp"

namespace peacegrid {

enum class SynthMode { Vectors, Texts };

SynthMode parse_synth_mode(const std::string& s);
std::string to_string(SynthMode mode);

// Controllable two-class corpus generator. separability moves the class
// centroids (vectors) or the class token-mix rates (texts) apart; 0 makes
// the classes indistinguishable.
struct SynthParams {
    std::size_t n_countries = 6;
    std::size_t n_peaceful = 3;
    std::vector<std::size_t> articles_per_country = {200};  // constant or one per country
    double separability = 1.0;   // texts mode requires <= 1
    double country_spread = 0.1;
    double noise = 0.5;
    SynthMode mode = SynthMode::Vectors;
    std::size_t dim = 1536;
    std::uint64_t seed = 0;

    void validate() const;
    std::size_t articles_for(std::size_t country_index) const;
};

// Country names are "c00", "c01", ...; the first n_peaceful are Peaceful.
std::string synth_country_name(std::size_t index, std::size_t n_countries);

struct VectorCorpus {
    std::vector<EmbeddedArticle> articles;
    LabelTable labels;
};

struct TextCorpus {
    ArticleSet articles;
    LabelTable labels;
};

// Unit vectors: class centroid +- (separability/2) along a seeded axis, a
// country offset of length country_spread, isotropic gaussian noise.
VectorCorpus generate_vectors(const SynthParams& p);

// Tokens drawn from two disjoint 500-token pools; a peaceful country's
// articles pick peace-pool tokens with rate 0.5 + separability/2.
TextCorpus generate_texts(const SynthParams& p);

}  // namespace peacegrid
