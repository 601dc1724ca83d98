#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace peacegrid {

// Unit-norm after construction via normalize(); components are 32-bit floats,
// norms and dot products accumulate in 64-bit (see kernels.hpp).
struct EmbeddingVector {
    std::vector<float> values;

    std::size_t dim() const { return values.size(); }
    const float* data() const { return values.data(); }
};

enum class EmbedderKind { Remote, Hashing };

struct EmbedderConfig {
    EmbedderKind kind = EmbedderKind::Hashing;
    std::size_t dim = 1536;
    std::string model_name = "text-embedding-3-small";
    std::size_t batch_size = 100;
    std::size_t max_retries = 5;
    std::size_t max_in_flight = 4;  // concurrent batches on the remote path
    std::uint64_t seed = 0;         // hashing only

    void validate() const;  // dim >= 2, batch_size >= 1
};

// v / ||v||_2, 64-bit accumulation. Rejects zero and non-finite input.
EmbeddingVector normalize(const std::vector<float>& v);

// Deterministic signed feature hashing over lowercase whitespace tokens and
// their adjacent bigrams. Pure function of (text, dim, seed).
EmbeddingVector embed_hash(const std::string& text, const EmbedderConfig& cfg);

}  // namespace peacegrid
