#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "peacegrid/corpus.hpp"
#include "peacegrid/embed.hpp"

namespace peacegrid {

struct EmbeddedArticle {
    std::string id;
    std::string country;
    PeaceLabel peace_label = PeaceLabel::NonPeaceful;
    EmbeddingVector vector;
};

struct SearchHit {
    std::size_t position;  // record position in the store
    std::string id;
    double similarity;
};

// Immutable after build. Vectors live in one contiguous f32 block, countries
// are interned to small ids, so the query scan is a flat pass the kernels
// can chew through.
class VectorStore {
public:
    std::size_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }

    const float* data() const { return data_.data(); }
    const float* row(std::size_t i) const { return data_.data() + i * dim_; }
    const std::string& id(std::size_t i) const { return ids_[i]; }
    const std::string& country(std::size_t i) const { return country_names_[country_ids_[i]]; }
    std::uint32_t country_ordinal(std::size_t i) const { return country_ids_[i]; }
    PeaceLabel label(std::size_t i) const { return static_cast<PeaceLabel>(labels_[i]); }

    // country -> ascending record positions; exactly partitions [0, size).
    const std::map<std::string, std::vector<std::size_t>>& country_index() const {
        return country_index_;
    }
    std::optional<std::uint32_t> find_country_ordinal(const std::string& country) const;

    EmbeddedArticle record(std::size_t i) const;
    std::vector<EmbeddedArticle> all_records() const;

    // Bit-exact: every id, country, label and float bit pattern.
    bool operator==(const VectorStore& other) const;

    friend VectorStore build_store(const std::vector<EmbeddedArticle>& items);

private:
    std::size_t dim_ = 0;
    std::vector<float> data_;
    std::vector<std::string> ids_;
    std::vector<std::uint32_t> country_ids_;
    std::vector<std::string> country_names_;
    std::vector<std::uint8_t> labels_;
    std::map<std::string, std::vector<std::size_t>> country_index_;
};

// Validates non-empty input, uniform dimension, unit norms (within 1e-4).
// Insertion order is preserved.
VectorStore build_store(const std::vector<EmbeddedArticle>& items);

// Downsample every country to min(cap, smallest per-country count), seeded
// and without replacement. Sampling is keyed by sorted article ids, so the
// chosen id set does not depend on the input record order; output records
// are ordered by (country, id).
VectorStore balanced_sample(const VectorStore& store, std::uint64_t seed,
                            std::optional<std::size_t> cap = std::nullopt);

// Exact top-k by dot product (inputs are unit vectors, so this is cosine).
// Hits sorted by similarity descending, ties broken by ascending position.
// Fewer than k hits come back when the store has fewer eligible records.
std::vector<SearchHit> query_topk(const VectorStore& store, const EmbeddingVector& q,
                                  std::size_t k,
                                  const std::optional<std::string>& exclude_country = std::nullopt);

// Selection filter shared by query_topk and the batch classifier.
struct TopkFilter {
    std::optional<std::uint32_t> exclude_country;  // store ordinal
    std::optional<PeaceLabel> label;
};

std::vector<SearchHit> select_topk(const VectorStore& store, const double* scores, std::size_t k,
                                   const TopkFilter& filter);

void save_store(const VectorStore& store, const std::string& path);
VectorStore load_store(const std::string& path);

}  // namespace peacegrid
