#pragma once

#include <atomic>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "peacegrid/corpus.hpp"
#include "peacegrid/embed.hpp"
#include "peacegrid/vstore.hpp"

namespace peacegrid {

enum class RuleKind { KnnMajority, ClassMeanTopk };

RuleKind parse_rule_kind(const std::string& s);
std::string to_string(RuleKind kind);

struct DecisionRule {
    RuleKind kind = RuleKind::KnnMajority;
    std::size_t k = 25;

    void validate() const;
};

struct ArticleVerdict {
    std::string article_id;
    PeaceLabel predicted = PeaceLabel::NonPeaceful;
    // knn_majority: neighbor counts; class_mean_topk: mean similarities.
    double score_peaceful = 0.0;
    double score_nonpeaceful = 0.0;
};

struct CountryVerdict {
    std::string country;
    std::size_t n_articles = 0;
    std::size_t n_peaceful = 0;
    double peace_percentage = 0.0;  // exact fraction in [0, 1]
    PeaceLabel predicted = PeaceLabel::NonPeaceful;
    double threshold = 0.5;
};

// Counters accumulated across a batch; safe to share between workers.
struct ClassifyDiagnostics {
    std::atomic<std::size_t> k_clamped{0};  // queries with fewer eligible rows than k
    std::atomic<std::size_t> ties{0};       // queries decided by the tie rule
};

// General cosine over possibly non-unit vectors, accumulated in f64.
double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

ArticleVerdict classify_article(const VectorStore& store, const std::string& article_id,
                                const EmbeddingVector& query, const DecisionRule& rule,
                                const std::optional<std::string>& exclude_country = std::nullopt,
                                ClassifyDiagnostics* diag = nullptr);

// Classifies every query against the store, scoring in query blocks so each
// pass over the store serves several queries. Verdicts keep query order.
std::vector<ArticleVerdict> classify_batch(const VectorStore& store,
                                           const std::vector<std::string>& ids,
                                           const std::vector<EmbeddingVector>& queries,
                                           const DecisionRule& rule,
                                           const std::optional<std::string>& exclude_country =
                                               std::nullopt,
                                           ClassifyDiagnostics* diag = nullptr,
                                           std::size_t n_threads = 1);

// Tally of article verdicts for one country. Peaceful wins only when the
// peaceful share strictly exceeds the threshold.
CountryVerdict aggregate_country(const std::vector<ArticleVerdict>& verdicts,
                                 const std::string& country, double threshold);

}  // namespace peacegrid
