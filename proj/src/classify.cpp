#include "peacegrid/classify.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "peacegrid/errors.hpp"
#include "peacegrid/kernels.hpp"
#include "peacegrid/parallel.hpp"

namespace peacegrid {

namespace {

// Queries per store pass; keeps the flat query block under ~100 KiB at
// dimension 1536 while amortizing the row traffic.
constexpr std::size_t kQueryBlock = 16;

PeaceLabel decide(double score_peaceful, double score_nonpeaceful, ClassifyDiagnostics* diag) {
    if (score_peaceful > score_nonpeaceful) return PeaceLabel::Peaceful;
    if (score_peaceful == score_nonpeaceful && diag) {
        diag->ties.fetch_add(1, std::memory_order_relaxed);
    }
    return PeaceLabel::NonPeaceful;
}

void note_clamp(ClassifyDiagnostics* diag) {
    if (diag) diag->k_clamped.fetch_add(1, std::memory_order_relaxed);
}

ArticleVerdict verdict_from_scores(const VectorStore& store, const std::string& article_id,
                                   const double* scores, const DecisionRule& rule,
                                   const std::optional<std::uint32_t>& exclude_ordinal,
                                   const std::optional<std::string>& exclude_country,
                                   ClassifyDiagnostics* diag) {
    ArticleVerdict verdict;
    verdict.article_id = article_id;

    TopkFilter base;
    base.exclude_country = exclude_ordinal;

    if (rule.kind == RuleKind::KnnMajority) {
        auto hits = select_topk(store, scores, rule.k, base);
        if (hits.empty()) {
            throw InputError("no records eligible for query '" + article_id + "'" +
                             (exclude_country ? " after excluding country '" + *exclude_country +
                                                    "'"
                                              : ""));
        }
        if (hits.size() < rule.k) note_clamp(diag);
        std::size_t peaceful = 0;
        for (const auto& hit : hits) {
            if (store.label(hit.position) == PeaceLabel::Peaceful) ++peaceful;
        }
        verdict.score_peaceful = static_cast<double>(peaceful);
        verdict.score_nonpeaceful = static_cast<double>(hits.size() - peaceful);
    } else {
        TopkFilter peaceful_filter = base;
        peaceful_filter.label = PeaceLabel::Peaceful;
        TopkFilter nonpeaceful_filter = base;
        nonpeaceful_filter.label = PeaceLabel::NonPeaceful;
        auto hits_p = select_topk(store, scores, rule.k, peaceful_filter);
        auto hits_n = select_topk(store, scores, rule.k, nonpeaceful_filter);
        if (hits_p.empty() && hits_n.empty()) {
            throw InputError("no records eligible for query '" + article_id + "'" +
                             (exclude_country ? " after excluding country '" + *exclude_country +
                                                    "'"
                                              : ""));
        }
        if ((!hits_p.empty() && hits_p.size() < rule.k) ||
            (!hits_n.empty() && hits_n.size() < rule.k)) {
            note_clamp(diag);
        }
        auto mean_similarity = [](const std::vector<SearchHit>& hits) {
            if (hits.empty()) return -std::numeric_limits<double>::infinity();
            double sum = 0.0;
            for (const auto& hit : hits) sum += hit.similarity;
            return sum / static_cast<double>(hits.size());
        };
        verdict.score_peaceful = mean_similarity(hits_p);
        verdict.score_nonpeaceful = mean_similarity(hits_n);
    }

    verdict.predicted = decide(verdict.score_peaceful, verdict.score_nonpeaceful, diag);
    return verdict;
}

}  // namespace

RuleKind parse_rule_kind(const std::string& s) {
    if (s == "knn_majority") return RuleKind::KnnMajority;
    if (s == "class_mean_topk") return RuleKind::ClassMeanTopk;
    throw InputError("unknown decision rule '" + s +
                     "' (expected knn_majority or class_mean_topk)");
}

std::string to_string(RuleKind kind) {
    return kind == RuleKind::KnnMajority ? "knn_majority" : "class_mean_topk";
}

void DecisionRule::validate() const {
    if (k == 0) throw InputError("decision rule requires k >= 1");
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw InputError("cosine requires equal dimensions, got " + std::to_string(a.dim()) +
                         " and " + std::to_string(b.dim()));
    }
    if (a.dim() == 0) throw InputError("cosine of empty vectors is undefined");
    const double sq_a = kernels::squared_norm(a.data(), a.dim());
    const double sq_b = kernels::squared_norm(b.data(), b.dim());
    if (sq_a == 0.0 || sq_b == 0.0) {
        throw InputError("cosine of a zero vector is undefined");
    }
    return kernels::dot(a.data(), b.data(), a.dim()) / std::sqrt(sq_a * sq_b);
}

ArticleVerdict classify_article(const VectorStore& store, const std::string& article_id,
                                const EmbeddingVector& query, const DecisionRule& rule,
                                const std::optional<std::string>& exclude_country,
                                ClassifyDiagnostics* diag) {
    rule.validate();
    if (query.dim() != store.dim()) {
        throw InputError("query '" + article_id + "' has dimension " + std::to_string(query.dim()) +
                         ", store dimension is " + std::to_string(store.dim()));
    }
    std::vector<double> scores(store.size());
    kernels::score_rows(store.data(), store.size(), store.dim(), query.data(), scores.data());

    std::optional<std::uint32_t> exclude_ordinal;
    if (exclude_country) exclude_ordinal = store.find_country_ordinal(*exclude_country);
    return verdict_from_scores(store, article_id, scores.data(), rule, exclude_ordinal,
                               exclude_country, diag);
}

std::vector<ArticleVerdict> classify_batch(const VectorStore& store,
                                           const std::vector<std::string>& ids,
                                           const std::vector<EmbeddingVector>& queries,
                                           const DecisionRule& rule,
                                           const std::optional<std::string>& exclude_country,
                                           ClassifyDiagnostics* diag, std::size_t n_threads) {
    rule.validate();
    if (ids.size() != queries.size()) {
        throw InternalError("classify_batch: " + std::to_string(ids.size()) + " ids for " +
                            std::to_string(queries.size()) + " queries");
    }
    if (queries.empty()) return {};
    for (std::size_t i = 0; i < queries.size(); ++i) {
        if (queries[i].dim() != store.dim()) {
            throw InputError("query '" + ids[i] + "' has dimension " +
                             std::to_string(queries[i].dim()) + ", store dimension is " +
                             std::to_string(store.dim()));
        }
    }

    std::optional<std::uint32_t> exclude_ordinal;
    if (exclude_country) exclude_ordinal = store.find_country_ordinal(*exclude_country);

    const std::size_t n = queries.size();
    const std::size_t n_blocks = (n + kQueryBlock - 1) / kQueryBlock;
    std::vector<ArticleVerdict> verdicts(n);

    parallel_for(n_blocks, n_threads, [&](std::size_t block) {
        const std::size_t begin = block * kQueryBlock;
        const std::size_t end = std::min(begin + kQueryBlock, n);
        const std::size_t count = end - begin;

        std::vector<float> block_queries(count * store.dim());
        for (std::size_t j = 0; j < count; ++j) {
            std::memcpy(block_queries.data() + j * store.dim(), queries[begin + j].data(),
                        store.dim() * sizeof(float));
        }
        std::vector<double> scores(count * store.size());
        kernels::score_rows_multi(store.data(), store.size(), store.dim(), block_queries.data(),
                                  count, scores.data());
        for (std::size_t j = 0; j < count; ++j) {
            verdicts[begin + j] =
                verdict_from_scores(store, ids[begin + j], scores.data() + j * store.size(), rule,
                                    exclude_ordinal, exclude_country, diag);
        }
    });
    return verdicts;
}

CountryVerdict aggregate_country(const std::vector<ArticleVerdict>& verdicts,
                                 const std::string& country, double threshold) {
    if (verdicts.empty()) {
        throw InputError("cannot aggregate country '" + country + "' with no article verdicts");
    }
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw InputError("threshold must lie strictly between 0 and 1");
    }

    CountryVerdict out;
    out.country = country;
    out.threshold = threshold;
    out.n_articles = verdicts.size();
    for (const auto& verdict : verdicts) {
        if (verdict.predicted == PeaceLabel::Peaceful) ++out.n_peaceful;
    }
    // Integer tally, one division; the verdict compares the exact tally so
    // a 50% split at threshold 0.5 lands NonPeaceful.
    out.peace_percentage =
        static_cast<double>(out.n_peaceful) / static_cast<double>(out.n_articles);
    out.predicted = static_cast<double>(out.n_peaceful) >
                            threshold * static_cast<double>(out.n_articles)
                        ? PeaceLabel::Peaceful
                        : PeaceLabel::NonPeaceful;
    return out;
}

}  // namespace peacegrid
