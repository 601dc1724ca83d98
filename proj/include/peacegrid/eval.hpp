#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "peacegrid/classify.hpp"
#include "peacegrid/corpus.hpp"
#include "peacegrid/vstore.hpp"

namespace peacegrid {

struct ConfusionMetrics {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
};

// Positive class is Peaceful. Degenerate denominators yield 0 by convention.
ConfusionMetrics confusion_metrics(const std::vector<PeaceLabel>& predicted,
                                   const std::vector<PeaceLabel>& truth);

struct FoldResult {
    std::string held_out_country;
    CountryVerdict verdict;
    PeaceLabel truth = PeaceLabel::NonPeaceful;
    std::size_t training_store_size = 0;
    std::vector<std::string> training_countries;  // ascending, never the held-out one
    double article_accuracy = 0.0;  // held-out articles predicted == truth
};

struct LoocvReport {
    std::vector<FoldResult> folds;  // held-out country ascending
    ConfusionMetrics country_metrics;
    ConfusionMetrics article_metrics;
    std::size_t k_clamped = 0;
    std::size_t knn_ties = 0;
};

// One fold per country: the fold's training store is a balanced sample of
// every other country's articles, seeded with seed ^ fnv1a64(country).
// `cap` additionally caps the per-country sample (used by the ablation).
// After sampling, the majority class is thinned (evenly across its
// countries) to the minority class's row count, so the class prior cannot
// decide votes on its own.
LoocvReport loocv(const std::vector<EmbeddedArticle>& corpus, const LabelTable& labels,
                  const DecisionRule& rule, double threshold, std::uint64_t seed,
                  std::optional<std::size_t> cap = std::nullopt, std::size_t n_threads = 1);

// [min_count, floor(min_count/2), ...] down to 1.
std::vector<std::size_t> halving_schedule(std::size_t min_count);

struct AblationPoint {
    std::size_t per_country_cap = 0;
    std::size_t total_training_rows = 0;
    ConfusionMetrics metrics;          // country level
    ConfusionMetrics article_metrics;  // per-article diagnostics
};

std::vector<AblationPoint> ablation(const std::vector<EmbeddedArticle>& corpus,
                                    const LabelTable& labels, const DecisionRule& rule,
                                    double threshold, std::uint64_t seed,
                                    std::size_t n_threads = 1);

struct RegressionFit {
    double slope = 0.0;
    double intercept = 0.0;
    double pearson_r = 0.0;
    double r_squared = 0.0;
    std::size_t n = 0;
    bool zero_variance_y = false;
};

// Ordinary least squares of y on x. All x equal is an error; all y equal
// fits a flat line with r defined as 0 and the warning flag set.
RegressionFit linear_fit(const std::vector<std::pair<double, double>>& points);

}  // namespace peacegrid
