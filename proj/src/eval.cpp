#include "peacegrid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "peacegrid/errors.hpp"
#include "peacegrid/rng.hpp"

namespace peacegrid {

namespace {

// A fold's training classes must carry equal weight: with a skewed class
// prior, zero-signal votes track the majority class, which under
// leave-one-out is always the class the held-out country is not in.
VectorStore equalize_class_totals(const VectorStore& store, std::uint64_t seed) {
    std::size_t n_peaceful = 0;
    for (std::size_t i = 0; i < store.size(); ++i) {
        if (store.label(i) == PeaceLabel::Peaceful) ++n_peaceful;
    }
    const std::size_t n_nonpeaceful = store.size() - n_peaceful;
    if (n_peaceful == 0 || n_nonpeaceful == 0 || n_peaceful == n_nonpeaceful) return store;

    const PeaceLabel majority =
        n_peaceful > n_nonpeaceful ? PeaceLabel::Peaceful : PeaceLabel::NonPeaceful;
    std::size_t excess = n_peaceful > n_nonpeaceful ? n_peaceful - n_nonpeaceful
                                                    : n_nonpeaceful - n_peaceful;

    // Majority-class rows per country; country_index is ordered, so the
    // round-robin walk below is deterministic.
    std::vector<std::vector<std::size_t>> pools;
    for (const auto& [country, positions] : store.country_index()) {
        std::vector<std::size_t> pool;
        for (std::size_t pos : positions) {
            if (store.label(pos) == majority) pool.push_back(pos);
        }
        if (!pool.empty()) pools.push_back(std::move(pool));
    }

    // Round-robin across countries spreads the drops evenly (within one row);
    // the victim inside a country comes from the seeded stream.
    SplitMix64 rng(mix64(seed));
    std::vector<bool> dropped(store.size(), false);
    std::size_t cursor = 0;
    while (excess > 0) {
        auto& pool = pools[cursor % pools.size()];
        ++cursor;
        if (pool.empty()) continue;
        const std::size_t pick = rng.bounded(pool.size());
        dropped[pool[pick]] = true;
        pool[pick] = pool.back();
        pool.pop_back();
        --excess;
    }

    std::vector<EmbeddedArticle> kept;
    kept.reserve(2 * std::min(n_peaceful, n_nonpeaceful));
    for (std::size_t i = 0; i < store.size(); ++i) {
        if (!dropped[i]) kept.push_back(store.record(i));
    }
    return build_store(kept);
}

}  // namespace

ConfusionMetrics confusion_metrics(const std::vector<PeaceLabel>& predicted,
                                   const std::vector<PeaceLabel>& truth) {
    if (predicted.size() != truth.size()) {
        throw InputError("confusion metrics need equal-length label lists, got " +
                         std::to_string(predicted.size()) + " and " +
                         std::to_string(truth.size()));
    }
    if (predicted.empty()) throw InputError("confusion metrics need at least one label pair");

    ConfusionMetrics m;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool pred_p = predicted[i] == PeaceLabel::Peaceful;
        const bool true_p = truth[i] == PeaceLabel::Peaceful;
        if (pred_p && true_p)
            ++m.tp;
        else if (pred_p && !true_p)
            ++m.fp;
        else if (!pred_p && true_p)
            ++m.fn;
        else
            ++m.tn;
    }
    const double total = static_cast<double>(m.tp + m.fp + m.fn + m.tn);
    m.accuracy = static_cast<double>(m.tp + m.tn) / total;
    m.precision = (m.tp + m.fp) == 0 ? 0.0
                                     : static_cast<double>(m.tp) /
                                           static_cast<double>(m.tp + m.fp);
    m.recall = (m.tp + m.fn) == 0 ? 0.0
                                  : static_cast<double>(m.tp) /
                                        static_cast<double>(m.tp + m.fn);
    m.f1 = (m.precision + m.recall) == 0.0 ? 0.0
                                           : 2.0 * m.precision * m.recall /
                                                 (m.precision + m.recall);
    return m;
}

LoocvReport loocv(const std::vector<EmbeddedArticle>& corpus, const LabelTable& labels,
                  const DecisionRule& rule, double threshold, std::uint64_t seed,
                  std::optional<std::size_t> cap, std::size_t n_threads) {
    rule.validate();
    if (corpus.empty()) throw InputError("cross-validation needs a non-empty corpus");

    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < corpus.size(); ++i) groups[corpus[i].country].push_back(i);
    if (groups.size() < 2) {
        throw InputError("cross-validation needs at least 2 countries, got " +
                         std::to_string(groups.size()));
    }
    for (const auto& [country, group] : groups) labels.require(country);
    for (const auto& [country, entry] : labels.entries) {
        if (!groups.count(country)) {
            throw InputError("country '" + country + "' has zero articles");
        }
    }

    LoocvReport report;
    ClassifyDiagnostics diag;
    std::vector<PeaceLabel> country_predicted, country_truth;
    std::vector<PeaceLabel> article_predicted, article_truth;

    for (const auto& [held_out, held_indices] : groups) {
        const PeaceLabel truth = labels.require(held_out).peace_label;

        std::vector<EmbeddedArticle> training;
        training.reserve(corpus.size() - held_indices.size());
        for (const auto& article : corpus) {
            if (article.country != held_out) training.push_back(article);
        }
        const std::uint64_t fold_seed = seed ^ fnv1a64(held_out);
        const VectorStore training_store = equalize_class_totals(
            balanced_sample(build_store(training), fold_seed, cap), fold_seed);

        std::vector<std::string> ids;
        std::vector<EmbeddingVector> queries;
        ids.reserve(held_indices.size());
        queries.reserve(held_indices.size());
        for (std::size_t i : held_indices) {
            ids.push_back(corpus[i].id);
            queries.push_back(corpus[i].vector);
        }

        const auto verdicts =
            classify_batch(training_store, ids, queries, rule, std::nullopt, &diag, n_threads);

        FoldResult fold;
        fold.held_out_country = held_out;
        fold.verdict = aggregate_country(verdicts, held_out, threshold);
        fold.truth = truth;
        fold.training_store_size = training_store.size();
        for (const auto& entry : training_store.country_index())
            fold.training_countries.push_back(entry.first);

        std::size_t correct = 0;
        for (const auto& verdict : verdicts) {
            article_predicted.push_back(verdict.predicted);
            article_truth.push_back(truth);
            if (verdict.predicted == truth) ++correct;
        }
        fold.article_accuracy = static_cast<double>(correct) /
                                static_cast<double>(verdicts.size());

        country_predicted.push_back(fold.verdict.predicted);
        country_truth.push_back(truth);
        report.folds.push_back(std::move(fold));
    }

    report.country_metrics = confusion_metrics(country_predicted, country_truth);
    report.article_metrics = confusion_metrics(article_predicted, article_truth);
    report.k_clamped = diag.k_clamped.load();
    report.knn_ties = diag.ties.load();
    return report;
}

std::vector<std::size_t> halving_schedule(std::size_t min_count) {
    if (min_count == 0) throw InputError("halving schedule needs a positive starting count");
    std::vector<std::size_t> caps;
    for (std::size_t v = min_count; v >= 1; v /= 2) caps.push_back(v);
    return caps;
}

std::vector<AblationPoint> ablation(const std::vector<EmbeddedArticle>& corpus,
                                    const LabelTable& labels, const DecisionRule& rule,
                                    double threshold, std::uint64_t seed,
                                    std::size_t n_threads) {
    if (corpus.empty()) throw InputError("ablation needs a non-empty corpus");

    std::map<std::string, std::size_t> counts;
    for (const auto& article : corpus) ++counts[article.country];
    std::size_t min_count = corpus.size();
    for (const auto& [country, count] : counts) min_count = std::min(min_count, count);

    std::vector<AblationPoint> points;
    for (std::size_t cap : halving_schedule(min_count)) {
        const LoocvReport run = loocv(corpus, labels, rule, threshold, seed, cap, n_threads);
        AblationPoint point;
        point.per_country_cap = cap;
        point.total_training_rows = cap * (counts.size() - 1);
        point.metrics = run.country_metrics;
        point.article_metrics = run.article_metrics;
        points.push_back(point);
    }
    return points;
}

RegressionFit linear_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 2) {
        throw InputError("linear fit needs at least 2 points, got " +
                         std::to_string(points.size()));
    }
    const auto [x_min, x_max] = std::minmax_element(
        points.begin(), points.end(),
        [](const auto& a, const auto& b) { return a.first < b.first; });
    if (x_min->first == x_max->first) throw InputError("degenerate x: all x values are equal");
    bool y_all_equal = true;
    for (const auto& [x, y] : points) {
        if (y != points.front().second) {
            y_all_equal = false;
            break;
        }
    }

    long double mean_x = 0.0L, mean_y = 0.0L;
    for (const auto& [x, y] : points) {
        mean_x += x;
        mean_y += y;
    }
    const auto n = static_cast<long double>(points.size());
    mean_x /= n;
    mean_y /= n;

    long double sxx = 0.0L, sxy = 0.0L, syy = 0.0L;
    for (const auto& [x, y] : points) {
        const long double dx = x - mean_x;
        const long double dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx == 0.0L) throw InputError("degenerate x: all x values are equal");

    RegressionFit fit;
    fit.n = points.size();
    fit.slope = static_cast<double>(sxy / sxx);
    fit.intercept = static_cast<double>(mean_y - (sxy / sxx) * mean_x);
    if (y_all_equal || syy == 0.0L) {
        fit.pearson_r = 0.0;
        fit.r_squared = 0.0;
        fit.zero_variance_y = true;
    } else {
        // Clamp rounding spill so r stays in [-1, 1] and r^2 in [0, 1].
        long double r = sxy / std::sqrt(sxx * syy);
        r = std::min(1.0L, std::max(-1.0L, r));
        fit.pearson_r = static_cast<double>(r);
        fit.r_squared = static_cast<double>(r * r);
    }
    return fit;
}

}  // namespace peacegrid
