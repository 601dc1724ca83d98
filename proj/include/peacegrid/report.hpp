#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "peacegrid/classify.hpp"
#include "peacegrid/corpus.hpp"
#include "peacegrid/eval.hpp"

namespace peacegrid::report {

// Writes to a temp name in the same directory, then renames into place, so
// a crash never leaves a partial report. Content must already be final.
void write_text(const std::string& path, const std::string& content);

std::string country_verdicts_csv(const std::vector<FoldResult>& folds);

std::string metrics_json(const LoocvReport& report, const DecisionRule& rule, double threshold,
                         std::uint64_t seed, const std::optional<RegressionFit>& regression);

std::string ablation_csv(const std::vector<AblationPoint>& points);
// Same columns at article granularity.
std::string ablation_articles_csv(const std::vector<AblationPoint>& points);

struct ScatterPoint {
    std::string label;
    double x = 0.0;
    double y = 0.0;
};

// Scatter with least-squares trendline and an R-squared annotation.
std::string scatter_svg(const std::vector<ScatterPoint>& points, const RegressionFit& fit,
                        const std::string& x_label, const std::string& y_label);

// Four metric curves against total training rows on a log10 x axis. Each
// point carries class "pt-<metric>" so tests can read positions back.
std::string ablation_svg(const std::vector<AblationPoint>& points);

std::string fit_json(const RegressionFit& fit);
std::string summary_json(const CorpusSummary& summary);

}  // namespace peacegrid::report
