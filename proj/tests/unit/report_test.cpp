#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "peacegrid/errors.hpp"
#include "peacegrid/eval.hpp"
#include "peacegrid/report.hpp"

using namespace peacegrid;
using nlohmann::json;

namespace {

FoldResult make_fold(const std::string& country, std::size_t n_articles, std::size_t n_peaceful,
                     PeaceLabel truth) {
    FoldResult fold;
    fold.held_out_country = country;
    fold.verdict.country = country;
    fold.verdict.n_articles = n_articles;
    fold.verdict.n_peaceful = n_peaceful;
    fold.verdict.peace_percentage = double(n_peaceful) / double(n_articles);
    fold.verdict.predicted = 2 * n_peaceful > n_articles ? PeaceLabel::Peaceful
                                                         : PeaceLabel::NonPeaceful;
    fold.verdict.threshold = 0.5;
    fold.truth = truth;
    fold.training_store_size = 10;
    fold.article_accuracy = 0.75;
    return fold;
}

LoocvReport small_report() {
    LoocvReport report;
    report.folds.push_back(make_fold("Atlantis", 100, 76, PeaceLabel::Peaceful));
    report.folds.push_back(make_fold("Mordor", 100, 11, PeaceLabel::NonPeaceful));
    report.country_metrics = confusion_metrics({PeaceLabel::Peaceful, PeaceLabel::NonPeaceful},
                                               {PeaceLabel::Peaceful, PeaceLabel::NonPeaceful});
    report.article_metrics = report.country_metrics;
    report.k_clamped = 3;
    report.knn_ties = 1;
    return report;
}

std::vector<AblationPoint> sample_points() {
    std::vector<AblationPoint> points;
    double acc = 1.0;
    for (std::size_t cap : {8, 4, 2, 1}) {
        AblationPoint p;
        p.per_country_cap = cap;
        p.total_training_rows = cap * 5;
        p.metrics.accuracy = acc;
        p.metrics.precision = acc;
        p.metrics.recall = 1.0;
        p.metrics.f1 = acc;
        p.article_metrics = p.metrics;
        acc -= 0.125;
        points.push_back(p);
    }
    return points;
}

// All cx attribute values for circles of the given class, in order.
std::vector<double> marker_xs(const std::string& svg, const std::string& cls) {
    std::vector<double> xs;
    const std::string needle = "class=\"" + cls + "\" cx=\"";
    std::size_t at = 0;
    while ((at = svg.find(needle, at)) != std::string::npos) {
        at += needle.size();
        xs.push_back(std::stod(svg.substr(at)));
    }
    return xs;
}

}  // namespace

TEST_CASE("write_text lands atomically with no temp residue") {
    oracle::TempDir dir("report");
    const std::string path = dir.file("out.txt");
    report::write_text(path, "first\n");
    CHECK(oracle::read_file(path) == "first\n");
    CHECK(!std::filesystem::exists(path + ".tmp"));

    report::write_text(path, "second\n");
    CHECK(oracle::read_file(path) == "second\n");

    CHECK_THROWS_AS(report::write_text(dir.path() + "/no/such/dir/x.txt", "y"), InputError);
}

TEST_CASE("country verdict rows print exact golden lines") {
    const std::string csv = report::country_verdicts_csv(small_report().folds);
    CHECK(csv ==
          "country,n_articles,n_peaceful,peace_percentage,predicted,truth\n"
          "Atlantis,100,76,0.760000,peaceful,peaceful\n"
          "Mordor,100,11,0.110000,non-peaceful,non-peaceful\n");
}

TEST_CASE("metrics_json is parseable with lexicographic keys") {
    RegressionFit fit = linear_fit({{0.1, 0.2}, {0.5, 0.6}, {0.9, 0.8}});
    const std::string text = report::metrics_json(small_report(), DecisionRule{}, 0.5, 42, fit);
    CHECK(text.back() == '\n');

    const json doc = json::parse(text);
    CHECK(doc["country_level"]["tp"] == 1);
    CHECK(doc["country_level"]["tn"] == 1);
    CHECK(doc["country_level"]["accuracy"] == 1.0);
    CHECK(doc["diagnostics"]["k_clamped"] == 3);
    CHECK(doc["diagnostics"]["knn_ties"] == 1);
    CHECK(doc["rule"]["kind"] == "knn_majority");
    CHECK(doc["rule"]["k"] == 25);
    CHECK(doc["threshold"] == 0.5);
    CHECK(doc["seed"] == 42);
    REQUIRE(doc["folds"].size() == 2);
    CHECK(doc["folds"][0]["country"] == "Atlantis");
    CHECK(doc["folds"][0]["peace_percentage"] == 0.76);
    CHECK(doc["folds"][0]["training_rows"] == 10);
    CHECK(doc["folds"][1]["predicted"] == "non-peaceful");
    CHECK(doc["regression"]["r_squared"] == doctest::Approx(fit.r_squared));

    // Stable output: objects serialize keys in sorted order.
    CHECK(text.find("\"article_level\"") < text.find("\"country_level\""));
    CHECK(text.find("\"country_level\"") < text.find("\"diagnostics\""));
    CHECK(text.find("\"diagnostics\"") < text.find("\"folds\""));

    const std::string without =
        report::metrics_json(small_report(), DecisionRule{}, 0.5, 42, std::nullopt);
    CHECK(json::parse(without).contains("regression") == false);
}

TEST_CASE("ablation tables emit one row per cap at both granularities") {
    const auto points = sample_points();
    CHECK(report::ablation_csv(points) ==
          "cap,total_rows,accuracy,precision,recall,f1\n"
          "8,40,1.000000,1.000000,1.000000,1.000000\n"
          "4,20,0.875000,0.875000,1.000000,0.875000\n"
          "2,10,0.750000,0.750000,1.000000,0.750000\n"
          "1,5,0.625000,0.625000,1.000000,0.625000\n");
    CHECK(report::ablation_articles_csv(points) == report::ablation_csv(points));
}

TEST_CASE("fit_json and summary_json round-trip through a parser") {
    const RegressionFit fit = linear_fit({{1, 2}, {2, 4}, {3, 6}});
    const json parsed = json::parse(report::fit_json(fit));
    CHECK(parsed["slope"] == doctest::Approx(2.0));
    CHECK(parsed["r_squared"] == doctest::Approx(1.0));
    CHECK(parsed["n"] == 3);
    CHECK(parsed["zero_variance_y"] == false);

    CorpusSummary summary;
    summary.articles_per_country = {{"X", 2}, {"Y", 4}};
    summary.words_per_country = {{"X", 100}, {"Y", 300}};
    summary.mean_articles = 3.0;
    summary.std_articles = 1.0;
    summary.mean_words = 200.0;
    summary.std_words = 100.0;
    const json s = json::parse(report::summary_json(summary));
    CHECK(s["n_countries"] == 2);
    CHECK(s["countries"]["X"]["articles"] == 2);
    CHECK(s["countries"]["Y"]["words"] == 300);
    CHECK(s["mean_articles"] == 3.0);
}

TEST_CASE("scatter_svg draws every point and annotates the fit") {
    std::vector<report::ScatterPoint> points = {
        {"Alpha & Co", 0.2, 0.5},
        {"Beta<1>", 0.5, 0.7},
        {"Gamma", 0.8, 0.9},
    };
    const RegressionFit fit = linear_fit({{0.2, 0.5}, {0.5, 0.7}, {0.8, 0.9}});
    const std::string svg = report::scatter_svg(points, fit, "peace share", "index");

    CHECK(svg.find("<svg ") == 0);
    CHECK(svg.find("R\xc2\xb2 = 1.000") != std::string::npos);
    CHECK(svg.find("peace share") != std::string::npos);

    std::size_t circles = 0, at = 0;
    while ((at = svg.find("<circle class=\"pt\"", at)) != std::string::npos) {
        ++circles;
        ++at;
    }
    CHECK(circles == 3);

    // Labels pass through XML escaping into hover titles.
    CHECK(svg.find("<title>Alpha &amp; Co</title>") != std::string::npos);
    CHECK(svg.find("<title>Beta&lt;1&gt;</title>") != std::string::npos);
    CHECK(svg.find("Beta<1>") == std::string::npos);

    CHECK_THROWS_AS(report::scatter_svg({}, fit, "x", "y"), InputError);
}

TEST_CASE("ablation_svg places markers affinely in log10 of training rows") {
    const auto points = sample_points();
    const std::string svg = report::ablation_svg(points);

    for (const char* cls : {"pt-accuracy", "pt-precision", "pt-recall", "pt-f1"}) {
        CHECK(marker_xs(svg, cls).size() == 4);
    }
    CHECK(svg.find("training rows (log scale)") != std::string::npos);

    // total_rows 40, 20, 10, 5 are log-equidistant, so the marker x
    // positions must be equally spaced.
    const auto xs = marker_xs(svg, "pt-accuracy");
    REQUIRE(xs.size() == 4);
    const double step = xs[1] - xs[0];
    CHECK(step < 0.0);  // larger corpora sit to the right, points walk left
    CHECK(xs[2] - xs[1] == doctest::Approx(step).epsilon(1e-3));
    CHECK(xs[3] - xs[2] == doctest::Approx(step).epsilon(1e-3));

    CHECK_THROWS_AS(report::ablation_svg({}), InputError);
}
