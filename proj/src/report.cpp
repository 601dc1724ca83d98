#include "peacegrid/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "peacegrid/errors.hpp"

namespace peacegrid::report {

namespace {

using nlohmann::json;

std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

json metrics_to_json(const ConfusionMetrics& m) {
    json out;
    out["tp"] = m.tp;
    out["fp"] = m.fp;
    out["fn"] = m.fn;
    out["tn"] = m.tn;
    out["accuracy"] = m.accuracy;
    out["precision"] = m.precision;
    out["recall"] = m.recall;
    out["f1"] = m.f1;
    return out;
}

json fit_to_json(const RegressionFit& fit) {
    json out;
    out["slope"] = fit.slope;
    out["intercept"] = fit.intercept;
    out["pearson_r"] = fit.pearson_r;
    out["r_squared"] = fit.r_squared;
    out["n"] = fit.n;
    out["zero_variance_y"] = fit.zero_variance_y;
    return out;
}

struct Domain {
    double lo = 0.0;
    double hi = 1.0;

    double place(double v, double pixel_lo, double pixel_hi) const {
        return pixel_lo + (v - lo) / (hi - lo) * (pixel_hi - pixel_lo);
    }
};

Domain padded_domain(double lo, double hi) {
    if (lo > hi) std::swap(lo, hi);
    double pad = (hi - lo) * 0.05;
    if (pad == 0.0) pad = 0.5;
    return Domain{lo - pad, hi + pad};
}

void svg_open(std::string& svg, int width, int height) {
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
           " " + std::to_string(height) + "\">\n";
    svg += "<rect width=\"" + std::to_string(width) + "\" height=\"" + std::to_string(height) +
           "\" fill=\"white\"/>\n";
}

void svg_axes(std::string& svg, double left, double top, double right, double bottom) {
    svg += "<line x1=\"" + fixed(left, 1) + "\" y1=\"" + fixed(bottom, 1) + "\" x2=\"" +
           fixed(right, 1) + "\" y2=\"" + fixed(bottom, 1) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + fixed(left, 1) + "\" y1=\"" + fixed(top, 1) + "\" x2=\"" +
           fixed(left, 1) + "\" y2=\"" + fixed(bottom, 1) +
           "\" stroke=\"black\" stroke-width=\"1\"/>\n";
}

std::string svg_text(double x, double y, const std::string& text, int size,
                     const std::string& anchor, const std::string& fill = "black") {
    return "<text x=\"" + fixed(x, 1) + "\" y=\"" + fixed(y, 1) + "\" font-size=\"" +
           std::to_string(size) + "\" font-family=\"sans-serif\" text-anchor=\"" + anchor +
           "\" fill=\"" + fill + "\">" + text + "</text>\n";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

void write_text(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot open '" + tmp + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw InputError("failed writing '" + tmp + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        throw InputError("cannot move report into place at '" + path + "': " + ec.message());
    }
}

std::string country_verdicts_csv(const std::vector<FoldResult>& folds) {
    std::string csv = "country,n_articles,n_peaceful,peace_percentage,predicted,truth\n";
    for (const auto& fold : folds) {
        csv += fold.verdict.country + ',' + std::to_string(fold.verdict.n_articles) + ',' +
               std::to_string(fold.verdict.n_peaceful) + ',' +
               fixed(fold.verdict.peace_percentage) + ',' + to_string(fold.verdict.predicted) +
               ',' + to_string(fold.truth) + '\n';
    }
    return csv;
}

std::string metrics_json(const LoocvReport& report, const DecisionRule& rule, double threshold,
                         std::uint64_t seed, const std::optional<RegressionFit>& regression) {
    json out;
    out["country_level"] = metrics_to_json(report.country_metrics);
    out["article_level"] = metrics_to_json(report.article_metrics);
    out["diagnostics"]["k_clamped"] = report.k_clamped;
    out["diagnostics"]["knn_ties"] = report.knn_ties;
    out["rule"]["kind"] = to_string(rule.kind);
    out["rule"]["k"] = rule.k;
    out["threshold"] = threshold;
    out["seed"] = seed;

    json folds = json::array();
    for (const auto& fold : report.folds) {
        json row;
        row["country"] = fold.held_out_country;
        row["n_articles"] = fold.verdict.n_articles;
        row["n_peaceful"] = fold.verdict.n_peaceful;
        row["peace_percentage"] = fold.verdict.peace_percentage;
        row["predicted"] = to_string(fold.verdict.predicted);
        row["truth"] = to_string(fold.truth);
        row["training_rows"] = fold.training_store_size;
        row["article_accuracy"] = fold.article_accuracy;
        folds.push_back(row);
    }
    out["folds"] = folds;
    if (regression) out["regression"] = fit_to_json(*regression);
    return out.dump(2) + "\n";
}

namespace {

std::string ablation_rows(const std::vector<AblationPoint>& points, bool article_level) {
    std::string csv = "cap,total_rows,accuracy,precision,recall,f1\n";
    for (const auto& point : points) {
        const ConfusionMetrics& m = article_level ? point.article_metrics : point.metrics;
        csv += std::to_string(point.per_country_cap) + ',' +
               std::to_string(point.total_training_rows) + ',' + fixed(m.accuracy) + ',' +
               fixed(m.precision) + ',' + fixed(m.recall) + ',' + fixed(m.f1) + '\n';
    }
    return csv;
}

}  // namespace

std::string ablation_csv(const std::vector<AblationPoint>& points) {
    return ablation_rows(points, false);
}

std::string ablation_articles_csv(const std::vector<AblationPoint>& points) {
    return ablation_rows(points, true);
}

std::string scatter_svg(const std::vector<ScatterPoint>& points, const RegressionFit& fit,
                        const std::string& x_label, const std::string& y_label) {
    if (points.empty()) throw InputError("scatter plot needs at least one point");

    constexpr int kWidth = 640, kHeight = 480;
    constexpr double kLeft = 70, kRight = 620, kTop = 20, kBottom = 430;

    double x_lo = points[0].x, x_hi = points[0].x, y_lo = points[0].y, y_hi = points[0].y;
    for (const auto& point : points) {
        x_lo = std::min(x_lo, point.x);
        x_hi = std::max(x_hi, point.x);
        y_lo = std::min(y_lo, point.y);
        y_hi = std::max(y_hi, point.y);
    }
    const Domain dx = padded_domain(x_lo, x_hi);
    const Domain dy = padded_domain(y_lo, y_hi);

    std::string svg;
    svg_open(svg, kWidth, kHeight);
    svg_axes(svg, kLeft, kTop, kRight, kBottom);

    for (int t = 0; t <= 4; ++t) {
        const double fx = dx.lo + (dx.hi - dx.lo) * t / 4.0;
        const double fy = dy.lo + (dy.hi - dy.lo) * t / 4.0;
        const double px = dx.place(fx, kLeft, kRight);
        const double py = dy.place(fy, kBottom, kTop);
        svg += "<line x1=\"" + fixed(px, 1) + "\" y1=\"" + fixed(kBottom, 1) + "\" x2=\"" +
               fixed(px, 1) + "\" y2=\"" + fixed(kBottom + 4, 1) + "\" stroke=\"black\"/>\n";
        svg += svg_text(px, kBottom + 16, fixed(fx, 2), 10, "middle");
        svg += "<line x1=\"" + fixed(kLeft - 4, 1) + "\" y1=\"" + fixed(py, 1) + "\" x2=\"" +
               fixed(kLeft, 1) + "\" y2=\"" + fixed(py, 1) + "\" stroke=\"black\"/>\n";
        svg += svg_text(kLeft - 8, py + 3, fixed(fy, 2), 10, "end");
    }
    svg += svg_text((kLeft + kRight) / 2, kHeight - 14, xml_escape(x_label), 12, "middle");
    svg += "<g transform=\"translate(16," + fixed((kTop + kBottom) / 2, 1) + ") rotate(-90)\">" +
           svg_text(0, 0, xml_escape(y_label), 12, "middle") + "</g>\n";

    // Trendline y = intercept + slope * x, clipped to the vertical domain.
    {
        double tx0 = dx.lo, tx1 = dx.hi;
        double ty0 = fit.intercept + fit.slope * tx0;
        double ty1 = fit.intercept + fit.slope * tx1;
        bool draw = true;
        if (fit.slope != 0.0) {
            auto clip = [&](double& x, double& y) {
                if (y < dy.lo) {
                    x = (dy.lo - fit.intercept) / fit.slope;
                    y = dy.lo;
                } else if (y > dy.hi) {
                    x = (dy.hi - fit.intercept) / fit.slope;
                    y = dy.hi;
                }
            };
            clip(tx0, ty0);
            clip(tx1, ty1);
            draw = tx0 >= dx.lo && tx1 <= dx.hi && tx0 < tx1;
        } else {
            draw = ty0 >= dy.lo && ty0 <= dy.hi;
        }
        if (draw) {
            svg += "<line x1=\"" + fixed(dx.place(tx0, kLeft, kRight), 2) + "\" y1=\"" +
                   fixed(dy.place(ty0, kBottom, kTop), 2) + "\" x2=\"" +
                   fixed(dx.place(tx1, kLeft, kRight), 2) + "\" y2=\"" +
                   fixed(dy.place(ty1, kBottom, kTop), 2) +
                   "\" stroke=\"#d62728\" stroke-width=\"1.5\"/>\n";
        }
    }

    for (const auto& point : points) {
        svg += "<circle class=\"pt\" cx=\"" + fixed(dx.place(point.x, kLeft, kRight), 2) +
               "\" cy=\"" + fixed(dy.place(point.y, kBottom, kTop), 2) +
               "\" r=\"3.5\" fill=\"#1f77b4\"><title>" + xml_escape(point.label) +
               "</title></circle>\n";
    }

    char annotation[64];
    std::snprintf(annotation, sizeof(annotation), "R\xc2\xb2 = %.3f", fit.r_squared);
    svg += svg_text(kRight - 6, kTop + 14, annotation, 12, "end", "#d62728");
    svg += "</svg>\n";
    return svg;
}

std::string ablation_svg(const std::vector<AblationPoint>& points) {
    if (points.empty()) throw InputError("ablation plot needs at least one point");

    constexpr int kWidth = 640, kHeight = 480;
    constexpr double kLeft = 70, kRight = 620, kTop = 20, kBottom = 430;

    double lx_lo = std::log10(static_cast<double>(points.front().total_training_rows));
    double lx_hi = lx_lo;
    for (const auto& point : points) {
        const double lx = std::log10(static_cast<double>(point.total_training_rows));
        lx_lo = std::min(lx_lo, lx);
        lx_hi = std::max(lx_hi, lx);
    }
    const Domain dx = padded_domain(lx_lo, lx_hi);
    const Domain dy{-0.02, 1.02};

    std::string svg;
    svg_open(svg, kWidth, kHeight);
    svg_axes(svg, kLeft, kTop, kRight, kBottom);

    for (const auto& point : points) {
        const double px = dx.place(std::log10(static_cast<double>(point.total_training_rows)),
                                   kLeft, kRight);
        svg += "<line x1=\"" + fixed(px, 1) + "\" y1=\"" + fixed(kBottom, 1) + "\" x2=\"" +
               fixed(px, 1) + "\" y2=\"" + fixed(kBottom + 4, 1) + "\" stroke=\"black\"/>\n";
        svg += svg_text(px, kBottom + 16, std::to_string(point.total_training_rows), 9, "middle");
    }
    for (int t = 0; t <= 4; ++t) {
        const double fy = t / 4.0;
        const double py = dy.place(fy, kBottom, kTop);
        svg += "<line x1=\"" + fixed(kLeft - 4, 1) + "\" y1=\"" + fixed(py, 1) + "\" x2=\"" +
               fixed(kLeft, 1) + "\" y2=\"" + fixed(py, 1) + "\" stroke=\"black\"/>\n";
        svg += svg_text(kLeft - 8, py + 3, fixed(fy, 2), 10, "end");
    }
    svg += svg_text((kLeft + kRight) / 2, kHeight - 14, "training rows (log scale)", 12, "middle");
    svg += "<g transform=\"translate(16," + fixed((kTop + kBottom) / 2, 1) + ") rotate(-90)\">" +
           svg_text(0, 0, "metric", 12, "middle") + "</g>\n";

    struct Series {
        const char* name;
        const char* color;
        double ConfusionMetrics::* field;
    };
    const Series series[] = {
        {"accuracy", "#1f77b4", &ConfusionMetrics::accuracy},
        {"precision", "#ff7f0e", &ConfusionMetrics::precision},
        {"recall", "#2ca02c", &ConfusionMetrics::recall},
        {"f1", "#d62728", &ConfusionMetrics::f1},
    };

    for (std::size_t s = 0; s < 4; ++s) {
        std::string polyline = "<polyline fill=\"none\" stroke=\"" +
                               std::string(series[s].color) + "\" stroke-width=\"1.5\" points=\"";
        std::string markers;
        for (const auto& point : points) {
            const double px = dx.place(std::log10(static_cast<double>(point.total_training_rows)),
                                       kLeft, kRight);
            const double py = dy.place(point.metrics.*series[s].field, kBottom, kTop);
            polyline += fixed(px, 2) + ',' + fixed(py, 2) + ' ';
            markers += "<circle class=\"pt-" + std::string(series[s].name) + "\" cx=\"" +
                       fixed(px, 2) + "\" cy=\"" + fixed(py, 2) + "\" r=\"3\" fill=\"" +
                       series[s].color + "\"/>\n";
        }
        polyline.back() = '"';
        polyline += "/>\n";
        svg += polyline + markers;
        svg += "<rect x=\"" + fixed(kRight - 110, 1) + "\" y=\"" + fixed(kTop + 8 + 16.0 * s, 1) +
               "\" width=\"10\" height=\"10\" fill=\"" + series[s].color + "\"/>\n";
        svg += svg_text(kRight - 96, kTop + 17 + 16.0 * s, series[s].name, 11, "start");
    }
    svg += "</svg>\n";
    return svg;
}

std::string fit_json(const RegressionFit& fit) { return fit_to_json(fit).dump(2) + "\n"; }

std::string summary_json(const CorpusSummary& summary) {
    json out;
    json countries = json::object();
    for (const auto& [country, count] : summary.articles_per_country) {
        countries[country]["articles"] = count;
        countries[country]["words"] = summary.words_per_country.at(country);
    }
    out["countries"] = countries;
    out["n_countries"] = summary.articles_per_country.size();
    out["mean_articles"] = summary.mean_articles;
    out["std_articles"] = summary.std_articles;
    out["mean_words"] = summary.mean_words;
    out["std_words"] = summary.std_words;
    return out.dump(2) + "\n";
}

}  // namespace peacegrid::report
