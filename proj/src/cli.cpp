#include "peacegrid/cli.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "peacegrid/corpus.hpp"
#include "peacegrid/errors.hpp"
#include "peacegrid/eval.hpp"
#include "peacegrid/parallel.hpp"
#include "peacegrid/remote.hpp"
#include "peacegrid/report.hpp"
#include "peacegrid/synth.hpp"
#include "peacegrid/vstore.hpp"

namespace peacegrid {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// CSV as header-keyed rows; every row must match the header width.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name, const std::string& path) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw InputError("file " + path + " has no '" + name + "' column");
    }
};

CsvTable load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path);
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (table.header.empty()) {
            for (auto& f : fields) {
                for (char& c : f) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            }
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw InputError("file " + path + " line " + std::to_string(line_no) + ": expected " +
                             std::to_string(table.header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
    }
    if (table.header.empty()) throw InputError("file is empty: " + path);
    return table;
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw InputError("bad " + what + " value \"" + s + "\"");
    }
}

std::size_t parse_count(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(s, &used);
        if (used != s.size() || v < 0) throw std::invalid_argument(s);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw InputError("bad " + what + " value \"" + s + "\"");
    }
}

void require_keys(const json& obj, std::initializer_list<const char*> allowed,
                  const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* name : allowed) {
            if (key == name) {
                ok = true;
                break;
            }
        }
        if (!ok) throw InputError("unknown config key '" + where + key + "'");
    }
}

void apply_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw InputError("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!doc.is_object()) throw InputError("config file " + path + " must hold a JSON object");
    require_keys(doc, {"embedder", "rule", "threshold", "seed", "endpoint", "threads", "paths"},
                 "");

    if (doc.contains("embedder")) {
        const auto& e = doc["embedder"];
        require_keys(e, {"kind", "dim", "model", "batch_size", "max_retries", "max_in_flight",
                         "seed"},
                     "embedder.");
        if (e.contains("kind")) {
            const auto kind = e["kind"].get<std::string>();
            if (kind == "hashing")
                cfg.embedder.kind = EmbedderKind::Hashing;
            else if (kind == "remote")
                cfg.embedder.kind = EmbedderKind::Remote;
            else
                throw InputError("unknown embedder kind '" + kind + "'");
        }
        if (e.contains("dim")) cfg.embedder.dim = e["dim"].get<std::size_t>();
        if (e.contains("model")) cfg.embedder.model_name = e["model"].get<std::string>();
        if (e.contains("batch_size")) cfg.embedder.batch_size = e["batch_size"].get<std::size_t>();
        if (e.contains("max_retries"))
            cfg.embedder.max_retries = e["max_retries"].get<std::size_t>();
        if (e.contains("max_in_flight"))
            cfg.embedder.max_in_flight = e["max_in_flight"].get<std::size_t>();
        if (e.contains("seed")) cfg.embedder.seed = e["seed"].get<std::uint64_t>();
    }
    if (doc.contains("rule")) {
        const auto& r = doc["rule"];
        require_keys(r, {"kind", "k"}, "rule.");
        if (r.contains("kind")) cfg.rule.kind = parse_rule_kind(r["kind"].get<std::string>());
        if (r.contains("k")) cfg.rule.k = r["k"].get<std::size_t>();
    }
    if (doc.contains("threshold")) cfg.threshold = doc["threshold"].get<double>();
    if (doc.contains("seed")) cfg.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("endpoint")) cfg.endpoint = doc["endpoint"].get<std::string>();
    if (doc.contains("threads")) cfg.n_threads = doc["threads"].get<std::size_t>();
    if (doc.contains("paths")) {
        const auto& p = doc["paths"];
        require_keys(p, {"articles", "labels", "store", "out"}, "paths.");
        if (p.contains("articles")) cfg.articles_path = p["articles"].get<std::string>();
        if (p.contains("labels")) cfg.labels_path = p["labels"].get<std::string>();
        if (p.contains("store")) cfg.store_path = p["store"].get<std::string>();
        if (p.contains("out")) cfg.out_dir = p["out"].get<std::string>();
    }
}

void check_threshold(double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0)) {
        throw InputError("threshold must lie strictly between 0 and 1");
    }
}

std::string labels_csv(const LabelTable& labels) {
    std::string csv = "country,peace_label,index_value\n";
    for (const auto& [country, entry] : labels.entries) {
        char value[32] = "";
        if (entry.index_value) std::snprintf(value, sizeof(value), "%.6f", *entry.index_value);
        csv += country + ',' + to_string(entry.peace_label) + ',' + value + '\n';
    }
    return csv;
}

// ---- subcommands ----

int cmd_ingest(const RunConfig& cfg) {
    const ArticleSet articles = load_articles(cfg.articles_path);
    const LabelTable labels = load_country_labels(cfg.labels_path);
    const CorpusSummary summary = summarize(articles);
    for (const auto& [country, _] : summary.articles_per_country) labels.require(country);
    std::cout << report::summary_json(summary);
    return 0;
}

int cmd_embed(const RunConfig& cfg) {
    cfg.embedder.validate();
    const ArticleSet articles = load_articles(cfg.articles_path);
    if (articles.empty()) throw InputError("articles file has no records: " + cfg.articles_path);
    const LabelTable labels = load_country_labels(cfg.labels_path);
    for (const Article& article : articles) labels.require(article.country);

    std::vector<EmbeddingVector> vectors(articles.size());
    if (cfg.embedder.kind == EmbedderKind::Hashing) {
        parallel_for(articles.size(), cfg.n_threads,
                     [&](std::size_t i) { vectors[i] = embed_hash(articles[i].text, cfg.embedder); });
    } else {
        const char* credential = std::getenv("PEACEGRID_API_KEY");
        if (credential == nullptr || *credential == '\0') {
            throw InputError("missing credential: set the PEACEGRID_API_KEY environment variable");
        }
        std::vector<std::string> texts;
        texts.reserve(articles.size());
        for (const Article& article : articles) texts.push_back(article.text);
        RemoteStats stats;
        vectors = embed_remote(texts, cfg.embedder, cfg.endpoint, credential, &stats);
        std::cerr << "embedding service: " << stats.batches << " batches, " << stats.retries
                  << " retries\n";
    }

    std::vector<EmbeddedArticle> items;
    items.reserve(articles.size());
    for (std::size_t i = 0; i < articles.size(); ++i) {
        EmbeddedArticle item;
        item.id = articles[i].id;
        item.country = articles[i].country;
        item.peace_label = labels.require(articles[i].country).peace_label;
        item.vector = std::move(vectors[i]);
        items.push_back(std::move(item));
    }
    const VectorStore store = build_store(items);
    save_store(store, cfg.store_path);
    std::cerr << "wrote store " << cfg.store_path << " (" << store.size() << " records, dim "
              << store.dim() << ")\n";
    return 0;
}

LoocvReport fixture_report(const std::string& path, const LabelTable& labels, double threshold) {
    const CsvTable table = load_csv(path);
    const std::size_t col_country = table.column("country", path);
    const std::size_t col_articles = table.column("n_articles", path);
    const std::size_t col_peaceful = table.column("n_peaceful", path);

    std::map<std::string, std::pair<std::size_t, std::size_t>> rows;
    for (const auto& row : table.rows) {
        const std::string& country = row[col_country];
        const std::size_t n_articles = parse_count(row[col_articles], "n_articles");
        const std::size_t n_peaceful = parse_count(row[col_peaceful], "n_peaceful");
        if (n_articles == 0) throw InputError("country '" + country + "' has zero articles");
        if (n_peaceful > n_articles) {
            throw InputError("country '" + country + "' has n_peaceful > n_articles");
        }
        if (!rows.emplace(country, std::make_pair(n_articles, n_peaceful)).second) {
            throw InputError("duplicate country '" + country + "' in " + path);
        }
    }
    if (rows.empty()) throw InputError("no data rows in " + path);

    LoocvReport report;
    std::vector<PeaceLabel> country_predicted, country_truth;
    std::vector<PeaceLabel> article_predicted, article_truth;
    for (const auto& [country, counts] : rows) {
        const auto [n_articles, n_peaceful] = counts;
        const PeaceLabel truth = labels.require(country).peace_label;

        // Expand the tally into article verdicts so the aggregation path is
        // the same one the live classifier feeds.
        std::vector<ArticleVerdict> verdicts(n_articles);
        for (std::size_t i = 0; i < n_articles; ++i) {
            verdicts[i].article_id = country + "-a" + std::to_string(i);
            verdicts[i].predicted =
                i < n_peaceful ? PeaceLabel::Peaceful : PeaceLabel::NonPeaceful;
            article_predicted.push_back(verdicts[i].predicted);
            article_truth.push_back(truth);
        }

        FoldResult fold;
        fold.held_out_country = country;
        fold.verdict = aggregate_country(verdicts, country, threshold);
        fold.truth = truth;
        fold.training_store_size = 0;
        std::size_t correct = truth == PeaceLabel::Peaceful ? n_peaceful
                                                            : n_articles - n_peaceful;
        fold.article_accuracy = static_cast<double>(correct) / static_cast<double>(n_articles);
        country_predicted.push_back(fold.verdict.predicted);
        country_truth.push_back(truth);
        report.folds.push_back(std::move(fold));
    }
    report.country_metrics = confusion_metrics(country_predicted, country_truth);
    report.article_metrics = confusion_metrics(article_predicted, article_truth);
    return report;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& fixture_path) {
    check_threshold(cfg.threshold);
    cfg.rule.validate();
    const LabelTable labels = load_country_labels(cfg.labels_path);

    LoocvReport result;
    if (!fixture_path.empty()) {
        result = fixture_report(fixture_path, labels, cfg.threshold);
    } else {
        const VectorStore store = load_store(cfg.store_path);
        result = loocv(store.all_records(), labels, cfg.rule, cfg.threshold, cfg.seed,
                       std::nullopt, cfg.n_threads);
    }

    std::filesystem::create_directories(cfg.out_dir);

    std::optional<RegressionFit> regression;
    std::vector<report::ScatterPoint> scatter;
    std::vector<std::pair<double, double>> fit_points;
    for (const auto& fold : result.folds) {
        const auto& entry = labels.require(fold.held_out_country);
        if (!entry.index_value) continue;
        scatter.push_back(report::ScatterPoint{fold.held_out_country,
                                               fold.verdict.peace_percentage, *entry.index_value});
        fit_points.emplace_back(fold.verdict.peace_percentage, *entry.index_value);
    }
    if (fit_points.size() >= 2) {
        regression = linear_fit(fit_points);
        report::write_text(cfg.out_dir + "/peace_scatter.svg",
                           report::scatter_svg(scatter, *regression, "peace percentage",
                                               "country index"));
    }

    report::write_text(cfg.out_dir + "/country_verdicts.csv",
                       report::country_verdicts_csv(result.folds));
    report::write_text(cfg.out_dir + "/metrics.json",
                       report::metrics_json(result, cfg.rule, cfg.threshold, cfg.seed, regression));
    std::cerr << "evaluation: " << result.folds.size() << " folds, country accuracy "
              << result.country_metrics.accuracy << "\n";
    return 0;
}

int cmd_ablate(const RunConfig& cfg) {
    check_threshold(cfg.threshold);
    cfg.rule.validate();
    const LabelTable labels = load_country_labels(cfg.labels_path);
    const VectorStore store = load_store(cfg.store_path);

    const auto points =
        ablation(store.all_records(), labels, cfg.rule, cfg.threshold, cfg.seed, cfg.n_threads);

    std::filesystem::create_directories(cfg.out_dir);
    report::write_text(cfg.out_dir + "/ablation.csv", report::ablation_csv(points));
    report::write_text(cfg.out_dir + "/ablation_articles.csv",
                       report::ablation_articles_csv(points));
    report::write_text(cfg.out_dir + "/ablation.svg", report::ablation_svg(points));
    std::cerr << "ablation: " << points.size() << " caps from " << points.front().per_country_cap
              << " down to " << points.back().per_country_cap << "\n";
    return 0;
}

int cmd_correlate(const std::string& verdicts_path, const std::string& index_path) {
    const CsvTable verdicts = load_csv(verdicts_path);
    const std::size_t col_country = verdicts.column("country", verdicts_path);
    const std::size_t col_pct = verdicts.column("peace_percentage", verdicts_path);

    std::map<std::string, double> percentages;
    for (const auto& row : verdicts.rows) {
        if (!percentages.emplace(row[col_country], parse_double(row[col_pct], "peace_percentage"))
                 .second) {
            throw InputError("duplicate country '" + row[col_country] + "' in " + verdicts_path);
        }
    }

    const CsvTable index = load_csv(index_path);
    const std::size_t idx_country = index.column("country", index_path);
    const std::size_t idx_value = index.column("index_value", index_path);
    std::map<std::string, double> index_values;
    for (const auto& row : index.rows) {
        if (row[idx_value].empty()) continue;
        index_values[row[idx_country]] = parse_double(row[idx_value], "index_value");
    }

    std::vector<std::pair<double, double>> points;
    for (const auto& [country, pct] : percentages) {
        auto it = index_values.find(country);
        if (it == index_values.end()) {
            throw InputError("no index value for country '" + country + "' in " + index_path);
        }
        points.emplace_back(pct, it->second);
    }
    std::cout << report::fit_json(linear_fit(points));
    return 0;
}

int cmd_synth(const SynthParams& params, const std::string& articles_out,
              const std::string& labels_out, const std::string& store_out) {
    if (labels_out.empty()) throw InputError("synth needs --labels-out");
    if (params.mode == SynthMode::Texts) {
        if (articles_out.empty()) throw InputError("text synthesis needs --articles-out");
        const TextCorpus corpus = generate_texts(params);
        std::string lines;
        for (const Article& article : corpus.articles) {
            json rec;
            rec["id"] = article.id;
            rec["country"] = article.country;
            rec["text"] = article.text;
            lines += rec.dump() + '\n';
        }
        report::write_text(articles_out, lines);
        report::write_text(labels_out, labels_csv(corpus.labels));
        std::cerr << "synthesized " << corpus.articles.size() << " text articles\n";
    } else {
        if (store_out.empty()) throw InputError("vector synthesis needs --store-out");
        const VectorCorpus corpus = generate_vectors(params);
        save_store(build_store(corpus.articles), store_out);
        report::write_text(labels_out, labels_csv(corpus.labels));
        std::cerr << "synthesized " << corpus.articles.size() << " embedded articles\n";
    }
    return 0;
}

std::string find_config_arg(int argc, const char* const* argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return "";
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    try {
        RunConfig cfg;
        const std::string config_path = find_config_arg(argc, argv);
        if (!config_path.empty()) apply_config_file(config_path, cfg);

        CLI::App app{"text-corpus peacefulness classification pipeline"};
        app.require_subcommand(1);
        std::string config_echo;
        app.add_option("--config", config_echo, "JSON config file (flags override it)");
        app.add_option("--threads", cfg.n_threads, "worker threads, 0 = hardware concurrency");

        std::string embedder_kind =
            cfg.embedder.kind == EmbedderKind::Remote ? "remote" : "hashing";
        std::string rule_kind = to_string(cfg.rule.kind);
        std::string fixture_path;
        std::string verdicts_path, index_path;
        std::string articles_out, labels_out, store_out;
        std::string synth_mode = "vectors";
        SynthParams params;

        auto* ingest = app.add_subcommand("ingest", "validate a corpus and print its statistics");
        ingest->add_option("--articles", cfg.articles_path, "JSON-lines articles file")
            ->required(cfg.articles_path.empty());
        ingest->add_option("--labels", cfg.labels_path, "country labels CSV")
            ->required(cfg.labels_path.empty());

        auto* embed = app.add_subcommand("embed", "embed articles into a vector store file");
        embed->add_option("--articles", cfg.articles_path, "JSON-lines articles file")
            ->required(cfg.articles_path.empty());
        embed->add_option("--labels", cfg.labels_path, "country labels CSV")
            ->required(cfg.labels_path.empty());
        embed->add_option("--store", cfg.store_path, "output store file")
            ->required(cfg.store_path.empty());
        embed->add_option("--embedder", embedder_kind, "hashing or remote");
        embed->add_option("--dim", cfg.embedder.dim, "embedding dimension");
        embed->add_option("--model", cfg.embedder.model_name, "remote model name");
        embed->add_option("--batch-size", cfg.embedder.batch_size, "remote batch size");
        embed->add_option("--max-retries", cfg.embedder.max_retries, "remote retry budget");
        embed->add_option("--max-in-flight", cfg.embedder.max_in_flight,
                          "concurrent remote batches");
        embed->add_option("--endpoint", cfg.endpoint, "remote service base URL");
        embed->add_option("--seed", cfg.embedder.seed, "hashing embedder seed");

        auto* evaluate =
            app.add_subcommand("evaluate", "leave-one-country-out evaluation reports");
        evaluate->add_option("--store", cfg.store_path, "input store file");
        evaluate->add_option("--labels", cfg.labels_path, "country labels CSV")
            ->required(cfg.labels_path.empty());
        evaluate->add_option("--out", cfg.out_dir, "report output directory")
            ->required(cfg.out_dir.empty());
        evaluate->add_option("--rule", rule_kind, "knn_majority or class_mean_topk");
        evaluate->add_option("--k", cfg.rule.k, "neighbors per decision");
        evaluate->add_option("--threshold", cfg.threshold, "peaceful share threshold");
        evaluate->add_option("--seed", cfg.seed, "run seed");
        evaluate->add_option("--fixture-percentages", fixture_path,
                             "aggregate a country,n_articles,n_peaceful CSV instead of a store");

        auto* ablate = app.add_subcommand("ablate", "dataset-size halving ablation reports");
        ablate->add_option("--store", cfg.store_path, "input store file")
            ->required(cfg.store_path.empty());
        ablate->add_option("--labels", cfg.labels_path, "country labels CSV")
            ->required(cfg.labels_path.empty());
        ablate->add_option("--out", cfg.out_dir, "report output directory")
            ->required(cfg.out_dir.empty());
        ablate->add_option("--rule", rule_kind, "knn_majority or class_mean_topk");
        ablate->add_option("--k", cfg.rule.k, "neighbors per decision");
        ablate->add_option("--threshold", cfg.threshold, "peaceful share threshold");
        ablate->add_option("--seed", cfg.seed, "run seed");

        auto* correlate =
            app.add_subcommand("correlate", "regress a country index on peace percentages");
        correlate->add_option("--verdicts", verdicts_path, "country_verdicts.csv from evaluate")
            ->required();
        correlate->add_option("--index", index_path, "CSV with country,index_value columns")
            ->required();

        auto* synth = app.add_subcommand("synth", "generate a synthetic labeled corpus");
        synth->add_option("--mode", synth_mode, "vectors or texts");
        synth->add_option("--articles-out", articles_out, "JSON-lines output (texts mode)");
        synth->add_option("--store-out", store_out, "store file output (vectors mode)");
        synth->add_option("--labels-out", labels_out, "labels CSV output")->required();
        synth->add_option("--countries", params.n_countries, "number of countries");
        synth->add_option("--peaceful", params.n_peaceful, "number of peaceful countries");
        synth->add_option("--per-country", params.articles_per_country,
                          "articles per country (one value or one per country)");
        synth->add_option("--separability", params.separability, "class separation knob");
        synth->add_option("--spread", params.country_spread, "country centroid spread");
        synth->add_option("--noise", params.noise, "per-article noise scale");
        synth->add_option("--dim", params.dim, "vector dimension");
        synth->add_option("--seed", params.seed, "generator seed");

        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : 2;
        }

        cfg.embedder.kind =
            embedder_kind == "remote" ? EmbedderKind::Remote : EmbedderKind::Hashing;
        if (embedder_kind != "remote" && embedder_kind != "hashing") {
            throw InputError("unknown embedder kind '" + embedder_kind + "'");
        }
        cfg.rule.kind = parse_rule_kind(rule_kind);
        params.mode = parse_synth_mode(synth_mode);

        if (ingest->parsed()) return cmd_ingest(cfg);
        if (embed->parsed()) return cmd_embed(cfg);
        if (evaluate->parsed()) {
            if (fixture_path.empty() && cfg.store_path.empty()) {
                throw InputError("evaluate needs --store or --fixture-percentages");
            }
            return cmd_evaluate(cfg, fixture_path);
        }
        if (ablate->parsed()) return cmd_ablate(cfg);
        if (correlate->parsed()) return cmd_correlate(verdicts_path, index_path);
        if (synth->parsed()) return cmd_synth(params, articles_out, labels_out, store_out);
        throw InputError("no subcommand given");
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ServiceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 4;
    }
}

}  // namespace peacegrid
