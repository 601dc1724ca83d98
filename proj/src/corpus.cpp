#include "peacegrid/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "peacegrid/errors.hpp"

namespace peacegrid {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(trim(field));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

// Population mean/std over the values of a per-country map.
void mean_pop_std(const std::map<std::string, std::size_t>& counts, double& mean, double& std_out) {
    const double n = static_cast<double>(counts.size());
    double sum = 0.0;
    for (const auto& [_, v] : counts) sum += static_cast<double>(v);
    mean = sum / n;
    double sq = 0.0;
    for (const auto& [_, v] : counts) {
        const double d = static_cast<double>(v) - mean;
        sq += d * d;
    }
    std_out = std::sqrt(sq / n);
}

}  // namespace

std::string to_string(PeaceLabel label) {
    return label == PeaceLabel::Peaceful ? "peaceful" : "non-peaceful";
}

PeaceLabel parse_peace_label(const std::string& token) {
    const std::string t = lower(trim(token));
    if (t == "peaceful") return PeaceLabel::Peaceful;
    if (t == "non-peaceful") return PeaceLabel::NonPeaceful;
    throw InputError("unknown label \"" + token + "\" (expected peaceful or non-peaceful)");
}

const LabelEntry& LabelTable::require(const std::string& country) const {
    auto it = entries.find(country);
    if (it == entries.end()) throw InputError("no label entry for country \"" + country + "\"");
    return it->second;
}

bool LabelTable::has_any_index() const {
    for (const auto& [_, e] : entries)
        if (e.index_value) return true;
    return false;
}

std::size_t count_words(const std::string& text) {
    std::size_t n = 0;
    bool in_token = false;
    for (unsigned char c : text) {
        if (is_space(c)) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++n;
        }
    }
    return n;
}

ArticleSet load_articles(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open articles file: " + path);

    ArticleSet articles;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;

        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw InputError("malformed line " + std::to_string(line_no) + " in " + path + ": " +
                             e.what());
        }
        if (!rec.is_object() || !rec.contains("id") || !rec.contains("country") ||
            !rec.contains("text") || !rec["id"].is_string() || !rec["country"].is_string() ||
            !rec["text"].is_string()) {
            throw InputError("malformed line " + std::to_string(line_no) + " in " + path +
                             ": expected an object with string fields id, country, text");
        }

        Article a;
        a.id = rec["id"].get<std::string>();
        a.country = rec["country"].get<std::string>();
        a.text = rec["text"].get<std::string>();
        if (trim(a.text).empty())
            throw InputError("empty text for article \"" + a.id + "\" (line " +
                             std::to_string(line_no) + ")");
        if (!seen_ids.insert(a.id).second)
            throw InputError("duplicate article id \"" + a.id + "\" at line " +
                             std::to_string(line_no));
        a.word_count = count_words(a.text);
        articles.push_back(std::move(a));
    }
    return articles;
}

LabelTable load_country_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open labels file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw InputError("labels file is empty: " + path);
    const auto header = split_csv_line(lower(line));
    if (header.size() < 2 || header.size() > 3 || header[0] != "country" ||
        header[1] != "peace_label" || (header.size() == 3 && header[2] != "index_value")) {
        throw InputError("labels file " + path +
                         ": expected header country,peace_label[,index_value]");
    }

    LabelTable table;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        if (fields.size() < 2 || fields.size() > 3)
            throw InputError("labels file " + path + " line " + std::to_string(line_no) +
                             ": expected 2 or 3 fields, got " + std::to_string(fields.size()));

        const std::string country = fields[0];
        LabelEntry entry;
        entry.peace_label = parse_peace_label(fields[1]);
        if (fields.size() == 3 && !fields[2].empty()) {
            try {
                entry.index_value = std::stod(fields[2]);
            } catch (const std::exception&) {
                throw InputError("labels file line " + std::to_string(line_no) +
                                 ": bad index_value \"" + fields[2] + "\"");
            }
            if (!std::isfinite(*entry.index_value))
                throw InputError("labels file line " + std::to_string(line_no) +
                                 ": index_value must be finite");
        }
        if (!table.entries.emplace(country, entry).second)
            throw InputError("duplicate country \"" + country + "\" at line " +
                             std::to_string(line_no));
    }
    return table;
}

CorpusSummary summarize(const ArticleSet& articles) {
    if (articles.empty()) throw InputError("cannot summarize an empty corpus");

    CorpusSummary s;
    for (const Article& a : articles) {
        s.articles_per_country[a.country] += 1;
        s.words_per_country[a.country] += a.word_count;
    }
    mean_pop_std(s.articles_per_country, s.mean_articles, s.std_articles);
    mean_pop_std(s.words_per_country, s.mean_words, s.std_words);
    return s;
}

}  // namespace peacegrid
