#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace peacegrid {

enum class PeaceLabel : std::uint8_t { NonPeaceful = 0, Peaceful = 1 };

// Canonical tokens, also used by the CSV formats.
std::string to_string(PeaceLabel label);
// Case-insensitive parse of "peaceful" / "non-peaceful".
PeaceLabel parse_peace_label(const std::string& token);

struct Article {
    std::string id;
    std::string country;
    std::string text;
    std::size_t word_count = 0;  // whitespace tokens
};

using ArticleSet = std::vector<Article>;

struct LabelEntry {
    PeaceLabel peace_label = PeaceLabel::NonPeaceful;
    std::optional<double> index_value;  // e.g. a development index in [0,1]
};

struct LabelTable {
    std::map<std::string, LabelEntry> entries;

    const LabelEntry& require(const std::string& country) const;
    bool has_any_index() const;
};

struct CorpusSummary {
    std::map<std::string, std::size_t> articles_per_country;
    std::map<std::string, std::size_t> words_per_country;
    double mean_articles = 0.0;
    double std_articles = 0.0;  // population std over countries
    double mean_words = 0.0;
    double std_words = 0.0;
};

std::size_t count_words(const std::string& text);

// JSON-lines, one record per line with fields id/country/text.
// Order-preserving; word_count assigned on load.
ArticleSet load_articles(const std::string& path);

// CSV with header country,peace_label[,index_value].
LabelTable load_country_labels(const std::string& path);

CorpusSummary summarize(const ArticleSet& articles);

}  // namespace peacegrid
