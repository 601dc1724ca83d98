#include <cmath>
#include <string>

#include "doctest.h"
#include "oracles.hpp"
#include "peacegrid/corpus.hpp"
#include "peacegrid/errors.hpp"
#include "peacegrid/report.hpp"

using namespace peacegrid;

TEST_CASE("count_words counts whitespace-delimited tokens") {
    CHECK(count_words("") == 0);
    CHECK(count_words("   \t\n") == 0);
    CHECK(count_words("a") == 1);
    CHECK(count_words(" a  b\tc\n") == 3);
    CHECK(count_words("one two  three   four") == 4);
}

TEST_CASE("peace labels parse case-insensitively and round-trip") {
    CHECK(parse_peace_label("peaceful") == PeaceLabel::Peaceful);
    CHECK(parse_peace_label("Peaceful") == PeaceLabel::Peaceful);
    CHECK(parse_peace_label(" NON-PEACEFUL ") == PeaceLabel::NonPeaceful);
    CHECK(to_string(PeaceLabel::Peaceful) == "peaceful");
    CHECK(to_string(PeaceLabel::NonPeaceful) == "non-peaceful");
    CHECK_THROWS_WITH_AS(parse_peace_label("calm"),
                         doctest::Contains("expected peaceful or non-peaceful"), InputError);
}

TEST_CASE("load_articles reads JSON lines in order") {
    oracle::TempDir dir("corpus");
    const std::string path = dir.file("articles.jsonl");
    report::write_text(path,
                       R"({"id":"a1","country":"X","text":"one two three"})"
                       "\n"
                       "\n"
                       R"({"id":"a2","country":"Y","text":" solo "})"
                       "\n");
    const ArticleSet articles = load_articles(path);
    REQUIRE(articles.size() == 2);
    CHECK(articles[0].id == "a1");
    CHECK(articles[0].country == "X");
    CHECK(articles[0].word_count == 3);
    CHECK(articles[1].id == "a2");
    CHECK(articles[1].word_count == 1);
}

TEST_CASE("load_articles reports the offending line") {
    oracle::TempDir dir("corpus");
    const std::string path = dir.file("bad.jsonl");

    SUBCASE("malformed JSON") {
        report::write_text(path,
                           R"({"id":"a1","country":"X","text":"ok"})"
                           "\n{not json\n");
        CHECK_THROWS_WITH_AS(load_articles(path), doctest::Contains("malformed line 2"),
                             InputError);
    }
    SUBCASE("missing field") {
        report::write_text(path, R"({"id":"a1","country":"X"})"
                                 "\n");
        CHECK_THROWS_WITH_AS(load_articles(path),
                             doctest::Contains("string fields id, country, text"), InputError);
    }
    SUBCASE("non-string field") {
        report::write_text(path, R"({"id":7,"country":"X","text":"ok"})"
                                 "\n");
        CHECK_THROWS_AS(load_articles(path), InputError);
    }
    SUBCASE("empty text") {
        report::write_text(path, R"({"id":"a1","country":"X","text":"  "})"
                                 "\n");
        CHECK_THROWS_WITH_AS(load_articles(path), doctest::Contains("empty text for article \"a1\""),
                             InputError);
    }
    SUBCASE("duplicate id") {
        report::write_text(path,
                           R"({"id":"a1","country":"X","text":"ok"})"
                           "\n"
                           R"({"id":"a1","country":"Y","text":"ok"})"
                           "\n");
        CHECK_THROWS_WITH_AS(load_articles(path),
                             doctest::Contains("duplicate article id \"a1\" at line 2"),
                             InputError);
    }
}

TEST_CASE("load_articles rejects a missing file") {
    CHECK_THROWS_WITH_AS(load_articles("/nonexistent/path.jsonl"),
                         doctest::Contains("cannot open articles file"), InputError);
}

TEST_CASE("load_country_labels parses both column layouts") {
    oracle::TempDir dir("labels");
    const std::string path = dir.file("labels.csv");

    SUBCASE("two columns") {
        report::write_text(path, "country,peace_label\nX,peaceful\nY,non-peaceful\n");
        const LabelTable table = load_country_labels(path);
        REQUIRE(table.entries.size() == 2);
        CHECK(table.require("X").peace_label == PeaceLabel::Peaceful);
        CHECK(table.require("Y").peace_label == PeaceLabel::NonPeaceful);
        CHECK(!table.has_any_index());
        CHECK_THROWS_WITH_AS(table.require("Z"), doctest::Contains("no label entry for country"),
                             InputError);
    }
    SUBCASE("three columns with blanks allowed") {
        report::write_text(path,
                           "Country,Peace_Label,Index_Value\nX,peaceful,0.95\nY,non-peaceful,\n");
        const LabelTable table = load_country_labels(path);
        REQUIRE(table.require("X").index_value.has_value());
        CHECK(*table.require("X").index_value == doctest::Approx(0.95));
        CHECK(!table.require("Y").index_value.has_value());
        CHECK(table.has_any_index());
    }
}

TEST_CASE("load_country_labels rejects malformed files") {
    oracle::TempDir dir("labels");
    const std::string path = dir.file("labels.csv");

    SUBCASE("bad header") {
        report::write_text(path, "nation,label\nX,peaceful\n");
        CHECK_THROWS_WITH_AS(load_country_labels(path),
                             doctest::Contains("expected header country,peace_label"), InputError);
    }
    SUBCASE("wrong field count") {
        report::write_text(path, "country,peace_label\nX,peaceful,0.9,extra\n");
        CHECK_THROWS_WITH_AS(load_country_labels(path), doctest::Contains("line 2"), InputError);
    }
    SUBCASE("duplicate country") {
        report::write_text(path, "country,peace_label\nX,peaceful\nX,non-peaceful\n");
        CHECK_THROWS_WITH_AS(load_country_labels(path),
                             doctest::Contains("duplicate country \"X\" at line 3"), InputError);
    }
    SUBCASE("bad index value") {
        report::write_text(path, "country,peace_label,index_value\nX,peaceful,abc\n");
        CHECK_THROWS_WITH_AS(load_country_labels(path), doctest::Contains("bad index_value"),
                             InputError);
    }
    SUBCASE("non-finite index value") {
        report::write_text(path, "country,peace_label,index_value\nX,peaceful,inf\n");
        CHECK_THROWS_WITH_AS(load_country_labels(path), doctest::Contains("must be finite"),
                             InputError);
    }
    SUBCASE("empty file") {
        report::write_text(path, "");
        CHECK_THROWS_WITH_AS(load_country_labels(path), doctest::Contains("labels file is empty"),
                             InputError);
    }
}

TEST_CASE("summarize computes population statistics per country") {
    ArticleSet articles;
    auto add = [&](const char* id, const char* country, const char* text) {
        Article a;
        a.id = id;
        a.country = country;
        a.text = text;
        a.word_count = count_words(text);
        articles.push_back(a);
    };
    // Articles per country: A=1, B=2, C=3.  Words: A=2, B=5, C=6.
    add("a1", "A", "w w");
    add("b1", "B", "w w");
    add("b2", "B", "w w w");
    add("c1", "C", "w");
    add("c2", "C", "w w");
    add("c3", "C", "w w w");

    const CorpusSummary s = summarize(articles);
    CHECK(s.articles_per_country.at("A") == 1);
    CHECK(s.articles_per_country.at("B") == 2);
    CHECK(s.articles_per_country.at("C") == 3);
    CHECK(s.words_per_country.at("A") == 2);
    CHECK(s.words_per_country.at("B") == 5);
    CHECK(s.words_per_country.at("C") == 6);
    CHECK(s.mean_articles == doctest::Approx(2.0));
    CHECK(s.std_articles == doctest::Approx(std::sqrt(2.0 / 3.0)));
    CHECK(s.mean_words == doctest::Approx(13.0 / 3.0));
    const double mw = 13.0 / 3.0;
    const double var =
        ((2 - mw) * (2 - mw) + (5 - mw) * (5 - mw) + (6 - mw) * (6 - mw)) / 3.0;
    CHECK(s.std_words == doctest::Approx(std::sqrt(var)));

    CHECK_THROWS_AS(summarize({}), InputError);
}
