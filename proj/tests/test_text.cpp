#include "aaetag/error.hpp"
#include "aaetag/random.hpp"
#include "aaetag/text.hpp"

#include <doctest.h>

#include <set>
#include <string>
#include <vector>

using namespace aaetag;
using namespace aaetag::text;

namespace {

std::vector<std::string> surfaces(const std::vector<Token> &toks) {
    std::vector<std::string> out;
    for (const auto &t : toks) {
        out.push_back(t.surface);
    }
    return out;
}

std::string random_text(Rng &rng) {
    static const std::vector<std::string> pieces = {
        "I",  "ain't", "no", "dog", "middle-class", "7:30", ",",  ";",  ".",   "!!", "...", "-", "--", "—",
        "'",  "\"",    "be", "and", "don't",        "a",    "B",  " ",  "  ",  "\t", "x-",  "(", ")",  "1,000",
        "3.5", "?",    "’",  "it’s", "…",           "é",    "--x"};
    std::string s;
    const std::size_t n = rng.index(12);
    for (std::size_t i = 0; i < n; ++i) {
        s += pieces[rng.index(pieces.size())];
        if (rng.bernoulli(0.6)) {
            s += ' ';
        }
    }
    return s;
}

}  // namespace

TEST_CASE("tokenize keeps contractions and splits sentence punctuation") {
    CHECK(surfaces(tokenize("I ain't step on no dog.")) ==
          std::vector<std::string>{"I", "ain't", "step", "on", "no", "dog", "."});
    CHECK(tokenize("").empty());
    CHECK(tokenize("   ").empty());

    const auto toks = tokenize("And so they had really- you know; middle-class- they hadn't encountered any real racism.");
    const auto s = surfaces(toks);
    CHECK(std::count(s.begin(), s.end(), "-") == 2);
    CHECK(std::count(s.begin(), s.end(), ";") == 1);
    CHECK(s.back() == ".");
    CHECK(std::count(s.begin(), s.end(), "hadn't") == 1);
    CHECK(std::count(s.begin(), s.end(), "middle-class") == 1);
}

TEST_CASE("numbers and punctuation runs") {
    CHECK(surfaces(tokenize("I be in my office by 7:30.")) ==
          std::vector<std::string>{"I", "be", "in", "my", "office", "by", "7:30", "."});
    CHECK(surfaces(tokenize("Wait... what?!")) == std::vector<std::string>{"Wait", "...", "what", "?", "!"});
    CHECK(surfaces(tokenize("\"Hello,\" she said")) == std::vector<std::string>{"\"", "Hello", ",", "\"", "she", "said"});
    CHECK(surfaces(tokenize("'tis")) == std::vector<std::string>{"'", "tis"});
}

TEST_CASE("token fields") {
    const auto toks = tokenize("No, NOTHING");
    REQUIRE(toks.size() == 3);
    CHECK(toks[0].lower == "no");
    CHECK(toks[2].lower == "nothing");
    CHECK(toks[1].kind == TokenKind::punctuation);
    CHECK(toks[0].kind == TokenKind::word);
    CHECK(toks[1].start == 2);
    CHECK(toks[1].end == 3);
    CHECK(toks[2].index == 2);
    CHECK(casefold("It’s") == "it's");
}

TEST_CASE("clause segmentation") {
    const auto s1 = make_sentence("e1", "We was in Pentecost holiness and I wasn't allowed to smoke.");
    const auto c1 = segment_clauses(s1);
    REQUIRE(c1.size() == 2);
    CHECK(s1.tokens[c1[1].first].lower == "and");
    CHECK(c1[1].cause == BoundaryCause::conjunction);
    CHECK(c1[0].cause == BoundaryCause::sentence_start);

    CHECK(segment_clauses(make_sentence("e2", "I be in my office by 7:30.")).size() == 1);

    const auto c3 = segment_clauses(make_sentence("e3", "no, nothing"));
    REQUIRE(c3.size() == 2);
    CHECK(c3[1].cause == BoundaryCause::punctuation);

    CHECK(segment_clauses(make_sentence("e4", "")).empty());
    CHECK(segment_clauses(make_sentence("e5", ", ; .")).empty());
    CHECK(segment_clauses(make_sentence("e6", "a -- b — c")).size() == 3);
}

TEST_CASE("boundary config from json") {
    const auto cfg = BoundaryConfig::from_json(R"({"punctuation": ["|"], "conjunctions": ["plus"]})");
    CHECK(cfg.is_boundary_punctuation("|"));
    CHECK(cfg.is_boundary_punctuation("||"));
    CHECK_FALSE(cfg.is_boundary_punctuation(","));
    CHECK(cfg.is_conjunction("plus"));
    CHECK(segment_clauses(make_sentence("x", "a | b plus c , d"), cfg).size() == 3);
    CHECK_THROWS(BoundaryConfig::from_json("{"));
}

TEST_CASE("property: spans, reconstruction, partition, idempotence") {
    Rng rng(2024);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::string raw = random_text(rng);
        const auto toks = tokenize(raw);
        CHECK(detokenize(raw, toks) == raw);
        for (std::size_t i = 0; i < toks.size(); ++i) {
            CHECK(toks[i].index == i);
            CHECK(toks[i].start < toks[i].end);
            CHECK(raw.substr(toks[i].start, toks[i].end - toks[i].start) == toks[i].surface);
            CHECK((toks[i].kind == TokenKind::punctuation) == is_punctuation_text(toks[i].surface));
            if (i > 0) {
                CHECK(toks[i - 1].end <= toks[i].start);
            }
        }
        CHECK(tokenize(raw) == toks);

        const Sentence s{"p", raw, toks};
        std::set<std::size_t> covered;
        for (const auto &c : segment_clauses(s)) {
            CHECK(c.size() > 0);
            for (std::size_t i = c.first; i < c.last; ++i) {
                CHECK(covered.insert(i).second);
            }
        }
        for (const auto &t : toks) {
            if (t.is_word()) {
                CHECK(covered.count(t.index) == 1);
            }
        }
    }
}
