#include "aaetag/error.hpp"
#include "aaetag/negation.hpp"
#include "aaetag/random.hpp"

#include "oracles.hpp"

#include <doctest.h>

using namespace aaetag;
using negation::find_negators;
using negation::tag_multiple_negation;

namespace {

Label tag(const std::string &s) { return tag_multiple_negation(text::make_sentence("t", s)); }

}  // namespace

TEST_CASE("pinned sentences") {
    CHECK(tag("I ain't step on no dog.") == Label::positive);
    CHECK(tag("Because he ain't been back to finish yet.") == Label::negative);
    CHECK(tag("We was in Pentecost holiness and I wasn't allowed to smoke.") == Label::negative);
    CHECK(tag("I am usually in my office by 7:30.") == Label::negative);
    // Gold is negative; no boundary separates the two negators, so the rule fires.
    CHECK(tag("I didn't ask you not to come") == Label::positive);
}

TEST_CASE("find_negators") {
    CHECK(find_negators(text::make_sentence("a", "I ain't step on no dog.")) == std::vector<std::size_t>{1, 4});
    CHECK(find_negators(text::make_sentence("b", "I am usually in my office by 7:30.")).empty());
    CHECK(find_negators(text::make_sentence("c", "I didn't ask you not to come")) == std::vector<std::size_t>{1, 4});
    CHECK(find_negators(text::make_sentence("d", "He CANNOT go, NOBODY can")) == std::vector<std::size_t>{1, 4});
    CHECK(find_negators(text::make_sentence("e", "It’s not that I don’t care")).size() == 2);
}

TEST_CASE("degenerate and boundary cases") {
    CHECK(tag("") == Label::negative);
    CHECK(tag("...") == Label::negative);
    CHECK(tag("no") == Label::negative);
    CHECK(tag("no, nothing") == Label::negative);
    CHECK(tag("no nothing") == Label::positive);
    CHECK(tag("I don't want nothing but I never") == Label::positive);
    CHECK(tag("I don't want it but I never") == Label::negative);
    CHECK(tag("Not now -- never") == Label::negative);
    CHECK(tag("not nor") == Label::negative);  // "nor" opens its own clause
}

TEST_CASE("lexicon configuration") {
    const auto lex = negation::NegatorLexicon::from_json(R"({"negators": ["nae"], "nt_suffix": false})");
    const auto s = text::make_sentence("x", "I didn't say nae");
    CHECK(find_negators(s, lex) == std::vector<std::size_t>{3});
    CHECK(tag_multiple_negation(s, lex) == Label::negative);
    CHECK_THROWS_AS(negation::NegatorLexicon::from_json(R"({"negators": ["Not"]})"), InputError);
    CHECK_THROWS_AS(negation::NegatorLexicon::from_json(R"({"negators": []})"), InputError);
}

TEST_CASE("properties against the brute-force oracle") {
    const oracle::NegationOracle ref;
    const std::vector<std::string> words = {"I", "no", "not", "never", "nothing", "ain't", "don't", "and", "but",
                                            "so", "you", "it", "went", "nobody", "nor", ",", ";", ".", "?", "if"};
    Rng rng(77);
    for (int trial = 0; trial < 3000; ++trial) {
        std::vector<std::string> toks;
        const std::size_t n = 1 + rng.index(10);
        for (std::size_t i = 0; i < n; ++i) {
            toks.push_back(words[rng.index(words.size())]);
        }
        std::string s;
        for (const auto &t : toks) {
            s += (s.empty() ? "" : " ") + t;
        }
        const Label got = tag(s);
        CHECK_MESSAGE((got == Label::positive) == ref.positive(s), s);

        // Zero or one negator is always negative.
        if (find_negators(text::make_sentence("s", s)).size() < 2) {
            CHECK(got == Label::negative);
        }
        // Monotonicity: dropping one negator never turns negative into positive.
        for (std::size_t drop = 0; drop < toks.size(); ++drop) {
            if (!ref.is_negator(text::casefold(toks[drop]))) {
                continue;
            }
            std::string reduced;
            for (std::size_t i = 0; i < toks.size(); ++i) {
                if (i != drop) {
                    reduced += (reduced.empty() ? "" : " ") + toks[i];
                }
            }
            if (got == Label::negative) {
                CHECK(tag(reduced) == Label::negative);
            }
        }
    }
}

TEST_CASE("permuting words inside a clause keeps the label") {
    Rng rng(5);
    const std::vector<std::string> words = {"no", "not", "dog", "never", "went", "nothing", "cat", "there"};
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<std::string> a;
        std::vector<std::string> b;
        const std::size_t na = 1 + rng.index(5);
        const std::size_t nb = 1 + rng.index(5);
        for (std::size_t i = 0; i < na; ++i) {
            a.push_back(words[rng.index(words.size())]);
        }
        for (std::size_t i = 0; i < nb; ++i) {
            b.push_back(words[rng.index(words.size())]);
        }
        auto join = [](const std::vector<std::string> &x, const std::vector<std::string> &y) {
            std::string s;
            for (const auto &w : x) {
                s += w + " ";
            }
            s += ", ";
            for (const auto &w : y) {
                s += w + " ";
            }
            return s;
        };
        const Label before = tag(join(a, b));
        rng.shuffle(std::span<std::string>(a));
        rng.shuffle(std::span<std::string>(b));
        CHECK(tag(join(a, b)) == before);
    }
}
