#include "aaetag/error.hpp"
#include "aaetag/prompt.hpp"

#include "oracles.hpp"
#include "parser_fixtures.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>

using namespace aaetag;
using namespace aaetag::llm;

namespace {

PromptSpec habitual(PromptMode mode = PromptMode::zero_shot) { return spec_for_feature("habitual_be", mode); }

void check_golden(const std::string &file, const std::string &rendered) {
    const std::string path = oracle::source_path("tests/golden/" + file);
    if (std::getenv("AAETAG_REGEN_GOLDEN") != nullptr) {
        std::ofstream(path, std::ios::binary) << rendered;
    }
    CHECK_MESSAGE(rendered == oracle::slurp(path), file);
}

constexpr Label A = Label::positive;
constexpr Label B = Label::negative;

}  // namespace

TEST_CASE("zero-shot template") {
    CHECK(build_zero_shot_prompt({"I be happy."}, habitual()) ==
          "1. Classify the sentence 'I be happy.' as 'habitual be' or 'non-habitual be' in one word while preserving "
          "the numbering at the start of the prompt.");
    check_golden("zero_shot_single.txt", build_zero_shot_prompt({"I be happy."}, habitual()));
    check_golden("zero_shot_three.txt",
                 build_zero_shot_prompt({"I be happy.", "She is at work.", "They be working late."}, habitual()));
    check_golden("zero_shot_quote.txt", build_zero_shot_prompt({"He said 'be cool' to me."}, habitual()));
    check_golden("zero_shot_negation.txt",
                 build_zero_shot_prompt({"I ain't step on no dog.", "I am usually in my office by 7:30."},
                                        spec_for_feature("multiple_negation")));
    CHECK_THROWS_AS(build_zero_shot_prompt({}, habitual()), InputError);
}

TEST_CASE("few-shot template") {
    auto spec = habitual(PromptMode::few_shot);
    spec.examples = {{"They be playing ball after school.", A}};
    const std::string one = build_few_shot_prompt({"I be in my office by 7:30."}, spec);
    CHECK(one.rfind(std::string(few_shot_preamble), 0) == 0);
    check_golden("few_shot_one.txt", one);

    spec.examples.clear();
    for (int i = 0; i < 5; ++i) {
        spec.examples.push_back({"She be singing " + std::to_string(i) + ".", A});
        spec.examples.push_back({"He will be there " + std::to_string(i) + ".", B});
    }
    const std::string ten = build_prompt({"I be happy.", "You have to be careful."}, spec);
    check_golden("few_shot_ten.txt", ten);
    // examples render in plan order
    std::size_t last = 0;
    for (const auto &ex : spec.examples) {
        const std::size_t at = ten.find("Sentence: " + ex.sentence + "\nLabel: " + spec.label_text(ex.label));
        REQUIRE(at != std::string::npos);
        CHECK(at >= last);
        last = at;
    }
    spec.examples.clear();
    CHECK_THROWS_AS(build_few_shot_prompt({"I be happy."}, spec), InputError);
    CHECK_THROWS_AS(spec.validate(), InputError);
}

TEST_CASE("query extraction inverts the builders") {
    const std::vector<std::string> batch = {"I be happy.", "He said 'be cool'.", "x"};
    CHECK(extract_queries(build_zero_shot_prompt(batch, habitual()), habitual()) == batch);
    auto spec = habitual(PromptMode::few_shot);
    spec.examples = {{"Ex.", A}};
    CHECK(extract_queries(build_prompt(batch, spec), spec) == batch);
}

TEST_CASE("parser fixture suite") {
    const auto fixtures = ::fixtures::parser_fixtures();
    REQUIRE(fixtures.size() == 20);
    for (const auto &f : fixtures) {
        const auto got = parse_response(f.raw, f.n, habitual());
        REQUIRE_MESSAGE(got.size() == f.n, f.name);
        for (std::size_t i = 0; i < f.n; ++i) {
            CHECK_MESSAGE(got[i].label == f.expect[i], f.name, " item ", i + 1);
            CHECK((got[i].status == ParseStatus::parsed) == f.expect[i].has_value());
        }
    }
    const auto statuses = parse_response("1. maybe\n2. habitual be and non-habitual be", 3, habitual());
    CHECK(statuses[0].status == ParseStatus::no_label);
    CHECK(statuses[1].status == ParseStatus::ambiguous);
    CHECK(statuses[2].status == ParseStatus::missing_line);
}

TEST_CASE("negation labels") {
    const auto spec = spec_for_feature("multiple_negation");
    const auto got = parse_response("1. no multiple negation\n2. multiple negation", 2, spec);
    CHECK(got[0].label == B);
    CHECK(got[1].label == A);
    CHECK_THROWS_AS(spec_for_feature("copula"), InputError);
    PromptSpec same;
    same.feature_label = "x";
    same.contrast_label = "X";
    CHECK_THROWS_AS(same.validate(), InputError);
}
