#pragma once

// Response styles seen from chat models, with the labels a correct parser must recover.

#include "aaetag/prompt.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fixtures {

struct ParserFixture {
    const char *name;
    std::string raw;
    std::size_t n;
    std::vector<std::optional<aaetag::Label>> expect;
};

/// All fixtures use the Habitual Be labels.
inline std::vector<ParserFixture> parser_fixtures() {
    constexpr auto A = aaetag::Label::positive;
    constexpr auto B = aaetag::Label::negative;
    return {
        {"plain", "1. habitual be\n2. non-habitual be", 2, {A, B}},
        {"longest match first", "1. non-habitual be", 1, {B}},
        {"verbose single", "This is a habitual use because the context suggests a repeated action,", 1, {A}},
        {"verbose numbered",
         "1. This sentence uses 'be' in a habitual sense because it describes a repeated action.\n"
         "2. This is a non-habitual use of be.",
         2,
         {A, B}},
        {"quoted labels", "1. 'habitual be'\n2. 'non-habitual be'", 2, {A, B}},
        {"upper case", "1. HABITUAL BE\n2. Non-Habitual Be", 2, {A, B}},
        {"paren numbering", "1) habitual be\n2) non-habitual be", 2, {A, B}},
        {"markdown bold", "**1.** habitual be\n**2.** non-habitual be", 2, {A, B}},
        {"bullets", "- 1: non-habitual be\n- 2: habitual be", 2, {B, A}},
        {"out of order", "2. habitual be\n1. non-habitual be", 2, {B, A}},
        {"missing line", "1. habitual be\n3. habitual be", 3, {A, std::nullopt, A}},
        {"no label", "1. I cannot tell\n2. habitual be", 2, {std::nullopt, A}},
        {"both labels", "1. habitual be or non-habitual be", 1, {std::nullopt}},
        {"continuation line", "1.\nhabitual be\n2.\nnon-habitual be", 2, {A, B}},
        {"crlf", "1. non-habitual be\r\n2. habitual be\r\n", 2, {B, A}},
        {"preamble chatter", "Sure! Here are the labels:\n1. habitual be\n2. non-habitual be\nHope this helps.", 2, {A, B}},
        {"sentence echoed", "1. 'I be happy.' - habitual be\n2. 'He is here.' - non-habitual be", 2, {A, B}},
        {"core word only", "1. Habitual.\n2. Non-habitual.", 2, {A, B}},
        {"duplicate numbers keep first", "1. non-habitual be\n1. habitual be", 1, {B}},
        {"empty response", "", 2, {std::nullopt, std::nullopt}},
    };
}

}  // namespace fixtures
