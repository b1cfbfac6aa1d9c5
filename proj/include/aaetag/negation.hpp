#pragma once

#include "aaetag/label.hpp"
#include "aaetag/text.hpp"

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace aaetag::negation {

struct NegatorLexicon {
    std::set<std::string> entries;
    /// Any word ending in "n't" counts as a negator.
    bool nt_suffix = true;

    [[nodiscard]] bool is_negator(std::string_view lower) const;

    static const NegatorLexicon &defaults();
    static NegatorLexicon from_json(std::string_view json_text);
    static NegatorLexicon load(const std::filesystem::path &path);
};

/// Ascending indices of word tokens that are negators.
[[nodiscard]] std::vector<std::size_t> find_negators(const text::Sentence &sentence,
                                                     const NegatorLexicon &lexicon = NegatorLexicon::defaults());

/// Positive iff some clause holds two or more negators.
[[nodiscard]] Label tag_multiple_negation(const text::Sentence &sentence,
                                          const NegatorLexicon &lexicon = NegatorLexicon::defaults(),
                                          const text::BoundaryConfig &boundaries = text::BoundaryConfig::defaults());

}  // namespace aaetag::negation
