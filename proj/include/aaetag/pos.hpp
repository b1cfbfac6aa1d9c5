#pragma once

#include "aaetag/text.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace aaetag::pos {

enum class PosTag { NOUN, VERB, ADJ, ADV, PRON, DET, ADP, CONJ, NUM, PART, PUNCT, X };

inline constexpr std::array all_tags = {PosTag::NOUN, PosTag::VERB, PosTag::ADJ,  PosTag::ADV,
                                        PosTag::PRON, PosTag::DET,  PosTag::ADP,  PosTag::CONJ,
                                        PosTag::NUM,  PosTag::PART, PosTag::PUNCT, PosTag::X};

[[nodiscard]] std::string_view to_string(PosTag tag) noexcept;
[[nodiscard]] std::optional<PosTag> parse_tag(std::string_view name) noexcept;

struct SuffixRule {
    std::string suffix;
    PosTag tag;
};

/// Deterministic lexicon + suffix tagger.
///
/// Lookup order per word token: closed-class/common-word lexicon, then suffix rules in table
/// order (a rule fires only if at least `min_stem` bytes remain), then digits -> NUM, then NOUN.
/// Punctuation tokens are always PUNCT.
class Tagger {
  public:
    Tagger(std::unordered_map<std::string, PosTag> lexicon, std::vector<SuffixRule> suffixes, std::size_t min_stem);

    /// Tables from data/pos/lexicon.json and data/pos/suffixes.json.
    static const Tagger &defaults();
    static Tagger from_json(std::string_view lexicon_json, std::string_view suffix_json);

    [[nodiscard]] PosTag tag_word(std::string_view lower) const;
    [[nodiscard]] std::vector<PosTag> tag(const text::Sentence &sentence) const;

  private:
    std::unordered_map<std::string, PosTag> lexicon_;
    std::vector<SuffixRule> suffixes_;
    std::size_t min_stem_;
};

[[nodiscard]] inline std::vector<PosTag> tag_pos(const text::Sentence &sentence) {
    return Tagger::defaults().tag(sentence);
}

}  // namespace aaetag::pos
