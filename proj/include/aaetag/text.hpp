#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace aaetag::text {

enum class TokenKind { word, punctuation };

struct Token {
    std::string surface;
    std::string lower;
    std::size_t index = 0;
    /// Byte offsets [start, end) into the raw sentence.
    std::size_t start = 0;
    std::size_t end = 0;
    TokenKind kind = TokenKind::word;

    [[nodiscard]] bool is_word() const noexcept { return kind == TokenKind::word; }
    friend bool operator==(const Token &, const Token &) = default;
};

struct Sentence {
    std::string id;
    std::string raw;
    std::vector<Token> tokens;
};

enum class BoundaryCause { sentence_start, punctuation, conjunction };

/// Half-open token index range [first, last).
struct Clause {
    std::size_t first = 0;
    std::size_t last = 0;
    BoundaryCause cause = BoundaryCause::sentence_start;

    [[nodiscard]] std::size_t size() const noexcept { return last - first; }
    friend bool operator==(const Clause &, const Clause &) = default;
};

/// Punctuation tokens and conjunctions that delimit clauses.
struct BoundaryConfig {
    std::set<std::string> punctuation;
    std::set<std::string> conjunctions;

    /// True for a member of `punctuation`, or a run of one repeated member character ("...", "!!").
    [[nodiscard]] bool is_boundary_punctuation(std::string_view surface) const;
    [[nodiscard]] bool is_conjunction(std::string_view lower) const;

    /// The tables shipped in data/boundaries.json.
    static const BoundaryConfig &defaults();
    static BoundaryConfig from_json(std::string_view json_text);
    static BoundaryConfig load(const std::filesystem::path &path);
};

/// Splits on whitespace, then peels punctuation off each chunk. Apostrophes and hyphens between
/// letters stay inside the word ("ain't", "middle-class"); ":", "." and "," between digits stay
/// inside numbers ("7:30"). Runs of one repeated punctuation character become one token.
[[nodiscard]] std::vector<Token> tokenize(std::string_view raw);

[[nodiscard]] Sentence make_sentence(std::string id, std::string raw);

[[nodiscard]] std::vector<Clause> segment_clauses(const Sentence &sentence,
                                                  const BoundaryConfig &config = BoundaryConfig::defaults());

/// Rebuilds the raw text from token spans and the original gaps.
[[nodiscard]] std::string detokenize(std::string_view raw, const std::vector<Token> &tokens);

[[nodiscard]] std::string casefold(std::string_view s);
[[nodiscard]] bool is_punctuation_text(std::string_view s);

[[nodiscard]] std::string_view to_string(BoundaryCause cause) noexcept;

}  // namespace aaetag::text
