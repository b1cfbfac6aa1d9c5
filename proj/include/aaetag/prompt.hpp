#pragma once

#include "aaetag/label.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace aaetag::llm {

enum class PromptMode { zero_shot, few_shot };

struct FewShotExample {
    std::string sentence;
    /// Positive examples carry the feature label, negative ones the contrast label.
    Label label = Label::negative;
};

struct PromptSpec {
    /// Answer meaning "feature present", e.g. "habitual be".
    std::string feature_label;
    /// Answer meaning "feature absent", e.g. "non-habitual be".
    std::string contrast_label;
    PromptMode mode = PromptMode::zero_shot;
    std::vector<FewShotExample> examples;

    [[nodiscard]] const std::string &label_text(Label l) const {
        return l == Label::positive ? feature_label : contrast_label;
    }
    /// Throws InputError on empty or identical labels.
    void validate() const;
};

/// Preset label pairs for the two shipped features.
[[nodiscard]] PromptSpec spec_for_feature(std::string_view feature, PromptMode mode = PromptMode::zero_shot);

inline constexpr std::string_view few_shot_preamble = "I have given a few classified train examples";

/// One line per sentence, numbered from 1:
/// `N. Classify the sentence '<s>' as '<A>' or '<B>' in one word while preserving the numbering at the start of the prompt.`
/// Sentences are inserted verbatim (no quote escaping).
[[nodiscard]] std::string build_zero_shot_prompt(const std::vector<std::string> &batch, const PromptSpec &spec);

/// Preamble, then a `Sentence: ... / Label: ...` block per example, then the numbered lines.
[[nodiscard]] std::string build_few_shot_prompt(const std::vector<std::string> &batch, const PromptSpec &spec);

[[nodiscard]] std::string build_prompt(const std::vector<std::string> &batch, const PromptSpec &spec);

enum class ParseStatus { parsed, missing_line, no_label, ambiguous };

struct ParsedItem {
    std::optional<Label> label;
    ParseStatus status = ParseStatus::missing_line;
};

/// Finds the answer for each index 1..batch_size and matches the label strings longest first, so
/// "non-habitual be" is never read as "habitual be". Failures are reported per item, never thrown.
[[nodiscard]] std::vector<ParsedItem> parse_response(std::string_view raw, std::size_t batch_size, const PromptSpec &spec);

[[nodiscard]] std::string_view to_string(ParseStatus status) noexcept;

/// The sentences of the numbered classification lines in a rendered prompt, in order.
[[nodiscard]] std::vector<std::string> extract_queries(std::string_view prompt, const PromptSpec &spec);

}  // namespace aaetag::llm
