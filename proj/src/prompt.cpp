#include "aaetag/prompt.hpp"

#include "aaetag/dataset.hpp"
#include "aaetag/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <map>

namespace aaetag::llm {

namespace {

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string classify_suffix(const PromptSpec &spec) {
    return fmt::format("' as '{}' or '{}' in one word while preserving the numbering at the start of the prompt.",
                       spec.feature_label, spec.contrast_label);
}

std::vector<std::string_view> split_lines(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t end = s.find('\n', pos);
        if (end == std::string_view::npos) {
            end = s.size();
        }
        std::string_view line = s.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        out.push_back(line);
        pos = end + 1;
    }
    return out;
}

/// "12. text", "12) text", "**12.** text", "- 12: text" -> (12, "text").
std::optional<std::pair<std::size_t, std::string_view>> numbered(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && (std::isspace(static_cast<unsigned char>(line[i])) != 0 || line[i] == '*' ||
                               line[i] == '#' || line[i] == '-' || line[i] == '>')) {
        ++i;
    }
    const std::size_t digits_at = i;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i])) != 0) {
        ++i;
    }
    if (i == digits_at || i - digits_at > 6 || i >= line.size() || (line[i] != '.' && line[i] != ')' && line[i] != ':')) {
        return std::nullopt;
    }
    const std::size_t n = std::stoul(std::string(line.substr(digits_at, i - digits_at)));
    ++i;
    while (i < line.size() && (line[i] == '*' || std::isspace(static_cast<unsigned char>(line[i])) != 0)) {
        ++i;
    }
    return std::make_pair(n, line.substr(i));
}

bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '-' || c == '_';
}

/// Occurrences of `needle` bounded by non-word characters; each match is blanked out of `hay`.
std::size_t take_matches(std::string &hay, const std::string &needle) {
    if (needle.empty()) {
        return 0;
    }
    std::size_t found = 0;
    std::size_t pos = 0;
    while ((pos = hay.find(needle, pos)) != std::string::npos) {
        const bool left_ok = pos == 0 || !word_char(hay[pos - 1]);
        const std::size_t end = pos + needle.size();
        const bool right_ok = end >= hay.size() || !word_char(hay[end]);
        if (left_ok && right_ok) {
            std::fill(hay.begin() + static_cast<std::ptrdiff_t>(pos), hay.begin() + static_cast<std::ptrdiff_t>(end), ' ');
            ++found;
        }
        pos = end;
    }
    return found;
}

/// Longest-first match of two candidate strings; nullopt status when neither occurs.
std::optional<ParsedItem> match_pair(std::string hay, const std::string &positive, const std::string &negative) {
    const bool positive_longer = positive.size() >= negative.size();
    const std::string &first = positive_longer ? positive : negative;
    const std::string &second = positive_longer ? negative : positive;
    const bool has_first = take_matches(hay, first) > 0;
    const bool has_second = take_matches(hay, second) > 0;
    if (has_first && has_second) {
        return ParsedItem{std::nullopt, ParseStatus::ambiguous};
    }
    if (!has_first && !has_second) {
        return std::nullopt;
    }
    const bool is_positive = has_first == positive_longer;
    return ParsedItem{label_from_bool(is_positive), ParseStatus::parsed};
}

std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (const char c : s) {
        if (std::isspace(static_cast<unsigned char>(c)) != 0) {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) {
        out.push_back(cur);
    }
    return out;
}

std::string join(const std::vector<std::string> &w, std::size_t count) {
    std::string out;
    for (std::size_t i = 0; i < count; ++i) {
        out += (i ? " " : "") + w[i];
    }
    return out;
}

/// The two labels with their shared trailing words removed ("habitual be" -> "habitual"), or
/// nothing when that would leave either empty or leave nothing to strip.
std::optional<std::pair<std::string, std::string>> label_cores(const std::string &a, const std::string &b) {
    const auto wa = words(a);
    const auto wb = words(b);
    std::size_t shared = 0;
    while (shared < wa.size() && shared < wb.size() && wa[wa.size() - 1 - shared] == wb[wb.size() - 1 - shared]) {
        ++shared;
    }
    if (shared == 0 || shared >= wa.size() || shared >= wb.size()) {
        return std::nullopt;
    }
    return std::make_pair(join(wa, wa.size() - shared), join(wb, wb.size() - shared));
}

ParsedItem classify(std::string_view answer, const PromptSpec &spec) {
    const std::string hay = lowercase(answer);
    const std::string pos = lowercase(spec.feature_label);
    const std::string neg = lowercase(spec.contrast_label);
    if (auto hit = match_pair(hay, pos, neg)) {
        return *hit;
    }
    if (const auto cores = label_cores(pos, neg)) {
        if (auto hit = match_pair(hay, cores->first, cores->second)) {
            return *hit;
        }
    }
    return ParsedItem{std::nullopt, ParseStatus::no_label};
}

}  // namespace

void PromptSpec::validate() const {
    if (feature_label.empty() || contrast_label.empty()) {
        throw InputError("prompt: labels must be nonempty");
    }
    if (lowercase(feature_label) == lowercase(contrast_label)) {
        throw InputError("prompt: the two labels must differ");
    }
    if (mode == PromptMode::few_shot && examples.empty()) {
        throw InputError("prompt: few-shot mode needs at least one example");
    }
}

PromptSpec spec_for_feature(std::string_view feature, PromptMode mode) {
    PromptSpec spec;
    spec.mode = mode;
    if (feature == data::habitual_be) {
        spec.feature_label = "habitual be";
        spec.contrast_label = "non-habitual be";
    } else if (feature == data::multiple_negation) {
        spec.feature_label = "multiple negation";
        spec.contrast_label = "no multiple negation";
    } else {
        throw InputError(fmt::format("no prompt labels for feature \"{}\"", feature));
    }
    return spec;
}

std::string build_zero_shot_prompt(const std::vector<std::string> &batch, const PromptSpec &spec) {
    if (batch.empty()) {
        throw InputError("prompt: empty batch");
    }
    if (spec.feature_label.empty() || spec.contrast_label.empty()) {
        throw InputError("prompt: labels must be nonempty");
    }
    const std::string suffix = classify_suffix(spec);
    std::string out;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (i > 0) {
            out += '\n';
        }
        out += fmt::format("{}. Classify the sentence '{}{}", i + 1, batch[i], suffix);
    }
    return out;
}

std::string build_few_shot_prompt(const std::vector<std::string> &batch, const PromptSpec &spec) {
    if (spec.examples.empty()) {
        throw InputError("prompt: few-shot mode needs at least one example");
    }
    std::string out(few_shot_preamble);
    out += "\n\n";
    for (const FewShotExample &ex : spec.examples) {
        out += fmt::format("Sentence: {}\nLabel: {}\n\n", ex.sentence, spec.label_text(ex.label));
    }
    out += build_zero_shot_prompt(batch, spec);
    return out;
}

std::string build_prompt(const std::vector<std::string> &batch, const PromptSpec &spec) {
    return spec.mode == PromptMode::few_shot ? build_few_shot_prompt(batch, spec) : build_zero_shot_prompt(batch, spec);
}

std::vector<ParsedItem> parse_response(std::string_view raw, std::size_t batch_size, const PromptSpec &spec) {
    // Answer text per number: the numbered line plus any unnumbered lines after it.
    std::map<std::size_t, std::string> answers;
    std::optional<std::size_t> current;
    for (const std::string_view line : split_lines(raw)) {
        if (const auto num = numbered(line)) {
            current = num->first;
            if (answers.contains(*current)) {
                current.reset();  // first occurrence wins
                continue;
            }
            answers[*current] = std::string(num->second);
        } else if (current) {
            answers[*current] += '\n';
            answers[*current] += line;
        }
    }

    std::vector<ParsedItem> out;
    out.reserve(batch_size);
    for (std::size_t i = 1; i <= batch_size; ++i) {
        const auto it = answers.find(i);
        if (it != answers.end()) {
            out.push_back(classify(it->second, spec));
        } else if (batch_size == 1) {
            out.push_back(classify(raw, spec));
        } else {
            out.push_back(ParsedItem{std::nullopt, ParseStatus::missing_line});
        }
    }
    return out;
}

std::string_view to_string(ParseStatus status) noexcept {
    switch (status) {
        case ParseStatus::parsed:
            return "parsed";
        case ParseStatus::missing_line:
            return "missing_line";
        case ParseStatus::no_label:
            return "no_label";
        case ParseStatus::ambiguous:
            return "ambiguous";
    }
    return "unknown";
}

std::vector<std::string> extract_queries(std::string_view prompt, const PromptSpec &spec) {
    const std::string suffix = classify_suffix(spec);
    constexpr std::string_view lead = ". Classify the sentence '";
    std::vector<std::string> out;
    for (const std::string_view line : split_lines(prompt)) {
        const std::size_t at = line.find(lead);
        if (at == std::string_view::npos || !line.ends_with(suffix)) {
            continue;
        }
        const std::string_view number = line.substr(0, at);
        if (number.empty() || !std::all_of(number.begin(), number.end(),
                                           [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; })) {
            continue;
        }
        const std::size_t begin = at + lead.size();
        out.emplace_back(line.substr(begin, line.size() - suffix.size() - begin));
    }
    return out;
}

}  // namespace aaetag::llm
