#include "aaetag/negation.hpp"

#include "aaetag/error.hpp"
#include "aaetag/json_io.hpp"
#include "embedded_data.hpp"

namespace aaetag::negation {

bool NegatorLexicon::is_negator(std::string_view lower) const {
    if (entries.contains(std::string(lower))) {
        return true;
    }
    return nt_suffix && lower.size() > 3 && lower.ends_with("n't");
}

NegatorLexicon NegatorLexicon::from_json(std::string_view json_text) {
    const nlohmann::json j = io::parse_json(json_text, "negator lexicon");
    if (!j.contains("negators") || !j.at("negators").is_array()) {
        throw InputError("negator lexicon: missing array \"negators\"");
    }
    NegatorLexicon lexicon;
    for (const auto &item : j.at("negators")) {
        if (!item.is_string()) {
            throw InputError("negator lexicon: non-string entry");
        }
        const auto word = item.get<std::string>();
        if (text::casefold(word) != word) {
            throw InputError("negator lexicon: entry \"" + word + "\" is not lowercase");
        }
        lexicon.entries.insert(word);
    }
    if (lexicon.entries.empty()) {
        throw InputError("negator lexicon: no entries");
    }
    lexicon.nt_suffix = j.value("nt_suffix", true);
    return lexicon;
}

NegatorLexicon NegatorLexicon::load(const std::filesystem::path &path) {
    return from_json(io::read_text_file(path));
}

const NegatorLexicon &NegatorLexicon::defaults() {
    static const NegatorLexicon lexicon = from_json(embedded::negators_json);
    return lexicon;
}

std::vector<std::size_t> find_negators(const text::Sentence &sentence, const NegatorLexicon &lexicon) {
    std::vector<std::size_t> out;
    for (const text::Token &t : sentence.tokens) {
        if (t.is_word() && lexicon.is_negator(t.lower)) {
            out.push_back(t.index);
        }
    }
    return out;
}

Label tag_multiple_negation(const text::Sentence &sentence, const NegatorLexicon &lexicon,
                            const text::BoundaryConfig &boundaries) {
    const std::vector<std::size_t> negators = find_negators(sentence, lexicon);
    if (negators.size() < 2) {
        return Label::negative;
    }
    // Both lists are sorted, so one sweep counts negators per clause.
    std::size_t n = 0;
    for (const text::Clause &clause : text::segment_clauses(sentence, boundaries)) {
        std::size_t in_clause = 0;
        while (n < negators.size() && negators[n] < clause.last) {
            if (negators[n] >= clause.first) {
                ++in_clause;
            }
            ++n;
        }
        if (in_clause >= 2) {
            return Label::positive;
        }
    }
    return Label::negative;
}

}  // namespace aaetag::negation
