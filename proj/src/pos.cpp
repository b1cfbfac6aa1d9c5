#include "aaetag/pos.hpp"

#include "aaetag/error.hpp"
#include "aaetag/json_io.hpp"
#include "embedded_data.hpp"

#include <algorithm>
#include <cctype>

namespace aaetag::pos {

namespace {

// A word listed under several tags gets the first of these.
constexpr PosTag lexicon_precedence[] = {PosTag::PRON, PosTag::DET,  PosTag::ADP, PosTag::CONJ,
                                         PosTag::PART, PosTag::VERB, PosTag::ADV, PosTag::ADJ,
                                         PosTag::NUM,  PosTag::NOUN, PosTag::X};

bool looks_numeric(std::string_view s) {
    bool digit = false;
    for (const char c : s) {
        if (std::isdigit(static_cast<unsigned char>(c)) != 0) {
            digit = true;
        } else if (c != ':' && c != '.' && c != ',') {
            return false;
        }
    }
    return digit;
}

}  // namespace

std::string_view to_string(PosTag tag) noexcept {
    switch (tag) {
        case PosTag::NOUN: return "NOUN";
        case PosTag::VERB: return "VERB";
        case PosTag::ADJ: return "ADJ";
        case PosTag::ADV: return "ADV";
        case PosTag::PRON: return "PRON";
        case PosTag::DET: return "DET";
        case PosTag::ADP: return "ADP";
        case PosTag::CONJ: return "CONJ";
        case PosTag::NUM: return "NUM";
        case PosTag::PART: return "PART";
        case PosTag::PUNCT: return "PUNCT";
        case PosTag::X: return "X";
    }
    return "X";
}

std::optional<PosTag> parse_tag(std::string_view name) noexcept {
    for (const PosTag t : all_tags) {
        if (to_string(t) == name) {
            return t;
        }
    }
    return std::nullopt;
}

Tagger::Tagger(std::unordered_map<std::string, PosTag> lexicon, std::vector<SuffixRule> suffixes, std::size_t min_stem) :
    lexicon_(std::move(lexicon)), suffixes_(std::move(suffixes)), min_stem_(min_stem) {}

Tagger Tagger::from_json(std::string_view lexicon_json, std::string_view suffix_json) {
    const nlohmann::json lex = io::parse_json(lexicon_json, "POS lexicon");
    if (!lex.is_object()) {
        throw InputError("POS lexicon: expected an object of tag -> word list");
    }
    for (const auto &[key, _] : lex.items()) {
        if (!parse_tag(key)) {
            throw InputError("POS lexicon: unknown tag \"" + key + "\"");
        }
    }
    std::unordered_map<std::string, PosTag> lexicon;
    for (const PosTag tag : lexicon_precedence) {
        const auto it = lex.find(std::string(to_string(tag)));
        if (it == lex.end()) {
            continue;
        }
        for (const auto &word : *it) {
            lexicon.try_emplace(text::casefold(word.get<std::string>()), tag);
        }
    }

    const nlohmann::json suf = io::parse_json(suffix_json, "POS suffix table");
    std::vector<SuffixRule> rules;
    for (const auto &rule : suf.at("rules")) {
        const auto tag_name = rule.at("tag").get<std::string>();
        const auto tag = parse_tag(tag_name);
        if (!tag) {
            throw InputError("POS suffix table: unknown tag \"" + tag_name + "\"");
        }
        rules.push_back(SuffixRule{rule.at("suffix").get<std::string>(), *tag});
    }
    return Tagger(std::move(lexicon), std::move(rules), suf.value("min_stem", std::size_t{2}));
}

const Tagger &Tagger::defaults() {
    static const Tagger tagger = from_json(embedded::pos_lexicon_json, embedded::pos_suffixes_json);
    return tagger;
}

PosTag Tagger::tag_word(std::string_view lower) const {
    if (const auto it = lexicon_.find(std::string(lower)); it != lexicon_.end()) {
        return it->second;
    }
    for (const SuffixRule &rule : suffixes_) {
        if (lower.size() >= rule.suffix.size() + min_stem_ && lower.ends_with(rule.suffix)) {
            return rule.tag;
        }
    }
    if (looks_numeric(lower)) {
        return PosTag::NUM;
    }
    return PosTag::NOUN;
}

std::vector<PosTag> Tagger::tag(const text::Sentence &sentence) const {
    std::vector<PosTag> out;
    out.reserve(sentence.tokens.size());
    for (const text::Token &t : sentence.tokens) {
        out.push_back(t.is_word() ? tag_word(t.lower) : PosTag::PUNCT);
    }
    return out;
}

}  // namespace aaetag::pos
