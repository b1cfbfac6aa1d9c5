#include "aaetag/text.hpp"

#include "aaetag/error.hpp"
#include "aaetag/json_io.hpp"
#include "embedded_data.hpp"

#include <algorithm>
#include <cctype>

namespace aaetag::text {

namespace {

constexpr std::string_view right_single_quote = "\xE2\x80\x99";

// Multi-byte punctuation we recognise: en/em dash, curly quotes, ellipsis.
constexpr std::string_view unicode_punctuation[] = {
    "\xE2\x80\x93", "\xE2\x80\x94", "\xE2\x80\x98", "\xE2\x80\x99",
    "\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\xA6",
};

bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::size_t utf8_length(unsigned char lead) noexcept {
    if (lead < 0x80) {
        return 1;
    }
    if ((lead >> 5) == 0x6) {
        return 2;
    }
    if ((lead >> 4) == 0xE) {
        return 3;
    }
    if ((lead >> 3) == 0x1E) {
        return 4;
    }
    return 1;  // stray continuation byte: treat as a single unit
}

struct Unit {
    std::size_t start;
    std::string_view text;
    bool punct;
};

bool unit_is_punct(std::string_view u) noexcept {
    if (u.size() == 1) {
        return std::ispunct(static_cast<unsigned char>(u[0])) != 0;
    }
    return std::find(std::begin(unicode_punctuation), std::end(unicode_punctuation), u) != std::end(unicode_punctuation);
}

bool unit_is_digit(const Unit &u) noexcept {
    return u.text.size() == 1 && std::isdigit(static_cast<unsigned char>(u.text[0])) != 0;
}

bool unit_is_alnum(const Unit &u) noexcept {
    return !u.punct;  // non-ASCII non-punctuation code points count as letters
}

bool unit_is_letter(const Unit &u) noexcept {
    return !u.punct && !unit_is_digit(u);
}

bool is_apostrophe(std::string_view u) noexcept {
    return u == "'" || u == right_single_quote;
}

// Punctuation unit i that stays inside a word.
bool is_internal(const std::vector<Unit> &units, std::size_t i) {
    if (i == 0 || i + 1 >= units.size()) {
        return false;
    }
    const Unit &prev = units[i - 1];
    const Unit &next = units[i + 1];
    const std::string_view u = units[i].text;
    if (is_apostrophe(u)) {
        return unit_is_alnum(prev) && unit_is_letter(next);
    }
    if (u == "-") {
        return unit_is_alnum(prev) && unit_is_alnum(next);
    }
    if (u == ":" || u == "." || u == ",") {
        return unit_is_digit(prev) && unit_is_digit(next);
    }
    return false;
}

std::set<std::string> string_set(const nlohmann::json &j, const char *key) {
    if (!j.contains(key) || !j.at(key).is_array()) {
        throw InputError(std::string("boundary config: missing array \"") + key + "\"");
    }
    std::set<std::string> out;
    for (const auto &item : j.at(key)) {
        if (!item.is_string()) {
            throw InputError(std::string("boundary config: non-string entry in \"") + key + "\"");
        }
        out.insert(item.get<std::string>());
    }
    return out;
}

}  // namespace

std::string casefold(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size();) {
        if (s.substr(i, right_single_quote.size()) == right_single_quote) {
            out.push_back('\'');
            i += right_single_quote.size();
            continue;
        }
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(s[i]))));
        ++i;
    }
    return out;
}

bool is_punctuation_text(std::string_view s) {
    if (s.empty()) {
        return false;
    }
    for (std::size_t i = 0; i < s.size();) {
        const std::size_t len = std::min(utf8_length(static_cast<unsigned char>(s[i])), s.size() - i);
        if (!unit_is_punct(s.substr(i, len))) {
            return false;
        }
        i += len;
    }
    return true;
}

std::vector<Token> tokenize(std::string_view raw) {
    std::vector<Token> tokens;
    auto emit = [&](std::size_t start, std::size_t end, TokenKind kind) {
        Token t;
        t.surface = std::string(raw.substr(start, end - start));
        t.lower = casefold(t.surface);
        t.index = tokens.size();
        t.start = start;
        t.end = end;
        t.kind = kind;
        tokens.push_back(std::move(t));
    };

    std::size_t pos = 0;
    while (pos < raw.size()) {
        while (pos < raw.size() && is_space(raw[pos])) {
            ++pos;
        }
        const std::size_t chunk_start = pos;
        while (pos < raw.size() && !is_space(raw[pos])) {
            ++pos;
        }
        if (pos == chunk_start) {
            break;
        }

        std::vector<Unit> units;
        for (std::size_t i = chunk_start; i < pos;) {
            const std::size_t len = std::min(utf8_length(static_cast<unsigned char>(raw[i])), pos - i);
            const std::string_view u = raw.substr(i, len);
            units.push_back(Unit{i, u, unit_is_punct(u)});
            i += len;
        }

        std::size_t i = 0;
        while (i < units.size()) {
            const std::size_t start = units[i].start;
            if (units[i].punct && !is_internal(units, i)) {
                std::size_t j = i + 1;
                while (j < units.size() && units[j].text == units[i].text) {
                    ++j;
                }
                const std::size_t end = j < units.size() ? units[j].start : pos;
                emit(start, end, TokenKind::punctuation);
                i = j;
                continue;
            }
            std::size_t j = i + 1;
            while (j < units.size() && (!units[j].punct || is_internal(units, j))) {
                ++j;
            }
            const std::size_t end = j < units.size() ? units[j].start : pos;
            emit(start, end, TokenKind::word);
            i = j;
        }
    }
    return tokens;
}

Sentence make_sentence(std::string id, std::string raw) {
    Sentence s;
    s.id = std::move(id);
    s.raw = std::move(raw);
    s.tokens = tokenize(s.raw);
    return s;
}

std::string detokenize(std::string_view raw, const std::vector<Token> &tokens) {
    std::string out;
    std::size_t cursor = 0;
    for (const Token &t : tokens) {
        out.append(raw.substr(cursor, t.start - cursor));
        out.append(t.surface);
        cursor = t.end;
    }
    out.append(raw.substr(cursor));
    return out;
}

bool BoundaryConfig::is_boundary_punctuation(std::string_view surface) const {
    if (surface.empty()) {
        return false;
    }
    if (punctuation.contains(std::string(surface))) {
        return true;
    }
    const std::size_t len = std::min(utf8_length(static_cast<unsigned char>(surface[0])), surface.size());
    const std::string_view unit = surface.substr(0, len);
    if (surface.size() % len != 0) {
        return false;
    }
    for (std::size_t i = 0; i < surface.size(); i += len) {
        if (surface.substr(i, len) != unit) {
            return false;
        }
    }
    return punctuation.contains(std::string(unit));
}

bool BoundaryConfig::is_conjunction(std::string_view lower) const {
    return conjunctions.contains(std::string(lower));
}

BoundaryConfig BoundaryConfig::from_json(std::string_view json_text) {
    const nlohmann::json j = io::parse_json(json_text, "boundary config");
    BoundaryConfig config;
    config.punctuation = string_set(j, "punctuation");
    for (const std::string &c : string_set(j, "conjunctions")) {
        config.conjunctions.insert(casefold(c));
    }
    return config;
}

BoundaryConfig BoundaryConfig::load(const std::filesystem::path &path) {
    return from_json(io::read_text_file(path));
}

const BoundaryConfig &BoundaryConfig::defaults() {
    static const BoundaryConfig config = from_json(embedded::boundaries_json);
    return config;
}

std::vector<Clause> segment_clauses(const Sentence &sentence, const BoundaryConfig &config) {
    std::vector<Clause> clauses;
    std::size_t start = 0;
    BoundaryCause cause = BoundaryCause::sentence_start;
    bool has_word = false;
    bool first_clause = true;

    auto close = [&](std::size_t end) {
        if (has_word) {
            clauses.push_back(Clause{start, end, first_clause ? BoundaryCause::sentence_start : cause});
            first_clause = false;
        }
        has_word = false;
    };

    const auto &tokens = sentence.tokens;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Token &t = tokens[i];
        if (!t.is_word()) {
            if (config.is_boundary_punctuation(t.surface)) {
                close(i);
                start = i + 1;
                cause = BoundaryCause::punctuation;
            }
            continue;
        }
        if (config.is_conjunction(t.lower) && has_word) {
            close(i);
            start = i;
            cause = BoundaryCause::conjunction;
        } else if (config.is_conjunction(t.lower)) {
            // Nothing but punctuation before the conjunction: it opens this clause.
            start = i;
            cause = BoundaryCause::conjunction;
        }
        has_word = true;
    }
    close(tokens.size());
    return clauses;
}

std::string_view to_string(BoundaryCause cause) noexcept {
    switch (cause) {
        case BoundaryCause::sentence_start:
            return "sentence_start";
        case BoundaryCause::punctuation:
            return "punctuation";
        case BoundaryCause::conjunction:
            return "conjunction";
    }
    return "unknown";
}

}  // namespace aaetag::text
