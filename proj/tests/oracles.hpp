#pragma once

// Reference implementations used only by the tests. They share no code path with the library
// beyond reading the same JSON tables from disk.

#include <json.hpp>

#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#ifndef AAETAG_SOURCE_DIR
#define AAETAG_SOURCE_DIR "."
#endif

namespace oracle {

inline std::string source_path(const std::string &rel) { return std::string(AAETAG_SOURCE_DIR) + "/" + rel; }

inline std::string slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline nlohmann::json load(const std::string &rel) { return nlohmann::json::parse(slurp(source_path(rel))); }

/// Whitespace split, then leading/trailing ASCII punctuation peeled off one character at a time.
/// Word-internal characters are left alone. Enough for template-generated text.
inline std::vector<std::string> simple_tokens(const std::string &s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string chunk;
    auto punct = [](char c) { return std::ispunct(static_cast<unsigned char>(c)) != 0 && c != '\''; };
    while (in >> chunk) {
        std::vector<std::string> tail;
        std::size_t b = 0;
        std::size_t e = chunk.size();
        while (b < e && punct(chunk[b])) {
            out.emplace_back(1, chunk[b++]);
        }
        while (e > b && punct(chunk[e - 1])) {
            tail.emplace_back(1, chunk[--e]);
        }
        if (b < e) {
            out.push_back(chunk.substr(b, e - b));
        }
        out.insert(out.end(), tail.rbegin(), tail.rend());
    }
    for (auto &t : out) {
        for (auto &c : t) {
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    return out;
}

/// Multiple Negation by brute force over every pair of negators: positive iff some pair has no
/// boundary between them (a boundary punctuation token strictly inside, or a conjunction that
/// opens the later token's clause).
struct NegationOracle {
    std::set<std::string> negators;
    std::set<std::string> punctuation;
    std::set<std::string> conjunctions;

    NegationOracle() {
        const auto n = load("data/negators.json");
        for (const auto &w : n.at("negators")) {
            negators.insert(w.get<std::string>());
        }
        const auto b = load("data/boundaries.json");
        for (const auto &p : b.at("punctuation")) {
            punctuation.insert(p.get<std::string>());
        }
        for (const auto &c : b.at("conjunctions")) {
            conjunctions.insert(c.get<std::string>());
        }
    }

    [[nodiscard]] bool is_negator(const std::string &w) const {
        return negators.count(w) > 0 || (w.size() >= 3 && w.compare(w.size() - 3, 3, "n't") == 0);
    }

    [[nodiscard]] bool positive(const std::string &sentence) const {
        const auto toks = simple_tokens(sentence);
        for (std::size_t i = 0; i < toks.size(); ++i) {
            for (std::size_t j = i + 1; j < toks.size(); ++j) {
                if (!is_negator(toks[i]) || !is_negator(toks[j])) {
                    continue;
                }
                bool separated = false;
                for (std::size_t k = i + 1; k <= j && !separated; ++k) {
                    separated = (k < j && punctuation.count(toks[k]) > 0) || conjunctions.count(toks[k]) > 0;
                }
                if (!separated) {
                    return true;
                }
            }
        }
        return false;
    }
};

struct Report {
    double p_pos, p_neg, r_pos, r_neg, f_pos, f_neg, f_w;
};

/// Textbook formulas, zero where a denominator is zero.
inline Report report(double tp, double fp, double tn, double fn) {
    auto div = [](double a, double b) { return b == 0.0 ? 0.0 : a / b; };
    Report r{};
    r.p_pos = div(tp, tp + fp);
    r.p_neg = div(tn, tn + fn);
    r.r_pos = div(tp, tp + fn);
    r.r_neg = div(tn, tn + fp);
    r.f_pos = div(2 * r.p_pos * r.r_pos, r.p_pos + r.r_pos);
    r.f_neg = div(2 * r.p_neg * r.r_neg, r.p_neg + r.r_neg);
    r.f_w = div((tp + fn) * r.f_pos + (tn + fp) * r.f_neg, tp + fp + tn + fn);
    return r;
}

}  // namespace oracle
