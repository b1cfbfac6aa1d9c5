#pragma once

#include "aaetag/label.hpp"
#include "aaetag/text.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace aaetag::data {

inline constexpr std::string_view habitual_be = "habitual_be";
inline constexpr std::string_view multiple_negation = "multiple_negation";

struct Record {
    std::string id;
    std::string text;
    /// feature name -> 0/1
    std::map<std::string, int> labels;
    std::optional<int> formality;
    std::string source;

    [[nodiscard]] Label label(const std::string &feature) const;
    [[nodiscard]] text::Sentence sentence() const { return text::make_sentence(id, text); }
};

struct Dataset {
    std::vector<Record> records;
    std::vector<std::string> schema;
    std::vector<std::string> provenance;

    [[nodiscard]] std::size_t size() const noexcept { return records.size(); }
    [[nodiscard]] bool empty() const noexcept { return records.empty(); }
    [[nodiscard]] std::size_t count(const std::string &feature, Label label) const;
    [[nodiscard]] bool has_formality() const;

    /// Throws InputError on duplicate ids, non-binary labels or labels outside the schema.
    void validate() const;
};

struct LoadOptions {
    char delimiter = '\t';
};

/// Header: id, text, one column per schema feature, optional `formality` and `source` columns.
/// An empty schema accepts every other column as a feature. Errors name the 1-based line.
[[nodiscard]] Dataset load_dataset(const std::filesystem::path &path, const std::vector<std::string> &schema = {},
                                   const LoadOptions &options = {});
[[nodiscard]] Dataset parse_dataset(std::string_view contents, const std::vector<std::string> &schema = {},
                                    const LoadOptions &options = {});

[[nodiscard]] std::string to_tsv(const Dataset &dataset);
[[nodiscard]] std::string to_jsonl(const Dataset &dataset);

/// Desired positive:negative proportion, e.g. {1, 1} or {373, 401}.
struct Ratio {
    double positive = 1.0;
    double negative = 1.0;
};

/// Subsamples the majority class (seeded) to reach `ratio`; survivors keep their order.
/// Only the majority class shrinks, so attainable ratios run from the current one to 1:1.
[[nodiscard]] Dataset balance(const Dataset &dataset, const std::string &feature, Ratio ratio, std::uint64_t seed);

struct FoldCounts {
    std::size_t positive = 0;
    std::size_t negative = 0;
    [[nodiscard]] std::size_t total() const noexcept { return positive + negative; }
};

struct FoldPlan {
    /// fold index per record, aligned with Dataset::records
    std::vector<std::size_t> assignment;
    std::size_t folds = 0;
    std::vector<FoldCounts> counts;

    [[nodiscard]] std::vector<std::size_t> test_indices(std::size_t fold) const;
    [[nodiscard]] std::vector<std::size_t> train_indices(std::size_t fold) const;
};

/// Stratified partition: each class is shuffled with `seed` and dealt round-robin, the negatives
/// continuing where the positives stopped, so fold sizes differ by at most one.
[[nodiscard]] FoldPlan kfold(const Dataset &dataset, const std::string &feature, std::size_t folds, std::uint64_t seed);

[[nodiscard]] Dataset subset(const Dataset &dataset, const std::vector<std::size_t> &indices);

// ---------------------------------------------------------------------------------------------
// Template augmentation

/// A sentence skeleton. Tokens naming a POS tag ("PRON", optionally refined as "VERB.ing") are
/// slots filled from the lexicon entry of the same name; all other tokens are literal.
struct Template {
    std::vector<std::string> tokens;
    int label = 1;
    /// False for skeletons whose gold label disagrees with what the clause rule can see.
    bool rule_consistent = true;
};

struct TemplateSet {
    std::string feature;
    std::vector<Template> templates;

    static TemplateSet from_json(const nlohmann::json &j);
    static TemplateSet load(const std::filesystem::path &path);
};

/// slot name -> substitution words
using SlotLexicon = std::map<std::string, std::vector<std::string>>;
[[nodiscard]] SlotLexicon load_slot_lexicon(const std::filesystem::path &path);
[[nodiscard]] SlotLexicon slot_lexicon_from_json(const nlohmann::json &j);

[[nodiscard]] bool is_slot(std::string_view token);

struct AugmentResult {
    std::vector<Record> records;
    std::vector<std::string> warnings;
};

struct AugmentOptions {
    std::string feature;
    std::string id_prefix = "aug";
    /// Reject draws that do not hold exactly one "be" token.
    bool require_single_be = false;
    /// Texts that generated sentences should avoid repeating.
    std::vector<std::string> existing_texts;
};

/// Draws `target_count` sentences, picking a usable template uniformly per draw. Templates with an
/// empty slot are skipped with a warning; labels come from the template.
[[nodiscard]] AugmentResult augment(std::size_t target_count, const std::vector<Template> &templates,
                                    const SlotLexicon &lexicon, std::uint64_t seed, const AugmentOptions &options);

/// Habitual Be augmentation: every generated sentence carries exactly one "be"; ids continue
/// after `records` and never repeat an existing text when avoidable.
[[nodiscard]] AugmentResult augment_habitual(const std::vector<Record> &records, std::size_t target_count,
                                             const std::vector<Template> &templates, const SlotLexicon &lexicon,
                                             std::uint64_t seed);

/// Skeletons derived from labelled sentences: tokens whose POS is in `open_tags` become slots.
[[nodiscard]] std::vector<Template> templates_from_records(const std::vector<Record> &records, const std::string &feature,
                                                          const std::vector<std::string> &open_tags = {"NOUN", "ADJ",
                                                                                                       "NUM", "PRON"});

/// Renders a token list as a sentence: punctuation attaches to the previous word, first letter upper-cased.
[[nodiscard]] std::string render_tokens(const std::vector<std::string> &tokens);

/// Template index recorded in an augmented record's source, if any.
[[nodiscard]] std::optional<std::size_t> template_index(const Record &record);

}  // namespace aaetag::data
