#include "aaetag/dataset.hpp"

#include "aaetag/error.hpp"
#include "aaetag/json_io.hpp"
#include "aaetag/pos.hpp"
#include "aaetag/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_set>

namespace aaetag::data {

namespace {

constexpr std::string_view formality_column = "formality";
constexpr std::string_view source_column = "source";
constexpr std::string_view augmented_marker = "augmented=true;template=";

std::vector<std::string_view> split(std::string_view line, char delimiter) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

int parse_binary(std::string_view cell, std::size_t line_no, std::string_view column) {
    if (cell == "0") {
        return 0;
    }
    if (cell == "1") {
        return 1;
    }
    throw InputError(fmt::format("line {}: column \"{}\" holds \"{}\"; labels must be 0 or 1", line_no, column, cell));
}

void check_cell(std::string_view cell, std::string_view what) {
    if (cell.find_first_of("\t\n\r") != std::string_view::npos) {
        throw InputError(fmt::format("{} \"{}\" contains a tab or newline and cannot be written as TSV", what, cell));
    }
}

}  // namespace

Label Record::label(const std::string &feature) const {
    const auto it = labels.find(feature);
    if (it == labels.end()) {
        throw InputError(fmt::format("record {} has no label for feature \"{}\"", id, feature));
    }
    return label_from_bool(it->second == 1);
}

std::size_t Dataset::count(const std::string &feature, Label label) const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [&](const Record &r) { return r.label(feature) == label; }));
}

bool Dataset::has_formality() const {
    return std::any_of(records.begin(), records.end(), [](const Record &r) { return r.formality.has_value(); });
}

void Dataset::validate() const {
    std::unordered_set<std::string> ids;
    const std::set<std::string> features(schema.begin(), schema.end());
    for (const Record &r : records) {
        if (!ids.insert(r.id).second) {
            throw InputError("duplicate record id \"" + r.id + "\"");
        }
        for (const auto &[name, value] : r.labels) {
            if (!features.contains(name)) {
                throw InputError(fmt::format("record {}: feature \"{}\" is not in the schema", r.id, name));
            }
            if (value != 0 && value != 1) {
                throw InputError(fmt::format("record {}: label {} for \"{}\" is not binary", r.id, value, name));
            }
        }
    }
}

Dataset parse_dataset(std::string_view contents, const std::vector<std::string> &schema, const LoadOptions &options) {
    Dataset ds;
    ds.schema = schema;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    auto next_line = [&](std::string_view &line) {
        if (pos >= contents.size()) {
            return false;
        }
        std::size_t end = contents.find('\n', pos);
        if (end == std::string_view::npos) {
            end = contents.size();
        }
        line = contents.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        pos = end + 1;
        ++line_no;
        return true;
    };

    std::string_view header_line;
    while (next_line(header_line) && header_line.empty()) {
    }
    if (header_line.empty()) {
        return ds;  // empty file
    }

    const auto header = split(header_line, options.delimiter);
    if (header.size() < 2 || header[0] != "id" || header[1] != "text") {
        throw InputError(fmt::format("line {}: header must start with \"id\" and \"text\"", line_no));
    }
    std::optional<std::size_t> formality_at;
    std::optional<std::size_t> source_at;
    std::vector<std::pair<std::size_t, std::string>> feature_columns;
    const std::set<std::string> declared(schema.begin(), schema.end());
    for (std::size_t c = 2; c < header.size(); ++c) {
        const std::string name(header[c]);
        if (name == formality_column) {
            formality_at = c;
        } else if (name == source_column) {
            source_at = c;
        } else if (schema.empty() || declared.contains(name)) {
            feature_columns.emplace_back(c, name);
        } else {
            throw InputError(fmt::format("line {}: unknown feature column \"{}\"", line_no, name));
        }
    }
    if (schema.empty()) {
        for (const auto &[_, name] : feature_columns) {
            ds.schema.push_back(name);
        }
    } else {
        for (const std::string &feature : schema) {
            if (std::none_of(feature_columns.begin(), feature_columns.end(),
                             [&](const auto &fc) { return fc.second == feature; })) {
                throw InputError(fmt::format("header lacks a column for feature \"{}\"", feature));
            }
        }
    }

    std::unordered_set<std::string> ids;
    std::string_view line;
    while (next_line(line)) {
        if (line.empty()) {
            continue;
        }
        const auto cells = split(line, options.delimiter);
        if (cells.size() != header.size()) {
            throw InputError(fmt::format("line {}: expected {} fields, found {}", line_no, header.size(), cells.size()));
        }
        Record r;
        r.id = std::string(cells[0]);
        r.text = std::string(cells[1]);
        if (r.id.empty()) {
            throw InputError(fmt::format("line {}: empty id", line_no));
        }
        if (!ids.insert(r.id).second) {
            throw InputError(fmt::format("line {}: duplicate id \"{}\"", line_no, r.id));
        }
        for (const auto &[c, name] : feature_columns) {
            r.labels[name] = parse_binary(cells[c], line_no, name);
        }
        if (formality_at && !cells[*formality_at].empty()) {
            r.formality = parse_binary(cells[*formality_at], line_no, formality_column);
        }
        if (source_at) {
            r.source = std::string(cells[*source_at]);
        }
        ds.records.push_back(std::move(r));
    }
    return ds;
}

Dataset load_dataset(const std::filesystem::path &path, const std::vector<std::string> &schema, const LoadOptions &options) {
    Dataset ds = parse_dataset(io::read_text_file(path), schema, options);
    ds.provenance.push_back("loaded from " + path.string());
    return ds;
}

std::string to_tsv(const Dataset &dataset) {
    const bool formality = dataset.has_formality();
    const bool source = std::any_of(dataset.records.begin(), dataset.records.end(),
                                    [](const Record &r) { return !r.source.empty(); });
    std::string out = "id\ttext";
    for (const std::string &f : dataset.schema) {
        out += '\t' + f;
    }
    if (formality) {
        out += "\tformality";
    }
    if (source) {
        out += "\tsource";
    }
    out += '\n';
    for (const Record &r : dataset.records) {
        check_cell(r.id, "id");
        check_cell(r.text, "text");
        check_cell(r.source, "source");
        out += r.id + '\t' + r.text;
        for (const std::string &f : dataset.schema) {
            out += '\t' + std::to_string(to_int(r.label(f)));
        }
        if (formality) {
            out += '\t' + (r.formality ? std::to_string(*r.formality) : std::string());
        }
        if (source) {
            out += '\t' + r.source;
        }
        out += '\n';
    }
    return out;
}

std::string to_jsonl(const Dataset &dataset) {
    std::string out;
    for (const Record &r : dataset.records) {
        nlohmann::json j = {{"id", r.id}, {"text", r.text}, {"labels", r.labels}};
        j["formality"] = r.formality ? nlohmann::json(*r.formality) : nlohmann::json(nullptr);
        j["source"] = r.source;
        out += j.dump() + '\n';
    }
    return out;
}

Dataset balance(const Dataset &dataset, const std::string &feature, Ratio ratio, std::uint64_t seed) {
    if (!(ratio.positive > 0.0) || !(ratio.negative > 0.0)) {
        throw InputError("balance: ratio terms must be positive");
    }
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        (dataset.records[i].label(feature) == Label::positive ? pos : neg).push_back(i);
    }
    if (pos.empty() || neg.empty()) {
        throw InputError("balance: both classes of \"" + feature + "\" must be present");
    }

    const bool positives_major = pos.size() > neg.size();
    auto &major = positives_major ? pos : neg;
    const auto &minor = positives_major ? neg : pos;
    const double major_per_minor = positives_major ? ratio.positive / ratio.negative : ratio.negative / ratio.positive;
    const double current = static_cast<double>(major.size()) / static_cast<double>(minor.size());
    constexpr double slack = 1e-9;
    if (major_per_minor < 1.0 - slack || major_per_minor > current + slack) {
        throw InputError(fmt::format("balance: ratio {}:{} is unattainable by subsampling the majority class; "
                                     "attainable positive:negative ratios run from {}:{} (as loaded) to 1:1",
                                     ratio.positive, ratio.negative, pos.size(), neg.size()));
    }
    const auto keep = static_cast<std::size_t>(std::llround(major_per_minor * static_cast<double>(minor.size())));

    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(major));
    major.resize(std::min(keep, major.size()));

    std::vector<std::size_t> survivors = minor;
    survivors.insert(survivors.end(), major.begin(), major.end());
    std::sort(survivors.begin(), survivors.end());
    Dataset out = subset(dataset, survivors);
    out.provenance.push_back(fmt::format("balanced {} to {}:{} (seed {})", feature, ratio.positive, ratio.negative, seed));
    return out;
}

std::vector<std::size_t> FoldPlan::test_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] == fold) {
            out.push_back(i);
        }
    }
    return out;
}

std::vector<std::size_t> FoldPlan::train_indices(std::size_t fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < assignment.size(); ++i) {
        if (assignment[i] != fold) {
            out.push_back(i);
        }
    }
    return out;
}

FoldPlan kfold(const Dataset &dataset, const std::string &feature, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) {
        throw InputError(fmt::format("kfold: need at least 2 folds, got {}", folds));
    }
    std::vector<std::size_t> pos;
    std::vector<std::size_t> neg;
    for (std::size_t i = 0; i < dataset.records.size(); ++i) {
        (dataset.records[i].label(feature) == Label::positive ? pos : neg).push_back(i);
    }
    if (pos.size() < folds || neg.size() < folds) {
        throw InputError(fmt::format("kfold: {} folds need at least {} records per class; have {} positive, {} negative",
                                     folds, folds, pos.size(), neg.size()));
    }
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(pos));
    rng.shuffle(std::span<std::size_t>(neg));

    FoldPlan plan;
    plan.folds = folds;
    plan.assignment.assign(dataset.records.size(), 0);
    plan.counts.assign(folds, FoldCounts{});
    std::size_t next = 0;
    for (const std::size_t i : pos) {
        plan.assignment[i] = next;
        ++plan.counts[next].positive;
        next = (next + 1) % folds;
    }
    for (const std::size_t i : neg) {
        plan.assignment[i] = next;
        ++plan.counts[next].negative;
        next = (next + 1) % folds;
    }
    return plan;
}

Dataset subset(const Dataset &dataset, const std::vector<std::size_t> &indices) {
    Dataset out;
    out.schema = dataset.schema;
    out.provenance = dataset.provenance;
    out.records.reserve(indices.size());
    for (const std::size_t i : indices) {
        out.records.push_back(dataset.records.at(i));
    }
    return out;
}

// ---------------------------------------------------------------------------------------------

bool is_slot(std::string_view token) {
    const std::string_view head = token.substr(0, token.find('.'));
    return pos::parse_tag(head).has_value() && head != "PUNCT";
}

TemplateSet TemplateSet::from_json(const nlohmann::json &j) {
    TemplateSet set;
    set.feature = j.value("feature", std::string());
    if (!j.contains("templates") || !j.at("templates").is_array()) {
        throw InputError("template file: missing array \"templates\"");
    }
    for (const auto &item : j.at("templates")) {
        Template t;
        const auto skeleton = item.at("skeleton").get<std::string>();
        for (const auto part : split(skeleton, ' ')) {
            if (!part.empty()) {
                t.tokens.emplace_back(part);
            }
        }
        if (t.tokens.empty()) {
            throw InputError("template file: empty skeleton");
        }
        t.label = item.value("label", 1);
        if (t.label != 0 && t.label != 1) {
            throw InputError("template file: label must be 0 or 1 in \"" + skeleton + "\"");
        }
        t.rule_consistent = item.value("rule_consistent", true);
        set.templates.push_back(std::move(t));
    }
    return set;
}

TemplateSet TemplateSet::load(const std::filesystem::path &path) {
    return from_json(io::load_json(path));
}

SlotLexicon slot_lexicon_from_json(const nlohmann::json &j) {
    if (!j.is_object()) {
        throw InputError("slot lexicon: expected an object of slot -> word list");
    }
    SlotLexicon lexicon;
    for (const auto &[slot, words] : j.items()) {
        if (!is_slot(slot)) {
            throw InputError("slot lexicon: \"" + slot + "\" is not a POS slot name");
        }
        auto &list = lexicon[slot];
        for (const auto &w : words) {
            list.push_back(w.get<std::string>());
        }
    }
    return lexicon;
}

SlotLexicon load_slot_lexicon(const std::filesystem::path &path) {
    return slot_lexicon_from_json(io::load_json(path));
}

std::string render_tokens(const std::vector<std::string> &tokens) {
    std::string out;
    for (const std::string &t : tokens) {
        if (!out.empty() && !text::is_punctuation_text(t)) {
            out += ' ';
        }
        out += t;
    }
    if (!out.empty() && std::islower(static_cast<unsigned char>(out[0])) != 0) {
        out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
    }
    return out;
}

std::optional<std::size_t> template_index(const Record &record) {
    const auto at = record.source.find(augmented_marker);
    if (at == std::string::npos) {
        return std::nullopt;
    }
    return static_cast<std::size_t>(std::stoul(record.source.substr(at + augmented_marker.size())));
}

namespace {

std::size_t count_be(std::string_view sentence) {
    const auto tokens = text::tokenize(sentence);
    return static_cast<std::size_t>(
        std::count_if(tokens.begin(), tokens.end(), [](const text::Token &t) { return t.lower == "be"; }));
}

}  // namespace

AugmentResult augment(std::size_t target_count, const std::vector<Template> &templates, const SlotLexicon &lexicon,
                      std::uint64_t seed, const AugmentOptions &options) {
    AugmentResult result;
    if (target_count == 0) {
        return result;
    }
    if (templates.empty()) {
        throw InputError("augment: no templates");
    }

    std::vector<std::size_t> usable;
    for (std::size_t t = 0; t < templates.size(); ++t) {
        std::string missing;
        for (const std::string &tok : templates[t].tokens) {
            if (!is_slot(tok)) {
                continue;
            }
            const auto it = lexicon.find(tok);
            if (it == lexicon.end() || it->second.empty()) {
                missing = tok;
                break;
            }
        }
        if (missing.empty()) {
            usable.push_back(t);
        } else {
            result.warnings.push_back(fmt::format("template {} skipped: lexicon has no words for slot {}", t, missing));
        }
    }
    if (usable.empty()) {
        result.warnings.emplace_back("augment: no usable templates");
        return result;
    }

    Rng rng(seed);
    std::unordered_set<std::string> seen(options.existing_texts.begin(), options.existing_texts.end());
    std::vector<std::size_t> failures(templates.size(), 0);
    constexpr std::size_t max_attempts = 50;

    while (result.records.size() < target_count && !usable.empty()) {
        const std::size_t pick = rng.index(usable.size());
        const Template &tpl = templates[usable[pick]];

        std::string text;
        bool accepted = false;
        for (std::size_t attempt = 0; attempt < max_attempts && !accepted; ++attempt) {
            std::vector<std::string> words;
            words.reserve(tpl.tokens.size());
            for (const std::string &tok : tpl.tokens) {
                if (is_slot(tok)) {
                    const auto &choices = lexicon.at(tok);
                    words.push_back(choices[rng.index(choices.size())]);
                } else {
                    words.push_back(tok);
                }
            }
            text = render_tokens(words);
            if (options.require_single_be && count_be(text) != 1) {
                continue;
            }
            accepted = !seen.contains(text) || attempt + 1 == max_attempts;
        }
        if (options.require_single_be && count_be(text) != 1) {
            if (++failures[usable[pick]] >= 3) {
                result.warnings.push_back(
                    fmt::format("template {} skipped: it does not yield exactly one \"be\"", usable[pick]));
                usable.erase(usable.begin() + static_cast<std::ptrdiff_t>(pick));
            }
            continue;
        }
        seen.insert(text);

        Record r;
        r.id = fmt::format("{}-{:05}", options.id_prefix, result.records.size() + 1);
        r.text = std::move(text);
        r.labels[options.feature] = tpl.label;
        r.source = fmt::format("{}{}", augmented_marker, usable[pick]);
        result.records.push_back(std::move(r));
    }
    return result;
}

AugmentResult augment_habitual(const std::vector<Record> &records, std::size_t target_count,
                               const std::vector<Template> &templates, const SlotLexicon &lexicon, std::uint64_t seed) {
    AugmentOptions options;
    options.feature = std::string(habitual_be);
    options.require_single_be = true;
    std::unordered_set<std::string> ids;
    for (const Record &r : records) {
        options.existing_texts.push_back(r.text);
        ids.insert(r.id);
    }
    AugmentResult result = augment(target_count, templates, lexicon, seed, options);
    // Keep ids unique against the corpus being extended.
    for (Record &r : result.records) {
        while (ids.contains(r.id)) {
            r.id += "a";
        }
        ids.insert(r.id);
    }
    return result;
}

std::vector<Template> templates_from_records(const std::vector<Record> &records, const std::string &feature,
                                             const std::vector<std::string> &open_tags) {
    std::vector<Template> out;
    std::set<std::vector<std::string>> seen;
    for (const Record &r : records) {
        const text::Sentence s = r.sentence();
        const auto tags = pos::tag_pos(s);
        Template t;
        t.label = to_int(r.label(feature));
        for (std::size_t i = 0; i < s.tokens.size(); ++i) {
            const auto tag = std::string(pos::to_string(tags[i]));
            const bool open = std::find(open_tags.begin(), open_tags.end(), tag) != open_tags.end();
            t.tokens.push_back(open ? tag : s.tokens[i].lower);
        }
        if (!t.tokens.empty() && seen.insert(t.tokens).second) {
            out.push_back(std::move(t));
        }
    }
    return out;
}

}  // namespace aaetag::data
