// aaetag: command-line front end for tagging, training, LLM runs and bias analyses.

#include "aaetag/bias.hpp"
#include "aaetag/dataset.hpp"
#include "aaetag/error.hpp"
#include "aaetag/glm.hpp"
#include "aaetag/habitual.hpp"
#include "aaetag/harness.hpp"
#include "aaetag/json_io.hpp"
#include "aaetag/llm_client.hpp"
#include "aaetag/metrics.hpp"
#include "aaetag/negation.hpp"
#include "aaetag/prompt.hpp"
#include "aaetag/random.hpp"
#include "aaetag/simulate.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#ifndef AAETAG_VERSION
#define AAETAG_VERSION "unknown"
#endif
#ifndef AAETAG_DATA_DIR
#define AAETAG_DATA_DIR "data"
#endif

namespace fs = std::filesystem;
using namespace aaetag;
using nlohmann::json;

namespace {

enum class Format { text, json };

fs::path data_dir() {
    if (const char *env = std::getenv("AAETAG_DATA_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return AAETAG_DATA_DIR;
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// One per run, written next to the primary output.
class RunManifest {
  public:
    explicit RunManifest(std::string subcommand) : started_(std::chrono::steady_clock::now()) {
        doc_["subcommand"] = std::move(subcommand);
        doc_["version"] = AAETAG_VERSION;
        doc_["started_at"] = utc_now();
        doc_["config"] = json::object();
        doc_["seeds"] = json::object();
        doc_["inputs"] = json::object();
        doc_["outputs"] = json::object();
    }
    json &config() { return doc_["config"]; }
    void seed(const std::string &name, std::uint64_t value) { doc_["seeds"][name] = value; }
    void input(const std::string &name, const fs::path &p) { doc_["inputs"][name] = p.string(); }
    void output(const std::string &name, const fs::path &p) { doc_["outputs"][name] = p.string(); }
    void extra(const std::string &name, json value) { doc_[name] = std::move(value); }

    void write(const fs::path &path) {
        const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started_);
        doc_["finished_at"] = utc_now();
        doc_["wall_seconds"] = elapsed.count();
        io::write_text_file(path, doc_.dump(2) + "\n");
    }

  private:
    json doc_;
    std::chrono::steady_clock::time_point started_;
};

fs::path manifest_beside(const fs::path &output) {
    return output.string() + ".manifest.json";
}

/// Writes the manifest beside `primary`, or to --manifest when given; none for stdout-only runs.
void finish_manifest(RunManifest &manifest, const std::string &explicit_path, const std::optional<fs::path> &primary) {
    if (!explicit_path.empty()) {
        manifest.write(explicit_path);
    } else if (primary) {
        manifest.write(manifest_beside(*primary));
    }
}

void emit(Format format, const std::string &text, const json &doc) {
    if (format == Format::json) {
        std::cout << doc.dump(2) << '\n';
    } else {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') {
            std::cout << '\n';
        }
    }
}

std::map<std::string, int> load_flags(const fs::path &path) {
    const std::string contents = io::read_text_file(path);
    std::map<std::string, int> flags;
    std::size_t id_col = std::string::npos;
    std::size_t flag_col = std::string::npos;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < contents.size()) {
        std::size_t end = contents.find('\n', pos);
        if (end == std::string::npos) {
            end = contents.size();
        }
        std::string line = contents.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        std::vector<std::string> cells;
        std::size_t c = 0;
        while (true) {
            const std::size_t tab = line.find('\t', c);
            cells.push_back(line.substr(c, tab == std::string::npos ? std::string::npos : tab - c));
            if (tab == std::string::npos) {
                break;
            }
            c = tab + 1;
        }
        if (line_no == 1) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (cells[i] == "id") {
                    id_col = i;
                } else if (cells[i] == "formality") {
                    flag_col = i;
                }
            }
            if (id_col == std::string::npos || flag_col == std::string::npos) {
                throw InputError(fmt::format("{}: header needs \"id\" and \"formality\" columns", path.string()));
            }
            continue;
        }
        if (line.empty()) {
            continue;
        }
        if (cells.size() <= std::max(id_col, flag_col)) {
            throw InputError(fmt::format("{}: line {}: too few columns", path.string(), line_no));
        }
        const std::string &v = cells[flag_col];
        if (v.empty()) {
            continue;
        }
        if (v != "0" && v != "1") {
            throw InputError(fmt::format("{}: line {}: formality must be 0 or 1", path.string(), line_no));
        }
        flags[cells[id_col]] = v == "1" ? 1 : 0;
    }
    return flags;
}

// ---------------------------------------------------------------------------------------------
// LLM options shared by llm-run and bias ordering.

struct LlmCli {
    std::string provider = "openai";
    std::string endpoint;
    std::string model;
    double temperature = 0.7;
    double top_p = 0.9;
    int max_tokens = 2048;
    int timeout_s = 60;
    int max_retries = 5;
    int backoff_ms = 1000;
    std::size_t batch_size = 10;
    std::string api_key_env = "OPENAI_API_KEY";
    std::string cache;
    bool mock = false;
    std::string mock_script;
    std::string mode = "zero";
    std::string examples;
    std::size_t shots_per_label = 5;
};

void add_llm_options(CLI::App *cmd, LlmCli &o, bool with_batch_size) {
    cmd->add_option("--provider", o.provider, "Endpoint preset")->check(CLI::IsMember({"openai", "llama"}));
    cmd->add_option("--endpoint", o.endpoint, "Chat-completions URL (overrides the preset)");
    cmd->add_option("--model", o.model, "Model name (overrides the preset)");
    cmd->add_option("--temperature", o.temperature, "Sampling temperature")->check(CLI::NonNegativeNumber);
    cmd->add_option("--top-p", o.top_p, "Nucleus sampling mass")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--max-tokens", o.max_tokens, "Response token limit")->check(CLI::PositiveNumber);
    cmd->add_option("--timeout", o.timeout_s, "Request timeout in seconds")->check(CLI::PositiveNumber);
    cmd->add_option("--max-retries", o.max_retries, "Retries per request")->check(CLI::NonNegativeNumber);
    cmd->add_option("--backoff-ms", o.backoff_ms, "Initial retry delay")->check(CLI::NonNegativeNumber);
    if (with_batch_size) {
        cmd->add_option("--batch-size", o.batch_size, "Sentences per prompt")->check(CLI::PositiveNumber);
    }
    cmd->add_option("--api-key-env", o.api_key_env, "Environment variable holding the API key");
    cmd->add_option("--cache", o.cache, "JSON-lines response cache");
    cmd->add_flag("--mock", o.mock, "Answer with the built-in offline provider");
    cmd->add_option("--mock-script", o.mock_script, "JSON array of raw responses for the offline provider")
        ->check(CLI::ExistingFile);
    cmd->add_option("--mode", o.mode, "Prompt mode")->check(CLI::IsMember({"zero", "few"}));
    cmd->add_option("--examples", o.examples, "TSV of labelled few-shot examples")->check(CLI::ExistingFile);
    cmd->add_option("--shots-per-label", o.shots_per_label, "Few-shot examples per label")->check(CLI::PositiveNumber);
}

llm::LLMConfig resolve_config(const LlmCli &o) {
    llm::LLMConfig c;
    if (o.provider == "llama") {
        c.endpoint = "http://localhost:8080/v1/chat/completions";
        c.model = "llama-3-8b-instruct";
    }
    if (!o.endpoint.empty()) {
        c.endpoint = o.endpoint;
    }
    if (!o.model.empty()) {
        c.model = o.model;
    }
    c.temperature = o.temperature;
    c.top_p = o.top_p;
    c.max_tokens = o.max_tokens;
    c.timeout = std::chrono::seconds(o.timeout_s);
    c.max_retries = o.max_retries;
    c.backoff_base = std::chrono::milliseconds(o.backoff_ms);
    c.batch_size = o.batch_size;
    c.api_key_env = o.api_key_env;
    c.validate();
    return c;
}

/// Builds the HTTP client on first use, so a fully cached run needs no API key.
class LazyHttpClient final : public llm::ChatClient {
  public:
    explicit LazyHttpClient(llm::LLMConfig config) : config_(std::move(config)) {}
    std::string complete(const llm::ChatRequest &request) override {
        if (!client_) {
            client_ = std::make_unique<llm::HttpChatClient>(llm::HttpChatClient::from_environment(config_));
        }
        return client_->complete(request);
    }
    [[nodiscard]] std::size_t calls() const noexcept override { return client_ ? client_->calls() : 0; }

  private:
    llm::LLMConfig config_;
    std::unique_ptr<llm::HttpChatClient> client_;
};

std::unique_ptr<llm::ChatClient> make_client(const LlmCli &o, const llm::LLMConfig &config, const llm::PromptSpec &spec,
                                             const std::string &feature) {
    if (!o.mock_script.empty()) {
        const json doc = io::load_json(o.mock_script);
        if (!doc.is_array()) {
            throw InputError("mock script: expected a JSON array of strings");
        }
        std::vector<std::string> responses;
        for (const auto &r : doc) {
            responses.push_back(r.get<std::string>());
        }
        return std::make_unique<llm::MockChatClient>(llm::MockChatClient::scripted(spec, std::move(responses)));
    }
    if (o.mock) {
        return std::make_unique<llm::MockChatClient>(spec, llm::heuristic_decider(feature));
    }
    return std::make_unique<LazyHttpClient>(config);
}

/// Few-shot examples: `per_label` of each class, seeded, alternating positive/negative.
std::vector<llm::FewShotExample> pick_examples(const data::Dataset &pool, const std::string &feature, std::size_t per_label,
                                               std::uint64_t seed) {
    std::vector<const data::Record *> pos;
    std::vector<const data::Record *> neg;
    for (const auto &r : pool.records) {
        (r.label(feature) == Label::positive ? pos : neg).push_back(&r);
    }
    if (pos.size() < per_label || neg.size() < per_label) {
        throw InputError(fmt::format("few-shot: need {} examples per label; have {} positive, {} negative", per_label,
                                     pos.size(), neg.size()));
    }
    Rng rng(seed);
    rng.shuffle(std::span<const data::Record *>(pos));
    rng.shuffle(std::span<const data::Record *>(neg));
    std::vector<llm::FewShotExample> out;
    for (std::size_t i = 0; i < per_label; ++i) {
        out.push_back({pos[i]->text, Label::positive});
        out.push_back({neg[i]->text, Label::negative});
    }
    return out;
}

json llm_cli_json(const LlmCli &o, const llm::LLMConfig &config) {
    json j = config.to_json();
    j["provider"] = o.mock || !o.mock_script.empty() ? "mock" : o.provider;
    j["mode"] = o.mode;
    j["cache"] = o.cache;
    j["shots_per_label"] = o.shots_per_label;
    return j;
}

// ---------------------------------------------------------------------------------------------
// Subcommands

struct Common {
    std::string format = "text";
    std::string manifest;
    std::uint64_t seed = 1;

    [[nodiscard]] Format fmt() const { return format == "json" ? Format::json : Format::text; }
};

void add_common(CLI::App *cmd, Common &c) {
    cmd->add_option("--output-format", c.format, "text or json")->check(CLI::IsMember({"text", "json"}));
    cmd->add_option("--manifest", c.manifest, "Run manifest path (default: beside the primary output)");
    cmd->add_option("--seed", c.seed, "Seed for every stochastic step");
}

struct TagNegationArgs {
    Common common;
    std::string input;
    std::string lexicon;
    std::string boundaries;
    std::string output;
};

int run_tag_negation(const TagNegationArgs &a) {
    RunManifest manifest("tag-negation");
    const auto lexicon = a.lexicon.empty() ? negation::NegatorLexicon::defaults() : negation::NegatorLexicon::load(a.lexicon);
    const auto bounds = a.boundaries.empty() ? text::BoundaryConfig::defaults() : text::BoundaryConfig::load(a.boundaries);
    const data::Dataset ds = data::load_dataset(a.input);
    manifest.input("dataset", a.input);
    if (!a.lexicon.empty()) {
        manifest.input("lexicon", a.lexicon);
    }
    if (!a.boundaries.empty()) {
        manifest.input("boundaries", a.boundaries);
    }

    const std::string feature(data::multiple_negation);
    const bool has_gold = std::find(ds.schema.begin(), ds.schema.end(), feature) != ds.schema.end();
    std::vector<Label> preds;
    std::vector<Label> golds;
    std::string tsv = has_gold ? "id\ttext\tpredicted\tgold\n" : "id\ttext\tpredicted\n";
    json rows = json::array();
    for (const auto &r : ds.records) {
        const Label p = negation::tag_multiple_negation(r.sentence(), lexicon, bounds);
        preds.push_back(p);
        tsv += fmt::format("{}\t{}\t{}", r.id, r.text, to_int(p));
        json row = {{"id", r.id}, {"predicted", to_int(p)}};
        if (has_gold) {
            golds.push_back(r.label(feature));
            tsv += fmt::format("\t{}", to_int(golds.back()));
            row["gold"] = to_int(golds.back());
        }
        tsv += '\n';
        rows.push_back(std::move(row));
    }
    if (ds.records.empty()) {
        tsv.clear();
    }

    std::string text;
    json doc = {{"sentences", ds.size()}};
    if (has_gold && !preds.empty()) {
        const auto report = metrics::score(preds, golds);
        text = metrics::render_text(report, "Multiple Negation (rule tagger)");
        doc["report"] = metrics::to_json(report);
    } else {
        const auto positives = static_cast<std::size_t>(std::count(preds.begin(), preds.end(), Label::positive));
        text = fmt::format("{} sentences, {} tagged multiple negation\n", preds.size(), positives);
        doc["positives"] = positives;
    }
    if (a.output.empty()) {
        if (a.common.fmt() == Format::json) {
            doc["predictions"] = rows;
        } else {
            std::cout << tsv;
        }
    } else {
        io::write_text_file(a.output, tsv);
        manifest.output("predictions", a.output);
    }
    emit(a.common.fmt(), text, doc);
    finish_manifest(manifest, a.common.manifest,
                    a.output.empty() ? std::nullopt : std::optional<fs::path>(a.output));
    return 0;
}

struct TrainArgs {
    Common common;
    std::string input;
    std::size_t k = 3;
    std::size_t folds = 10;
    double l2 = 1e-4;
    double threshold = 0.5;
    std::size_t min_count = 2;
    std::string model_out;
    std::string report_out;
    bool train_only_augmented = false;
    bool serial = false;
};

int run_train_habitual(const TrainArgs &a) {
    RunManifest manifest("train-habitual");
    const std::string feature(data::habitual_be);
    const data::Dataset ds = data::load_dataset(a.input, {feature});
    manifest.input("dataset", a.input);

    habitual::TrainOptions opts;
    opts.k = a.k;
    opts.folds = a.folds;
    opts.seed = a.common.seed;
    opts.l2 = a.l2;
    opts.threshold = a.threshold;
    opts.min_count = a.min_count;
    opts.augmented_in_test = !a.train_only_augmented;
    opts.parallel_folds = !a.serial;
    manifest.config() = {{"k", opts.k},         {"folds", opts.folds},         {"l2", opts.l2},
                         {"threshold", opts.threshold}, {"min_count", opts.min_count},
                         {"augmented_in_test", opts.augmented_in_test}};
    manifest.seed("folds", opts.seed);

    const auto results = habitual::train_habitual(ds, opts);
    std::vector<metrics::ClassificationReport> reports;
    std::string text;
    json folds = json::array();
    for (const auto &f : results) {
        reports.push_back(f.report);
        text += metrics::render_text(f.report, fmt::format("Fold {}", f.fold + 1)) + "\n";
        folds.push_back({{"fold", f.fold + 1}, {"report", metrics::to_json(f.report)}});
    }
    const auto avg = metrics::average_reports(reports);
    text += metrics::render_text(avg, fmt::format("Average over {} folds", results.size()));
    const json doc = {{"folds", folds}, {"average", metrics::to_json(avg)}};

    std::optional<fs::path> primary;
    if (!a.model_out.empty()) {
        habitual::HabitualModel model = habitual::fit_model(ds.records, opts);
        model.metadata["training_rows"] = ds.size();
        model.metadata["source"] = a.input;
        io::write_text_file(a.model_out, model.to_json().dump(2) + "\n");
        manifest.output("model", a.model_out);
        primary = a.model_out;
    }
    if (!a.report_out.empty()) {
        io::write_text_file(a.report_out, doc.dump(2) + "\n");
        manifest.output("report", a.report_out);
        primary = primary ? primary : std::optional<fs::path>(a.report_out);
    }
    emit(a.common.fmt(), text, doc);
    finish_manifest(manifest, a.common.manifest, primary);
    return 0;
}

struct LlmRunArgs {
    Common common;
    LlmCli llm;
    std::string input;
    std::string feature;
    std::string out_dir;
};

int run_llm(const LlmRunArgs &a) {
    RunManifest manifest("llm-run");
    const data::Dataset ds = data::load_dataset(a.input, {a.feature});
    manifest.input("dataset", a.input);
    const llm::LLMConfig config = resolve_config(a.llm);

    const auto mode = a.llm.mode == "few" ? llm::PromptMode::few_shot : llm::PromptMode::zero_shot;
    llm::PromptSpec spec = llm::spec_for_feature(a.feature, mode);
    std::vector<data::Record> records = ds.records;
    if (mode == llm::PromptMode::few_shot) {
        if (!a.llm.examples.empty()) {
            spec.examples = pick_examples(data::load_dataset(a.llm.examples, {a.feature}), a.feature,
                                          a.llm.shots_per_label, a.common.seed);
            manifest.input("examples", a.llm.examples);
        } else {
            // Examples drawn from the input are held out of the run.
            spec.examples = pick_examples(ds, a.feature, a.llm.shots_per_label, a.common.seed);
            std::set<std::string> used;
            for (const auto &e : spec.examples) {
                used.insert(e.sentence);
            }
            std::erase_if(records, [&](const data::Record &r) { return used.contains(r.text); });
        }
        manifest.seed("examples", a.common.seed);
    }

    auto client = make_client(a.llm, config, spec, a.feature);
    std::optional<llm::ResponseCache> cache;
    llm::RunOptions run_opts;
    if (!a.llm.cache.empty()) {
        cache.emplace(a.llm.cache);
        run_opts.cache = &*cache;
        manifest.input("cache", a.llm.cache);
    }
    manifest.config() = llm_cli_json(a.llm, config);
    manifest.config()["feature"] = a.feature;

    const fs::path out(a.out_dir);
    fs::create_directories(out);
    llm::RunResult result;
    try {
        result = llm::run_batches(records, a.feature, spec, config, *client, run_opts);
    } catch (const llm::RunAborted &e) {
        const auto &partial = e.partial();
        io::write_text_file(out / "trace.partial.jsonl", bias::to_jsonl(partial.trace));
        io::write_text_file(out / "transcripts.partial.jsonl", llm::transcripts_to_jsonl(partial.transcripts));
        manifest.output("partial_trace", out / "trace.partial.jsonl");
        manifest.extra("aborted", e.what());
        manifest.write(out / "manifest.json");
        throw;
    }

    io::write_text_file(out / "trace.jsonl", bias::to_jsonl(result.trace));
    io::write_text_file(out / "transcripts.jsonl", llm::transcripts_to_jsonl(result.transcripts));
    manifest.output("trace", out / "trace.jsonl");
    manifest.output("transcripts", out / "transcripts.jsonl");

    const std::string title = fmt::format("{} / {} / {}", config.model, a.feature, a.llm.mode == "few" ? "few-shot" : "zero-shot");
    json doc = {{"rows", result.trace.size()},
                {"batches", result.transcripts.size()},
                {"network_calls", result.network_calls},
                {"cache_hits", result.cache_hits},
                {"unparsed", result.unparsed}};
    std::string text;
    const bool any_parsed = result.unparsed < result.trace.size();
    if (any_parsed) {
        const auto report = result.report();
        text = metrics::render_text(report, title);
        doc["report"] = metrics::to_json(report);
    } else {
        text = title + "\nno parsed predictions\n";
    }
    text += fmt::format("\nrows {}  batches {}  network calls {}  cache hits {}  unparsed {}\n", result.trace.size(),
                        result.transcripts.size(), result.network_calls, result.cache_hits, result.unparsed);
    io::write_text_file(out / "report.txt", text);
    io::write_text_file(out / "report.json", doc.dump(2) + "\n");
    manifest.output("report", out / "report.json");
    manifest.extra("summary", doc);
    manifest.write(a.common.manifest.empty() ? out / "manifest.json" : fs::path(a.common.manifest));
    emit(a.common.fmt(), text, doc);
    return 0;
}

struct BiasArgs {
    Common common;
    std::string trace;
    std::size_t window = 5;
    bool reset_per_batch = false;
    std::string flags;
    std::string output;
    // ordering
    LlmCli llm;
    std::string probes;
    std::string feature;
    std::size_t repetitions = 6;
    std::string out_dir;
};

void write_outputs(RunManifest &manifest, const BiasArgs &a, const std::string &text, const json &doc) {
    std::optional<fs::path> primary;
    if (!a.output.empty()) {
        io::write_text_file(a.output, a.common.fmt() == Format::json ? doc.dump(2) + "\n" : text);
        manifest.output("summary", a.output);
        primary = a.output;
    }
    emit(a.common.fmt(), text, doc);
    finish_manifest(manifest, a.common.manifest, primary);
}

int run_bias_recency(const BiasArgs &a) {
    RunManifest manifest("bias recency");
    const auto trace = bias::load_trace(a.trace);
    manifest.input("trace", a.trace);
    bias::RecencyOptions opts{a.window, a.reset_per_batch};
    manifest.config() = {{"window", a.window}, {"reset_per_batch", a.reset_per_batch}};
    const auto analysis = bias::run_recency_regression(trace, opts);
    write_outputs(manifest, a, bias::render_recency(analysis, "Recency bias"), bias::to_json(analysis));
    return 0;
}

int run_bias_formality(const BiasArgs &a) {
    RunManifest manifest("bias formality");
    const auto trace = bias::load_trace(a.trace);
    manifest.input("trace", a.trace);
    // Without a flag file every id is missing; the regression reports them.
    const auto flags = a.flags.empty() ? std::map<std::string, int>{} : load_flags(a.flags);
    manifest.input("flags", a.flags);
    const auto analysis = bias::run_formality_regression(trace, flags);
    write_outputs(manifest, a, bias::render_formality(analysis, "Formality bias"), bias::to_json(analysis));
    return 0;
}

int run_bias_ordering(const BiasArgs &a) {
    RunManifest manifest("bias ordering");
    const data::Dataset probes = data::load_dataset(a.probes, {a.feature});
    manifest.input("probes", a.probes);
    LlmCli llm_opts = a.llm;
    const auto plans = bias::default_ordering_plans(a.common.seed, a.repetitions);
    manifest.seed("ordering", a.common.seed);

    const auto mode = llm_opts.mode == "few" ? llm::PromptMode::few_shot : llm::PromptMode::zero_shot;
    llm::PromptSpec spec = llm::spec_for_feature(a.feature, mode);
    if (mode == llm::PromptMode::few_shot) {
        if (llm_opts.examples.empty()) {
            throw InputError("ordering: few-shot mode needs --examples");
        }
        spec.examples = pick_examples(data::load_dataset(llm_opts.examples, {a.feature}), a.feature,
                                      llm_opts.shots_per_label, a.common.seed);
    }
    std::optional<llm::ResponseCache> cache;
    llm::RunOptions run_opts;
    if (!llm_opts.cache.empty()) {
        cache.emplace(llm_opts.cache);
        run_opts.cache = &*cache;
    }
    const fs::path out(a.out_dir);
    fs::create_directories(out);

    std::string text = fmt::format("{:<28} {:<32} {:<32} {:>8}\n", "run", "gold", "predicted", "accuracy");
    json runs = json::array();
    std::unique_ptr<llm::ChatClient> client;
    for (const auto &plan : plans) {
        llm_opts.batch_size = plan.batch_size;
        const llm::LLMConfig config = resolve_config(llm_opts);
        if (!client) {
            client = make_client(llm_opts, config, spec, a.feature);
            manifest.config() = llm_cli_json(llm_opts, config);
            manifest.config()["feature"] = a.feature;
            manifest.config()["repetitions"] = a.repetitions;
        }
        for (const auto &run : bias::build_ordering_runs(probes.records, plan, a.feature)) {
            const auto result = llm::run_batches(run.records, a.feature, spec, config, *client, run_opts);
            const fs::path trace_path = out / (run.name() + ".jsonl");
            io::write_text_file(trace_path, bias::to_jsonl(result.trace));
            std::string gold_seq;
            std::string pred_seq;
            std::size_t correct = 0;
            std::size_t parsed = 0;
            for (const auto &e : result.trace.entries) {
                gold_seq += static_cast<char>('0' + to_int(e.gold));
                pred_seq += e.predicted ? static_cast<char>('0' + to_int(*e.predicted)) : '?';
                if (e.predicted) {
                    ++parsed;
                    correct += *e.predicted == e.gold ? 1 : 0;
                }
            }
            const double accuracy = parsed ? static_cast<double>(correct) / static_cast<double>(parsed) : 0.0;
            text += fmt::format("{:<28} {:<32} {:<32} {:>8.3f}\n", run.name(), gold_seq.substr(0, 30),
                                pred_seq.substr(0, 30), accuracy);
            runs.push_back({{"run", run.name()},
                            {"seed", run.seed},
                            {"gold", gold_seq},
                            {"predicted", pred_seq},
                            {"accuracy", accuracy},
                            {"unparsed", result.unparsed},
                            {"trace", trace_path.string()}});
            manifest.output(run.name(), trace_path);
        }
    }
    const json doc = {{"runs", runs}};
    io::write_text_file(out / "ordering.json", doc.dump(2) + "\n");
    manifest.write(a.common.manifest.empty() ? out / "manifest.json" : fs::path(a.common.manifest));
    emit(a.common.fmt(), text, doc);
    return 0;
}

struct AugmentArgs {
    Common common;
    std::string input;
    std::size_t count = 0;
    std::string templates;
    std::string lexicon;
    std::string feature;
    std::string output;
    bool append = false;
};

int run_augment(const AugmentArgs &a) {
    RunManifest manifest("augment");
    data::Dataset input;
    if (!a.input.empty()) {
        input = data::load_dataset(a.input);
        manifest.input("dataset", a.input);
    }
    std::vector<data::Template> templates;
    std::string feature = a.feature;
    if (!a.templates.empty()) {
        auto set = data::TemplateSet::load(a.templates);
        templates = std::move(set.templates);
        if (feature.empty()) {
            feature = set.feature;
        }
        manifest.input("templates", a.templates);
    } else {
        if (a.input.empty()) {
            throw InputError("augment: give --templates or an --input to derive templates from");
        }
        if (feature.empty()) {
            feature = std::string(data::habitual_be);
        }
        templates = data::templates_from_records(input.records, feature);
    }
    if (feature.empty()) {
        throw InputError("augment: --feature is required when the template file names none");
    }
    const fs::path lexicon_path = a.lexicon.empty() ? data_dir() / "templates" / "lexicon.json" : fs::path(a.lexicon);
    const auto lexicon = data::load_slot_lexicon(lexicon_path);
    manifest.input("lexicon", lexicon_path);
    manifest.seed("augment", a.common.seed);
    manifest.config() = {{"count", a.count}, {"feature", feature}, {"append", a.append}};

    data::AugmentResult result;
    if (feature == data::habitual_be) {
        result = data::augment_habitual(input.records, a.count, templates, lexicon, a.common.seed);
    } else {
        data::AugmentOptions opts;
        opts.feature = feature;
        for (const auto &r : input.records) {
            opts.existing_texts.push_back(r.text);
        }
        result = data::augment(a.count, templates, lexicon, a.common.seed, opts);
    }
    for (const auto &w : result.warnings) {
        fmt::print(stderr, "warning: {}\n", w);
    }

    data::Dataset out;
    out.schema = input.schema.empty() ? std::vector<std::string>{feature} : input.schema;
    if (a.append) {
        out.records = input.records;
    }
    for (auto &r : result.records) {
        for (const auto &f : out.schema) {
            r.labels.try_emplace(f, 0);
        }
        out.records.push_back(std::move(r));
    }
    out.validate();
    const std::string tsv = out.records.empty() ? std::string() : data::to_tsv(out);
    if (a.output.empty()) {
        std::cout << (a.common.fmt() == Format::json ? data::to_jsonl(out) : tsv);
    } else {
        io::write_text_file(a.output, a.common.fmt() == Format::json ? data::to_jsonl(out) : tsv);
        manifest.output("dataset", a.output);
        fmt::print("{} sentences generated, {} written\n", result.records.size(), out.size());
    }
    finish_manifest(manifest, a.common.manifest, a.output.empty() ? std::nullopt : std::optional<fs::path>(a.output));
    return 0;
}

struct SynthArgs {
    Common common;
    // corpus
    std::string feature;
    std::size_t positives = 482;
    std::size_t negatives = 518;
    std::string templates;
    std::string lexicon;
    std::string output;
    // trace
    std::string kind = "recency";
    std::size_t rows = 500;
    double beta = -4.0;
    double beta_gold = 2.0;
    double intercept = 0.0;
    std::size_t window = 5;
    std::string flags_out;
};

int run_synth_corpus(const SynthArgs &a) {
    RunManifest manifest("synth corpus");
    const fs::path tpl_path =
        a.templates.empty() ? data_dir() / "templates" / (a.feature + ".json") : fs::path(a.templates);
    const fs::path lex_path = a.lexicon.empty() ? data_dir() / "templates" / "lexicon.json" : fs::path(a.lexicon);
    const auto set = data::TemplateSet::load(tpl_path);
    const auto lexicon = data::load_slot_lexicon(lex_path);
    manifest.input("templates", tpl_path);
    manifest.input("lexicon", lex_path);
    manifest.seed("corpus", a.common.seed);
    manifest.config() = {{"feature", a.feature}, {"positives", a.positives}, {"negatives", a.negatives}};

    std::vector<data::Template> pos;
    std::vector<data::Template> neg;
    for (const auto &t : set.templates) {
        (t.label == 1 ? pos : neg).push_back(t);
    }
    data::AugmentOptions opts;
    opts.feature = a.feature;
    opts.require_single_be = a.feature == data::habitual_be;
    opts.id_prefix = "p";
    auto p = data::augment(a.positives, pos, lexicon, a.common.seed, opts);
    opts.id_prefix = "n";
    for (const auto &r : p.records) {
        opts.existing_texts.push_back(r.text);
    }
    auto n = data::augment(a.negatives, neg, lexicon, a.common.seed + 1, opts);
    for (const auto *w : {&p.warnings, &n.warnings}) {
        for (const auto &msg : *w) {
            fmt::print(stderr, "warning: {}\n", msg);
        }
    }

    data::Dataset ds;
    ds.schema = {a.feature};
    ds.records = std::move(p.records);
    for (auto &r : n.records) {
        ds.records.push_back(std::move(r));
    }
    // Ids are reassigned after a seeded shuffle; source keeps the per-class template.
    Rng rng(a.common.seed + 2);
    rng.shuffle(std::span<data::Record>(ds.records));
    for (std::size_t i = 0; i < ds.records.size(); ++i) {
        auto &r = ds.records[i];
        const auto tpl = data::template_index(r);
        r.source = fmt::format("synthetic;template={}{}", r.labels.at(a.feature) == 1 ? "pos" : "neg", tpl ? *tpl : 0);
        r.id = fmt::format("s{:05}", i + 1);
    }
    ds.validate();
    const std::string tsv = data::to_tsv(ds);
    if (a.output.empty()) {
        std::cout << tsv;
    } else {
        io::write_text_file(a.output, tsv);
        manifest.output("dataset", a.output);
        fmt::print("{} sentences ({} positive, {} negative) written to {}\n", ds.size(),
                   ds.count(a.feature, Label::positive), ds.count(a.feature, Label::negative), a.output);
    }
    finish_manifest(manifest, a.common.manifest, a.output.empty() ? std::nullopt : std::optional<fs::path>(a.output));
    return 0;
}

int run_synth_trace(const SynthArgs &a) {
    RunManifest manifest("synth trace");
    manifest.seed("trace", a.common.seed);
    bias::PredictionTrace trace;
    if (a.kind == "recency") {
        simulate::RecencySimulation sim;
        sim.rows = a.rows;
        sim.window = a.window;
        sim.beta_recency = a.beta;
        sim.beta_gold = a.beta_gold;
        sim.intercept = a.intercept;
        trace = simulate::recency_trace(sim, a.common.seed);
        manifest.config() = {{"kind", a.kind}, {"rows", sim.rows}, {"window", sim.window}, {"beta_recency", sim.beta_recency},
                             {"beta_gold", sim.beta_gold}, {"intercept", sim.intercept}};
    } else {
        simulate::FormalitySimulation sim;
        sim.rows = a.rows;
        sim.beta_formality = a.beta;
        sim.beta_gold = a.beta_gold;
        sim.intercept = a.intercept;
        auto sample = simulate::formality_trace(sim, a.common.seed);
        trace = std::move(sample.trace);
        manifest.config() = {{"kind", a.kind}, {"rows", sim.rows}, {"beta_formality", sim.beta_formality},
                             {"beta_gold", sim.beta_gold}, {"intercept", sim.intercept}};
        if (a.flags_out.empty()) {
            throw InputError("synth trace --kind formality needs --flags-out");
        }
        std::string tsv = "id\tformality\n";
        for (const auto &[id, f] : sample.flags) {
            tsv += fmt::format("{}\t{}\n", id, f);
        }
        io::write_text_file(a.flags_out, tsv);
        manifest.output("flags", a.flags_out);
    }
    const std::string jsonl = bias::to_jsonl(trace);
    if (a.output.empty()) {
        std::cout << jsonl;
    } else {
        io::write_text_file(a.output, jsonl);
        manifest.output("trace", a.output);
    }
    finish_manifest(manifest, a.common.manifest, a.output.empty() ? std::nullopt : std::optional<fs::path>(a.output));
    return 0;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Tag AAE grammatical features and audit LLM classifiers for ordering and formality bias."};
    app.set_version_flag("--version", std::string(AAETAG_VERSION));
    app.require_subcommand(1);

    TagNegationArgs tn;
    auto *tag = app.add_subcommand("tag-negation", "Rule-based Multiple Negation tagging");
    add_common(tag, tn.common);
    tag->add_option("--input", tn.input, "TSV dataset")->required()->check(CLI::ExistingFile);
    tag->add_option("--lexicon", tn.lexicon, "Negator lexicon JSON")->check(CLI::ExistingFile);
    tag->add_option("--boundaries", tn.boundaries, "Clause boundary JSON")->check(CLI::ExistingFile);
    tag->add_option("--output", tn.output, "Prediction TSV");

    TrainArgs tr;
    auto *train = app.add_subcommand("train-habitual", "Cross-validated Habitual Be classifier");
    add_common(train, tr.common);
    train->add_option("--input", tr.input, "TSV dataset with a habitual_be column")->required()->check(CLI::ExistingFile);
    train->add_option("--k", tr.k, "Context tokens on each side of \"be\"")->check(CLI::Range(1, 10));
    train->add_option("--folds", tr.folds, "Cross-validation folds")->check(CLI::Range(2, 100));
    train->add_option("--l2", tr.l2, "Ridge penalty")->check(CLI::NonNegativeNumber);
    train->add_option("--threshold", tr.threshold, "Decision threshold")->check(CLI::Range(0.0, 1.0));
    train->add_option("--min-count", tr.min_count, "Drop features seen fewer times");
    train->add_option("--model-out", tr.model_out, "Write a model fitted on all rows");
    train->add_option("--report-out", tr.report_out, "Write fold reports as JSON");
    train->add_flag("--train-only-augmented", tr.train_only_augmented, "Keep augmented rows out of test folds");
    train->add_flag("--serial", tr.serial, "Fit folds one at a time");

    LlmRunArgs lr;
    auto *llm_run = app.add_subcommand("llm-run", "Classify a dataset with a chat-completion model");
    add_common(llm_run, lr.common);
    add_llm_options(llm_run, lr.llm, true);
    llm_run->add_option("--input", lr.input, "TSV dataset")->required()->check(CLI::ExistingFile);
    llm_run->add_option("--feature", lr.feature, "Feature column")
        ->required()
        ->check(CLI::IsMember({std::string(data::habitual_be), std::string(data::multiple_negation)}));
    llm_run->add_option("--out-dir", lr.out_dir, "Directory for trace, transcripts, report and manifest")->required();

    BiasArgs ba;
    auto *bias_cmd = app.add_subcommand("bias", "Bias regressions over prediction traces");
    bias_cmd->require_subcommand(1);
    auto *recency = bias_cmd->add_subcommand("recency", "prediction ~ recency + gold");
    add_common(recency, ba.common);
    recency->add_option("--trace", ba.trace, "Trace JSON-lines")->required()->check(CLI::ExistingFile);
    recency->add_option("--window", ba.window, "Previous predictions considered")->check(CLI::Range(1, 1000));
    recency->add_flag("--reset-per-batch", ba.reset_per_batch, "Restart the window at batch boundaries");
    recency->add_option("--output", ba.output, "Summary file");
    auto *formality = bias_cmd->add_subcommand("formality", "prediction ~ formality + gold");
    add_common(formality, ba.common);
    formality->add_option("--trace", ba.trace, "Trace JSON-lines")->required()->check(CLI::ExistingFile);
    formality->add_option("--flags", ba.flags, "TSV with id and formality columns")->check(CLI::ExistingFile);
    formality->add_option("--output", ba.output, "Summary file");
    auto *ordering = bias_cmd->add_subcommand("ordering", "Fixed label orderings of ten probes");
    add_common(ordering, ba.common);
    add_llm_options(ordering, ba.llm, false);
    ordering->add_option("--probes", ba.probes, "TSV with five probes per label")->required()->check(CLI::ExistingFile);
    ordering->add_option("--feature", ba.feature, "Feature column")
        ->required()
        ->check(CLI::IsMember({std::string(data::habitual_be), std::string(data::multiple_negation)}));
    ordering->add_option("--repetitions", ba.repetitions, "Runs per configuration")->check(CLI::Range(1, 100));
    ordering->add_option("--out-dir", ba.out_dir, "Directory for per-run traces")->required();

    AugmentArgs au;
    auto *augment = app.add_subcommand("augment", "Template-based augmentation");
    add_common(augment, au.common);
    augment->add_option("--input", au.input, "Seed TSV dataset")->check(CLI::ExistingFile);
    augment->add_option("--count", au.count, "Sentences to generate")->required();
    augment->add_option("--templates", au.templates, "Template JSON")->check(CLI::ExistingFile);
    augment->add_option("--lexicon", au.lexicon, "Slot lexicon JSON")->check(CLI::ExistingFile);
    augment->add_option("--feature", au.feature, "Feature column for generated labels");
    augment->add_option("--output", au.output, "Output TSV");
    augment->add_flag("--append", au.append, "Write the input rows before the generated ones");

    SynthArgs sy;
    auto *synth = app.add_subcommand("synth", "Synthetic corpora and traces");
    synth->require_subcommand(1);
    auto *corpus = synth->add_subcommand("corpus", "Template-generated labelled corpus");
    add_common(corpus, sy.common);
    corpus->add_option("--feature", sy.feature, "Feature")
        ->required()
        ->check(CLI::IsMember({std::string(data::habitual_be), std::string(data::multiple_negation)}));
    corpus->add_option("--positives", sy.positives, "Positive sentences");
    corpus->add_option("--negatives", sy.negatives, "Negative sentences");
    corpus->add_option("--templates", sy.templates, "Template JSON")->check(CLI::ExistingFile);
    corpus->add_option("--lexicon", sy.lexicon, "Slot lexicon JSON")->check(CLI::ExistingFile);
    corpus->add_option("--output", sy.output, "Output TSV");
    auto *trace_cmd = synth->add_subcommand("trace", "Simulated prediction trace with injected bias");
    add_common(trace_cmd, sy.common);
    trace_cmd->add_option("--kind", sy.kind, "recency or formality")->check(CLI::IsMember({"recency", "formality"}));
    trace_cmd->add_option("--rows", sy.rows, "Analysed rows")->check(CLI::PositiveNumber);
    trace_cmd->add_option("--beta", sy.beta, "Injected recency or formality coefficient");
    trace_cmd->add_option("--beta-gold", sy.beta_gold, "Gold-label coefficient");
    trace_cmd->add_option("--intercept", sy.intercept, "Generator intercept");
    trace_cmd->add_option("--window", sy.window, "Recency window")->check(CLI::PositiveNumber);
    trace_cmd->add_option("--output", sy.output, "Trace JSON-lines");
    trace_cmd->add_option("--flags-out", sy.flags_out, "Formality flag TSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*tag) {
            return run_tag_negation(tn);
        }
        if (*train) {
            return run_train_habitual(tr);
        }
        if (*llm_run) {
            return run_llm(lr);
        }
        if (*recency) {
            return run_bias_recency(ba);
        }
        if (*formality) {
            return run_bias_formality(ba);
        }
        if (*ordering) {
            return run_bias_ordering(ba);
        }
        if (*augment) {
            return run_augment(au);
        }
        if (*corpus) {
            return run_synth_corpus(sy);
        }
        if (*trace_cmd) {
            return run_synth_trace(sy);
        }
    } catch (const InputError &e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    } catch (const Error &e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    } catch (const std::exception &e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 1;
    }
    return 2;
}
