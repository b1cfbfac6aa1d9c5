#pragma once

#include "aaetag/bias.hpp"
#include "aaetag/dataset.hpp"
#include "aaetag/llm_client.hpp"
#include "aaetag/metrics.hpp"
#include "aaetag/prompt.hpp"

#include <json.hpp>

#include <chrono>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace aaetag::llm {

struct Transcript {
    std::size_t batch = 0;
    std::vector<std::string> ids;
    std::string prompt;
    std::string response;
    /// Aligned with `ids`; empty entries are unparsed.
    std::vector<std::optional<Label>> labels;
    std::vector<ParseStatus> statuses;
    std::string requested_at;
    std::string completed_at;
    int retries = 0;
    bool from_cache = false;

    [[nodiscard]] nlohmann::json to_json() const;
};

struct RunResult {
    bias::PredictionTrace trace;
    std::vector<Transcript> transcripts;
    std::size_t network_calls = 0;
    std::size_t cache_hits = 0;
    std::size_t unparsed = 0;

    /// Scores parsed items only.
    [[nodiscard]] metrics::ClassificationReport report() const;
};

/// Retries ran out. Completed batches are in `partial()` (and in the cache, so a rerun resumes).
class RunAborted : public Error {
  public:
    RunAborted(const std::string &what, RunResult partial) : Error(what), partial_(std::move(partial)) {}
    [[nodiscard]] const RunResult &partial() const noexcept { return partial_; }

  private:
    RunResult partial_;
};

struct RunOptions {
    /// Optional persistent cache; nullptr disables caching.
    ResponseCache *cache = nullptr;
    /// Replaceable for tests.
    std::function<void(std::chrono::milliseconds)> sleep;
};

/// Sends the records batch by batch, strictly in order. Transport failures are retried with
/// exponential backoff (base, 2*base, 4*base, ...) up to `config.max_retries` times.
[[nodiscard]] RunResult run_batches(const std::vector<data::Record> &records, const std::string &feature,
                                    const PromptSpec &spec, const LLMConfig &config, ChatClient &client,
                                    const RunOptions &options = {});

[[nodiscard]] std::string transcripts_to_jsonl(const std::vector<Transcript> &transcripts);

}  // namespace aaetag::llm
