#include "aaetag/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <ctime>
#include <thread>

namespace aaetag::llm {

namespace {

std::string now_utc() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::array<char, 32> buf{};
    std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf.data();
}

}  // namespace

nlohmann::json Transcript::to_json() const {
    nlohmann::json labels_json = nlohmann::json::array();
    nlohmann::json status_json = nlohmann::json::array();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        labels_json.push_back(labels[i] ? nlohmann::json(to_int(*labels[i])) : nlohmann::json(nullptr));
        status_json.push_back(std::string(to_string(statuses[i])));
    }
    return {{"batch", batch},         {"ids", ids},
            {"prompt", prompt},       {"response", response},
            {"labels", labels_json},  {"statuses", status_json},
            {"requested_at", requested_at}, {"completed_at", completed_at},
            {"retries", retries},     {"from_cache", from_cache}};
}

metrics::ClassificationReport RunResult::report() const {
    std::vector<Label> preds;
    std::vector<Label> golds;
    for (const auto &e : trace.entries) {
        if (e.predicted) {
            preds.push_back(*e.predicted);
            golds.push_back(e.gold);
        }
    }
    if (preds.empty()) {
        throw AnalysisError("no parsed predictions to score");
    }
    return metrics::score(preds, golds);
}

RunResult run_batches(const std::vector<data::Record> &records, const std::string &feature, const PromptSpec &spec,
                      const LLMConfig &config, ChatClient &client, const RunOptions &options) {
    config.validate();
    spec.validate();
    const auto sleep = options.sleep ? options.sleep : [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };

    RunResult result;
    const std::size_t calls_before = client.calls();
    std::size_t position = 0;
    for (std::size_t start = 0, batch = 0; start < records.size(); start += config.batch_size, ++batch) {
        const std::size_t end = std::min(records.size(), start + config.batch_size);
        Transcript t;
        t.batch = batch;
        std::vector<std::string> sentences;
        for (std::size_t i = start; i < end; ++i) {
            t.ids.push_back(records[i].id);
            sentences.push_back(records[i].text);
        }
        t.prompt = build_prompt(sentences, spec);
        t.requested_at = now_utc();

        const ChatRequest request{config.model, t.prompt, config.temperature, config.top_p, config.max_tokens};
        const std::string key = ResponseCache::key(config.model, t.prompt);
        std::optional<std::string> cached = options.cache ? options.cache->find(key) : std::nullopt;
        if (cached) {
            t.response = *cached;
            t.from_cache = true;
            ++result.cache_hits;
        } else {
            for (int attempt = 0;; ++attempt) {
                try {
                    t.response = client.complete(request);
                    break;
                } catch (const TransportError &e) {
                    if (!e.retriable() || attempt >= config.max_retries) {
                        result.network_calls = client.calls() - calls_before;
                        throw RunAborted(fmt::format("batch {} failed after {} attempt(s): {}", batch, attempt + 1, e.what()),
                                         std::move(result));
                    }
                    sleep(config.backoff_base * (1LL << attempt));
                    ++t.retries;
                }
            }
            if (options.cache) {
                options.cache->append(key, request, t.response);
            }
        }
        t.completed_at = now_utc();

        const auto parsed = parse_response(t.response, end - start, spec);
        for (std::size_t i = start; i < end; ++i) {
            const ParsedItem &item = parsed[i - start];
            t.labels.push_back(item.label);
            t.statuses.push_back(item.status);
            if (!item.label) {
                ++result.unparsed;
            }
            result.trace.entries.push_back(
                bias::TraceEntry{records[i].id, item.label, records[i].label(feature), batch, position++});
        }
        result.transcripts.push_back(std::move(t));
    }
    result.network_calls = client.calls() - calls_before;
    return result;
}

std::string transcripts_to_jsonl(const std::vector<Transcript> &transcripts) {
    std::string out;
    for (const auto &t : transcripts) {
        out += t.to_json().dump();
        out += '\n';
    }
    return out;
}

}  // namespace aaetag::llm
