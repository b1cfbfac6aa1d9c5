#pragma once

#include "aaetag/error.hpp"
#include "aaetag/label.hpp"
#include "aaetag/prompt.hpp"

#include <json.hpp>

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aaetag::llm {

struct LLMConfig {
    std::string endpoint = "https://api.openai.com/v1/chat/completions";
    std::string model = "gpt-4o-mini";
    double temperature = 0.7;
    double top_p = 0.9;
    int max_tokens = 2048;
    std::chrono::seconds timeout{60};
    int max_retries = 5;
    std::chrono::milliseconds backoff_base{1000};
    std::size_t batch_size = 10;
    /// Environment variable holding the bearer token.
    std::string api_key_env = "OPENAI_API_KEY";

    /// Throws InputError unless temperature >= 0, 0 < top_p <= 1 and batch_size >= 1.
    void validate() const;
    [[nodiscard]] nlohmann::json to_json() const;
};

struct ChatRequest {
    std::string model;
    std::string prompt;
    double temperature = 0.7;
    double top_p = 0.9;
    int max_tokens = 2048;

    /// OpenAI-style chat-completion body with a single user message.
    [[nodiscard]] nlohmann::json to_json() const;
};

/// Transport-level failure; `retriable` covers connection errors, 429 and 5xx.
class TransportError : public Error {
  public:
    TransportError(const std::string &what, bool retriable, int status = 0) :
        Error(what), retriable_(retriable), status_(status) {}
    [[nodiscard]] bool retriable() const noexcept { return retriable_; }
    [[nodiscard]] int status() const noexcept { return status_; }

  private:
    bool retriable_;
    int status_;
};

/// One chat-completion provider. Implementations return the assistant message text.
class ChatClient {
  public:
    virtual ~ChatClient() = default;
    virtual std::string complete(const ChatRequest &request) = 0;
    /// Requests that reached the provider (or the mock), including failed ones.
    [[nodiscard]] virtual std::size_t calls() const noexcept = 0;
};

/// HTTPS chat-completion client with bearer-token auth. Works against any endpoint that speaks the
/// OpenAI chat-completions wire format (hosted GPT models, or a local server fronting LLaMA).
class HttpChatClient final : public ChatClient {
  public:
    HttpChatClient(LLMConfig config, std::string api_key);

    /// Reads the key from `config.api_key_env`; InputError when unset.
    static HttpChatClient from_environment(const LLMConfig &config);

    std::string complete(const ChatRequest &request) override;
    [[nodiscard]] std::size_t calls() const noexcept override { return calls_; }

  private:
    LLMConfig config_;
    std::string api_key_;
    std::size_t calls_ = 0;
};

/// Extracts assistant text from a chat-completion response body.
[[nodiscard]] std::string parse_completion_body(const std::string &body);

/// Deterministic in-process provider. It reads the numbered sentences back out of the prompt and
/// answers each with `N. <label>`, choosing the label with `decide`.
class MockChatClient final : public ChatClient {
  public:
    using Decider = std::function<Label(const std::string &sentence)>;

    MockChatClient(PromptSpec spec, Decider decide);

    /// Replays canned responses in order instead of answering (cycles when exhausted).
    static MockChatClient scripted(PromptSpec spec, std::vector<std::string> responses);

    /// Makes the next `count` calls fail with a retriable TransportError.
    void fail_next(std::size_t count) { failures_ = count; }

    std::string complete(const ChatRequest &request) override;
    [[nodiscard]] std::size_t calls() const noexcept override { return calls_; }

  private:
    PromptSpec spec_;
    Decider decide_;
    std::vector<std::string> script_;
    std::size_t script_pos_ = 0;
    std::size_t failures_ = 0;
    std::size_t calls_ = 0;
};

/// Rule-based stand-in answers for the shipped features: the clause rule for Multiple Negation and
/// a subject-before-"be" heuristic for Habitual Be.
[[nodiscard]] MockChatClient::Decider heuristic_decider(std::string_view feature);

[[nodiscard]] std::string sha256_hex(std::string_view data);

class CacheCorruptError : public Error {
  public:
    using Error::Error;
};

/// Append-only JSON-lines cache {key, request, response, timestamp}. Complete lines that do not
/// parse are corruption; a final line without a newline is an in-progress write and is ignored.
class ResponseCache {
  public:
    explicit ResponseCache(std::filesystem::path path);

    [[nodiscard]] static std::string key(const std::string &model, const std::string &prompt);

    [[nodiscard]] std::optional<std::string> find(const std::string &key) const;
    void append(const std::string &key, const ChatRequest &request, const std::string &response);
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] const std::filesystem::path &path() const noexcept { return path_; }

  private:
    std::filesystem::path path_;
    std::map<std::string, std::string> entries_;
};

}  // namespace aaetag::llm
