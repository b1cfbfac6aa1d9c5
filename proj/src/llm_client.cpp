#include "aaetag/llm_client.hpp"

#include "aaetag/dataset.hpp"
#include "aaetag/json_io.hpp"
#include "aaetag/negation.hpp"
#include "aaetag/text.hpp"

#include <fmt/format.h>
#include <httplib.h>
#include <openssl/evp.h>

#include <array>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <set>

namespace aaetag::llm {

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::array<char, 32> buf{};
    std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf.data();
}

struct Endpoint {
    std::string origin;  // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string &url) {
    const std::size_t scheme = url.find("://");
    if (scheme == std::string::npos) {
        throw InputError(fmt::format("endpoint \"{}\" has no scheme", url));
    }
    const std::size_t slash = url.find('/', scheme + 3);
    if (slash == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, slash), url.substr(slash)};
}

}  // namespace

void LLMConfig::validate() const {
    if (!(temperature >= 0.0)) {
        throw InputError("temperature must be >= 0");
    }
    if (!(top_p > 0.0 && top_p <= 1.0)) {
        throw InputError("top_p must lie in (0, 1]");
    }
    if (batch_size == 0) {
        throw InputError("batch size must be at least 1");
    }
    if (max_retries < 0) {
        throw InputError("max_retries must be >= 0");
    }
    if (max_tokens <= 0) {
        throw InputError("max_tokens must be positive");
    }
}

nlohmann::json LLMConfig::to_json() const {
    return {{"endpoint", endpoint},
            {"model", model},
            {"temperature", temperature},
            {"top_p", top_p},
            {"max_tokens", max_tokens},
            {"timeout_s", timeout.count()},
            {"max_retries", max_retries},
            {"backoff_base_ms", backoff_base.count()},
            {"batch_size", batch_size},
            {"api_key_env", api_key_env}};
}

nlohmann::json ChatRequest::to_json() const {
    return {{"model", model},
            {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
            {"temperature", temperature},
            {"top_p", top_p},
            {"max_tokens", max_tokens}};
}

std::string parse_completion_body(const std::string &body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception &e) {
        throw TransportError(fmt::format("response body is not JSON: {}", e.what()), false);
    }
    const auto choices = doc.find("choices");
    if (choices == doc.end() || !choices->is_array() || choices->empty()) {
        throw TransportError("response has no choices", false);
    }
    const auto &message = (*choices)[0].value("message", nlohmann::json::object());
    const auto content = message.find("content");
    if (content == message.end() || !content->is_string()) {
        throw TransportError("response choice has no message content", false);
    }
    return content->get<std::string>();
}

HttpChatClient::HttpChatClient(LLMConfig config, std::string api_key) :
    config_(std::move(config)), api_key_(std::move(api_key)) {
    config_.validate();
}

HttpChatClient HttpChatClient::from_environment(const LLMConfig &config) {
    const char *key = std::getenv(config.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
        throw InputError(fmt::format("environment variable {} is not set", config.api_key_env));
    }
    return HttpChatClient(config, key);
}

std::string HttpChatClient::complete(const ChatRequest &request) {
    const Endpoint ep = split_endpoint(config_.endpoint);
    httplib::Client client(ep.origin);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    client.set_bearer_token_auth(api_key_);

    ++calls_;
    const auto res = client.Post(ep.path, request.to_json().dump(), "application/json");
    if (!res) {
        throw TransportError(fmt::format("request failed: {}", httplib::to_string(res.error())), true);
    }
    if (res->status == 429 || res->status >= 500) {
        throw TransportError(fmt::format("HTTP {}", res->status), true, res->status);
    }
    if (res->status != 200) {
        throw TransportError(fmt::format("HTTP {}: {}", res->status, res->body.substr(0, 500)), false, res->status);
    }
    return parse_completion_body(res->body);
}

MockChatClient::MockChatClient(PromptSpec spec, Decider decide) : spec_(std::move(spec)), decide_(std::move(decide)) {}

MockChatClient MockChatClient::scripted(PromptSpec spec, std::vector<std::string> responses) {
    if (responses.empty()) {
        throw InputError("scripted mock needs at least one response");
    }
    MockChatClient mock(std::move(spec), nullptr);
    mock.script_ = std::move(responses);
    return mock;
}

std::string MockChatClient::complete(const ChatRequest &request) {
    ++calls_;
    if (failures_ > 0) {
        --failures_;
        throw TransportError("injected failure", true, 503);
    }
    if (!script_.empty()) {
        const std::string &out = script_[script_pos_ % script_.size()];
        ++script_pos_;
        return out;
    }
    std::string out;
    const auto queries = extract_queries(request.prompt, spec_);
    for (std::size_t i = 0; i < queries.size(); ++i) {
        if (i > 0) {
            out += '\n';
        }
        out += fmt::format("{}. {}", i + 1, spec_.label_text(decide_(queries[i])));
    }
    return out;
}

MockChatClient::Decider heuristic_decider(std::string_view feature) {
    if (feature == data::multiple_negation) {
        return [](const std::string &s) { return negation::tag_multiple_negation(text::make_sentence("", s)); };
    }
    if (feature == data::habitual_be) {
        // Bare "be" right after a subject pronoun or noun-like word, not after "to" or a modal.
        return [](const std::string &s) {
            static const std::set<std::string> blockers = {"to",   "will",  "would", "can",   "could", "should",
                                                           "might", "may",  "must",  "gonna", "wanna", "not",
                                                           "ll",   "'ll",   "won't", "don't", "let",   "shall"};
            const auto sentence = text::make_sentence("", s);
            const auto &toks = sentence.tokens;
            for (std::size_t i = 1; i < toks.size(); ++i) {
                if (toks[i].lower == "be" && toks[i - 1].is_word() && !blockers.contains(toks[i - 1].lower) &&
                    !toks[i - 1].lower.ends_with("'ll")) {
                    return Label::positive;
                }
            }
            return Label::negative;
        };
    }
    throw InputError(fmt::format("no mock heuristic for feature \"{}\"", feature));
}

std::string sha256_hex(std::string_view data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 failed");
    }
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += fmt::format("{:02x}", digest[i]);
    }
    return out;
}

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
    if (!std::filesystem::exists(path_)) {
        return;
    }
    const std::string contents = io::read_text_file(path_);
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < contents.size()) {
        const std::size_t end = contents.find('\n', pos);
        if (end == std::string::npos) {
            break;  // unterminated tail: an interrupted append
        }
        ++line_no;
        const std::string_view line(contents.data() + pos, end - pos);
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            continue;
        }
        try {
            const auto doc = nlohmann::json::parse(line);
            entries_[doc.at("key").get<std::string>()] = doc.at("response").get<std::string>();
        } catch (const nlohmann::json::exception &e) {
            throw CacheCorruptError(fmt::format("{}: line {}: corrupt cache entry ({})", path_.string(), line_no, e.what()));
        }
    }
}

std::string ResponseCache::key(const std::string &model, const std::string &prompt) {
    return model + ":" + sha256_hex(prompt);
}

std::optional<std::string> ResponseCache::find(const std::string &key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void ResponseCache::append(const std::string &key, const ChatRequest &request, const std::string &response) {
    if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    // Drop a torn tail left by an interrupted append.
    if (std::filesystem::exists(path_)) {
        const std::string contents = io::read_text_file(path_);
        if (!contents.empty() && contents.back() != '\n') {
            const std::size_t last = contents.rfind('\n');
            std::filesystem::resize_file(path_, last == std::string::npos ? 0 : last + 1);
        }
    }
    std::ofstream out(path_, std::ios::binary | std::ios::app);
    if (!out) {
        throw InputError(fmt::format("cannot open cache {}", path_.string()));
    }
    const nlohmann::json line = {
        {"key", key}, {"request", request.to_json()}, {"response", response}, {"timestamp", utc_timestamp()}};
    out << line.dump() << '\n';
    out.flush();
    if (!out) {
        throw Error(fmt::format("failed writing cache {}", path_.string()));
    }
    entries_[key] = response;
}

}  // namespace aaetag::llm
