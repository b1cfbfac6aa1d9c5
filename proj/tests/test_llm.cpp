#include "aaetag/error.hpp"
#include "aaetag/harness.hpp"
#include "aaetag/llm_client.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

using namespace aaetag;
using namespace aaetag::llm;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() / ("aaetag_llm_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::vector<data::Record> records(std::size_t n) {
    std::vector<data::Record> out;
    for (std::size_t i = 0; i < n; ++i) {
        data::Record r;
        r.id = "r" + std::to_string(i);
        r.text = i % 2 == 0 ? "I ain't got no time " + std::to_string(i) + "." : "I have time " + std::to_string(i) + ".";
        r.labels["multiple_negation"] = i % 2 == 0 ? 1 : 0;
        out.push_back(r);
    }
    return out;
}

LLMConfig small_batches() {
    LLMConfig c;
    c.batch_size = 4;
    c.backoff_base = std::chrono::milliseconds(100);
    c.max_retries = 3;
    return c;
}

}  // namespace

TEST_CASE("request body and completion parsing") {
    const ChatRequest req{"m", "hello", 0.2, 0.5, 64};
    const auto j = req.to_json();
    CHECK(j.at("model") == "m");
    CHECK(j.at("messages").at(0).at("role") == "user");
    CHECK(j.at("messages").at(0).at("content") == "hello");
    CHECK(j.at("max_tokens") == 64);
    CHECK(parse_completion_body(R"({"choices":[{"message":{"role":"assistant","content":"1. habitual be"}}]})") ==
          "1. habitual be");
    CHECK_THROWS(parse_completion_body("{}"));
    CHECK_THROWS(parse_completion_body("not json"));

    LLMConfig bad;
    bad.top_p = 0.0;
    CHECK_THROWS_AS(bad.validate(), InputError);
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(ResponseCache::key("m", "abc") == "m:" + sha256_hex("abc"));
}

TEST_CASE("missing api key is an input error") {
    LLMConfig c;
    c.api_key_env = "AAETAG_TEST_KEY_THAT_IS_NOT_SET";
    ::unsetenv(c.api_key_env.c_str());
    CHECK_THROWS_AS(HttpChatClient::from_environment(c), InputError);
}

TEST_CASE("mock client answers by sentence") {
    const auto spec = spec_for_feature("multiple_negation");
    MockChatClient mock(spec, heuristic_decider("multiple_negation"));
    const std::string prompt = build_prompt({"I ain't step on no dog.", "I am here."}, spec);
    const std::string answer = mock.complete(ChatRequest{"m", prompt});
    const auto parsed = parse_response(answer, 2, spec);
    CHECK(parsed[0].label == Label::positive);
    CHECK(parsed[1].label == Label::negative);
    mock.fail_next(1);
    CHECK_THROWS_AS(mock.complete(ChatRequest{"m", prompt}), TransportError);
    CHECK(mock.calls() == 2);

    const auto hb = spec_for_feature("habitual_be");
    const auto decide = heuristic_decider("habitual_be");
    CHECK(decide("I be in my office by 7:30.") == Label::positive);
    CHECK(decide("You have to be careful.") == Label::negative);
    CHECK(decide("It will be fine.") == Label::negative);

    auto scripted = MockChatClient::scripted(hb, {"a", "b"});
    CHECK(scripted.complete({"m", "x"}) == "a");
    CHECK(scripted.complete({"m", "x"}) == "b");
    CHECK(scripted.complete({"m", "x"}) == "a");
}

TEST_CASE("cache round trip, torn tail and corruption") {
    TempDir dir;
    const fs::path file = dir.path / "cache.jsonl";
    {
        ResponseCache cache(file);
        CHECK(cache.size() == 0);
        cache.append(ResponseCache::key("m", "p1"), ChatRequest{"m", "p1"}, "r1");
        cache.append(ResponseCache::key("m", "p2"), ChatRequest{"m", "p2"}, "r2");
    }
    {
        ResponseCache cache(file);
        CHECK(cache.size() == 2);
        CHECK(cache.find(ResponseCache::key("m", "p2")) == "r2");
        CHECK_FALSE(cache.find(ResponseCache::key("other", "p2")).has_value());
    }
    // A write interrupted mid-line is ignored, then overwritten by the next append.
    { std::ofstream(file, std::ios::app | std::ios::binary) << R"({"key":"m:abc","resp)"; }
    {
        ResponseCache cache(file);
        CHECK(cache.size() == 2);
        cache.append(ResponseCache::key("m", "p3"), ChatRequest{"m", "p3"}, "r3");
    }
    {
        ResponseCache cache(file);
        CHECK(cache.size() == 3);
        CHECK(cache.find(ResponseCache::key("m", "p3")) == "r3");
    }
    { std::ofstream(file, std::ios::app | std::ios::binary) << "garbage line\n"; }
    CHECK_THROWS_AS(ResponseCache{file}, CacheCorruptError);
}

TEST_CASE("harness runs batches in order") {
    const auto spec = spec_for_feature("multiple_negation");
    MockChatClient mock(spec, heuristic_decider("multiple_negation"));
    const auto recs = records(10);
    const auto result = run_batches(recs, "multiple_negation", spec, small_batches(), mock);
    REQUIRE(result.trace.size() == 10);
    CHECK(result.transcripts.size() == 3);
    CHECK(result.network_calls == 3);
    CHECK(result.unparsed == 0);
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(result.trace.entries[i].id == recs[i].id);
        CHECK(result.trace.entries[i].position == i);
        CHECK(result.trace.entries[i].batch == i / 4);
        CHECK(result.trace.entries[i].predicted == recs[i].label("multiple_negation"));
    }
    CHECK(result.report().f1_weighted == 1.0);
    CHECK(transcripts_to_jsonl(result.transcripts).find("\"from_cache\":false") != std::string::npos);
}

TEST_CASE("retries back off exponentially") {
    const auto spec = spec_for_feature("multiple_negation");
    MockChatClient mock(spec, heuristic_decider("multiple_negation"));
    std::vector<long long> waits;
    RunOptions opts;
    opts.sleep = [&](std::chrono::milliseconds d) { waits.push_back(d.count()); };
    mock.fail_next(2);
    const auto result = run_batches(records(4), "multiple_negation", spec, small_batches(), mock, opts);
    CHECK(waits == std::vector<long long>{100, 200});
    CHECK(result.transcripts[0].retries == 2);
    CHECK(result.network_calls == 3);

    waits.clear();
    mock.fail_next(100);
    try {
        (void)run_batches(records(4), "multiple_negation", spec, small_batches(), mock, opts);
        FAIL("expected RunAborted");
    } catch (const RunAborted &e) {
        CHECK(e.partial().trace.size() == 0);
        CHECK(e.partial().network_calls == 4);
    }
    CHECK(waits == std::vector<long long>{100, 200, 400});
}

TEST_CASE("aborted run keeps completed batches and resumes from the cache") {
    TempDir dir;
    const auto spec = spec_for_feature("multiple_negation");
    const auto recs = records(12);
    RunOptions opts;
    opts.sleep = [](std::chrono::milliseconds) {};

    // Succeed on batch 0, then fail persistently on batch 1.
    class FlakyAfterFirst final : public ChatClient {
      public:
        explicit FlakyAfterFirst(const PromptSpec &spec) : inner_(spec, heuristic_decider("multiple_negation")) {}
        std::string complete(const ChatRequest &r) override {
            if (++n_ > 1) {
                throw TransportError("down", true, 503);
            }
            return inner_.complete(r);
        }
        [[nodiscard]] std::size_t calls() const noexcept override { return static_cast<std::size_t>(n_); }

      private:
        MockChatClient inner_;
        int n_ = 0;
    };

    std::string first_trace;
    {
        ResponseCache cache(dir.path / "c.jsonl");
        opts.cache = &cache;
        FlakyAfterFirst flaky(spec);
        try {
            (void)run_batches(recs, "multiple_negation", spec, small_batches(), flaky, opts);
            FAIL("expected RunAborted");
        } catch (const RunAborted &e) {
            CHECK(e.partial().trace.size() == 4);
            CHECK(e.partial().transcripts.size() == 1);
        }
        CHECK(cache.size() == 1);
    }
    {
        ResponseCache cache(dir.path / "c.jsonl");
        opts.cache = &cache;
        MockChatClient mock(spec, heuristic_decider("multiple_negation"));
        const auto resumed = run_batches(recs, "multiple_negation", spec, small_batches(), mock, opts);
        CHECK(resumed.cache_hits == 1);
        CHECK(resumed.network_calls == 2);
        first_trace = bias::to_jsonl(resumed.trace);
    }
    {
        ResponseCache cache(dir.path / "c.jsonl");
        opts.cache = &cache;
        MockChatClient mock(spec, heuristic_decider("multiple_negation"));
        const auto warm = run_batches(recs, "multiple_negation", spec, small_batches(), mock, opts);
        CHECK(warm.network_calls == 0);
        CHECK(warm.cache_hits == 3);
        CHECK(bias::to_jsonl(warm.trace) == first_trace);
    }
}

TEST_CASE("unparsed responses are counted, not scored") {
    const auto spec = spec_for_feature("multiple_negation");
    auto mock = MockChatClient::scripted(spec, {"1. multiple negation\n2. ???\n3. no multiple negation"});
    LLMConfig c;
    c.batch_size = 4;
    const auto r = run_batches(records(4), "multiple_negation", spec, c, mock);
    CHECK(r.unparsed == 2);
    CHECK(r.trace.parsed_only().size() == 2);
    const auto rep = r.report();
    CHECK(rep.support_pos + rep.support_neg == 2);

    auto silent = MockChatClient::scripted(spec, {"nothing useful"});
    const auto none = run_batches(records(4), "multiple_negation", spec, c, silent);
    CHECK_THROWS_AS((void)none.report(), AnalysisError);
}
