#include "aaetag/error.hpp"
#include "aaetag/bias.hpp"
#include "aaetag/random.hpp"
#include "aaetag/simulate.hpp"

#include <doctest.h>

#include <cmath>

using namespace aaetag;
using namespace aaetag::bias;

namespace {

PredictionTrace make_trace(const std::vector<int> &pred, const std::vector<int> &gold = {}, std::size_t batch_size = 1000) {
    PredictionTrace t;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        TraceEntry e;
        e.id = "t" + std::to_string(i);
        if (pred[i] >= 0) {
            e.predicted = label_from_bool(pred[i] == 1);
        }
        e.gold = label_from_bool(!gold.empty() && gold[i] == 1);
        e.batch = i / batch_size;
        e.position = i;
        t.entries.push_back(e);
    }
    return t;
}

}  // namespace

TEST_CASE("recency on fixed sequences") {
    const auto rows = recency_feature(make_trace({1, 0, 1, 1, 0, 1}));
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].position == 5);
    CHECK(rows[0].proportion == doctest::Approx(0.6).epsilon(1e-15));

    for (const int v : {0, 1}) {
        for (const auto &r : recency_feature(make_trace(std::vector<int>(12, v)))) {
            CHECK(r.proportion == 1.0);
        }
    }
    const auto alt = recency_feature(make_trace({1, 0, 1, 0, 1, 0, 1}), {3, false});
    REQUIRE(alt.size() == 4);
    CHECK(alt[0].proportion == doctest::Approx(1.0 / 3.0));
    CHECK(alt[1].proportion == doctest::Approx(1.0 / 3.0));

    // Unparsed entries are dropped before windowing.
    const auto gap = recency_feature(make_trace({1, 1, -1, 1, 1, 1, 0}));
    REQUIRE(gap.size() == 1);
    CHECK(gap[0].id == "t6");
    CHECK(gap[0].proportion == 0.0);
}

TEST_CASE("recency properties against a recount") {
    Rng rng(21);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 6 + rng.index(60);
        std::vector<int> p;
        std::vector<int> g;
        for (std::size_t i = 0; i < n; ++i) {
            p.push_back(rng.bernoulli(0.5) ? 1 : 0);
            g.push_back(rng.bernoulli(0.5) ? 1 : 0);
        }
        const auto rows = recency_feature(make_trace(p, g));
        const auto rows_other_gold = recency_feature(make_trace(p));
        REQUIRE(rows.size() == n - 5);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const std::size_t i = r + 5;
            int same = 0;
            for (std::size_t j = i - 5; j < i; ++j) {
                same += p[j] == p[i] ? 1 : 0;
            }
            CHECK(rows[r].proportion == same / 5.0);
            const double scaled = rows[r].proportion * 5.0;
            CHECK(scaled == std::round(scaled));
            CHECK(rows[r].proportion == rows_other_gold[r].proportion);
        }
    }
}

TEST_CASE("reset per batch") {
    const auto t = make_trace({1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0}, {}, 6);
    const auto across = recency_feature(t);
    const auto reset = recency_feature(t, {5, true});
    CHECK(across.size() == 8);
    REQUIRE(reset.size() == 2);
    CHECK(reset[0].id == "t5");
    CHECK(reset[1].id == "t11");
    CHECK(reset[1].proportion == 1.0);
}

TEST_CASE("trace io and validation") {
    const auto t = make_trace({1, -1, 0, 1}, {1, 0, 0, 1});
    const auto back = parse_trace(to_jsonl(t));
    CHECK(back.entries == t.entries);
    CHECK(back.parsed_only().size() == 3);
    CHECK_THROWS_AS(parse_trace("{\"id\":\"a\",\"predicted\":2,\"gold\":0,\"batch\":0,\"position\":0}\n"), InputError);
    CHECK_THROWS_AS(parse_trace("not json\n"), InputError);
    auto bad = t;
    bad.entries[2].position = 0;
    CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("regression errors") {
    CHECK_THROWS_AS(run_recency_regression(make_trace({1, 0, 1, 0, 1})), InputError);
    CHECK_THROWS_AS(recency_feature(make_trace({1, 0, 1}), {0, false}), InputError);
    CHECK_THROWS_AS(run_recency_regression(make_trace(std::vector<int>(40, 1))), InputError);

    const auto t = make_trace({1, 0, 1, 0, 1, 1, 0, 0}, {1, 0, 1, 1, 0, 1, 0, 0});
    std::map<std::string, int> flags;
    for (std::size_t i = 0; i < 7; ++i) {
        flags["t" + std::to_string(i)] = static_cast<int>(i % 2);
    }
    try {
        (void)run_formality_regression(t, flags);
        FAIL("expected InputError");
    } catch (const InputError &e) {
        CHECK(std::string(e.what()).find("t7") != std::string::npos);
    }
    flags["t7"] = 3;
    CHECK_THROWS_AS(run_formality_regression(t, flags), InputError);
    for (auto &[id, f] : flags) {
        f = 1;
    }
    CHECK_THROWS_AS(run_formality_regression(t, flags), InputError);
}

TEST_CASE("regressions on simulated traces") {
    simulate::RecencySimulation sim;
    const auto trace = simulate::recency_trace(sim, 12);
    CHECK(trace.size() == sim.rows + sim.window);
    const auto rec = run_recency_regression(trace);
    CHECK(rec.rows == sim.rows);
    CHECK(rec.fit.coef[rec.fit.index_of("recency")] < 0.0);
    CHECK(render_recency(rec).find("Recency") != std::string::npos);
    CHECK(to_json(rec).contains("rows"));

    const auto form = simulate::formality_trace({}, 12);
    const auto fa = run_formality_regression(form.trace, form.flags);
    CHECK(fa.rows == 500);
    CHECK(fa.fit.coef[fa.fit.index_of("formality")] > 0.0);
    CHECK(render_formality(fa).find("Formality") != std::string::npos);
}

TEST_CASE("ordering plans") {
    const auto plans = default_ordering_plans(100);
    REQUIRE(plans.size() == 4);
    std::size_t runs = 0;
    std::vector<data::Record> probes;
    for (int i = 0; i < 10; ++i) {
        data::Record r;
        r.id = "p" + std::to_string(i);
        r.text = "s" + std::to_string(i);
        r.labels["habitual_be"] = i < 5 ? 1 : 0;
        probes.push_back(r);
    }
    for (const auto &plan : plans) {
        const auto built = build_ordering_runs(probes, plan, "habitual_be");
        CHECK(built.size() == 6);
        runs += built.size();
        for (const auto &run : built) {
            REQUIRE(run.records.size() == plan.batch_size);
            for (std::size_t i = 0; i < run.records.size(); ++i) {
                const bool gold = run.records[i].label("habitual_be") == Label::positive;
                const std::size_t slot = i % 10;
                const bool expected = plan.pattern == OrderingPattern::alternating ? slot % 2 == 0 : slot < 5;
                CHECK(gold == expected);
            }
        }
        auto ids = [](const OrderingRun &r) {
            std::vector<std::string> out;
            for (const auto &x : r.records) {
                out.push_back(x.id);
            }
            return out;
        };
        CHECK(ids(built[0]) != ids(built[1]));
    }
    CHECK(runs == 24);
    CHECK(parse_pattern(to_string(OrderingPattern::zeros_then_ones)) == OrderingPattern::zeros_then_ones);
    CHECK_THROWS_AS(parse_pattern("sideways"), InputError);
    probes.pop_back();
    CHECK_THROWS_AS(build_ordering_runs(probes, plans[0], "habitual_be"), InputError);
}
