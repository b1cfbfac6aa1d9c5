#include "aaetag/error.hpp"
#include "aaetag/habitual.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>

using namespace aaetag;
using namespace aaetag::habitual;

namespace {

text::Sentence sent(const std::string &s) { return text::make_sentence("h", s); }

data::Dataset corpus_head(std::size_t n) {
    auto ds = data::load_dataset(oracle::source_path("data/corpus/habitual_be.tsv"), {std::string(data::habitual_be)});
    ds.records.resize(std::min(n, ds.records.size()));
    return ds;
}

}  // namespace

TEST_CASE("be context windows") {
    const auto ctx = extract_be_context(sent("I be in my office by 7:30 ."), 2);
    CHECK(ctx.be_index == 1);
    CHECK(ctx.left_tokens() == std::vector<std::string>{"<pad>", "i"});
    CHECK(ctx.right_tokens() == std::vector<std::string>{"in", "my"});
    CHECK(ctx.tags == std::vector<std::string>{"PAD", "PRON", "ADP", "PRON"});

    const auto alone = extract_be_context(sent("be"), 2);
    CHECK(alone.tokens == std::vector<std::string>(4, "<pad>"));
    CHECK(alone.tags == std::vector<std::string>(4, "PAD"));

    CHECK_THROWS_AS(extract_be_context(sent("They was happy."), 3), ZeroBeError);
    CHECK_THROWS_AS(extract_be_context(sent("Be what you be."), 3), MultipleBeError);
    CHECK(extract_be_context(sent("BE quiet"), 1).be_index == 0);
}

TEST_CASE("vectorize golden feature sets") {
    const std::vector<std::pair<std::string, std::string>> fixtures = {
        {"vectorize_office.txt", "I be in my office by 7:30."},
        {"vectorize_careful.txt", "You have to be careful."},
        {"vectorize_short.txt", "Be quiet!"},
    };
    const bool regen = std::getenv("AAETAG_REGEN_GOLDEN") != nullptr;
    for (const auto &[file, text] : fixtures) {
        const auto fv = vectorize(extract_be_context(sent(text), 3));
        std::string rendered;
        for (const auto &n : fv.names) {
            rendered += n + "\n";
        }
        const std::string path = oracle::source_path("tests/golden/" + file);
        if (regen) {
            std::ofstream(path, std::ios::binary) << rendered;
        }
        CHECK_MESSAGE(rendered == oracle::slurp(path), file);
        CHECK(std::is_sorted(fv.names.begin(), fv.names.end()));
        CHECK(std::count(fv.names.begin(), fv.names.end(), std::string(intercept_feature)) == 1);
        // 2k unigram slots x {lower, pos} + 2k bigrams x {lower, pos} + intercept
        CHECK(fv.names.size() == 4 * 3 + 4 * 3 + 1);
    }
}

TEST_CASE("model probability properties") {
    HabitualModel zero;
    const auto fv = vectorize(extract_be_context(sent("They be working late."), 3));
    CHECK(zero.probability(fv) == 0.5);

    HabitualModel m;
    m.weights = {{"intercept", 0.3}, {"slot=-1:pos=PRON", 1.7}, {"slot=+1:lower=working", -0.4}};
    HabitualModel flipped = m;
    for (auto &[name, w] : flipped.weights) {
        w = -w;
    }
    const double p = m.probability(fv);
    CHECK(p > 0.0);
    CHECK(p < 1.0);
    CHECK(flipped.probability(fv) == doctest::Approx(1.0 - p).epsilon(1e-15));

    const auto back = HabitualModel::from_json(m.to_json());
    CHECK(back.weights == m.weights);
    CHECK(back.k == m.k);
    CHECK_THROWS_AS(HabitualModel::from_json(nlohmann::json{{"format", "other"}}), InputError);
}

TEST_CASE("training on a slice of the shipped corpus") {
    const auto ds = corpus_head(600);
    TrainOptions opts;
    opts.folds = 3;
    opts.min_count = 4;
    opts.seed = 5;
    const auto a = train_habitual(ds, opts);
    REQUIRE(a.size() == 3);
    for (const auto &f : a) {
        CHECK(f.report.f1_weighted >= 0.0);
        CHECK(f.report.f1_weighted <= 1.0);
        CHECK(f.model.k == 3);
    }
    std::size_t scored = 0;
    for (const auto &f : a) {
        scored += f.report.support_pos + f.report.support_neg;
    }
    CHECK(scored == ds.size());

    opts.parallel_folds = false;
    const auto b = train_habitual(ds, opts);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].model.weights == b[i].model.weights);
        CHECK(a[i].report.counts == b[i].report.counts);
    }
}

TEST_CASE("prediction with a model fitted on the corpus") {
    const auto ds = corpus_head(1000);
    TrainOptions opts;
    const auto model = fit_model(ds.records, opts);
    const auto pos = predict_habitual(model, sent("I be in my office by 7:30."));
    const auto neg = predict_habitual(model, sent("You have to be careful."));
    CHECK(pos.label == Label::positive);
    CHECK(neg.label == Label::negative);
    CHECK(pos.probability > 0.5);
    CHECK(neg.probability < 0.5);
    CHECK_THROWS_AS(predict_habitual(model, sent("They was there.")), ZeroBeError);
}

TEST_CASE("training errors") {
    auto ds = corpus_head(60);
    for (auto &r : ds.records) {
        r.labels[std::string(data::habitual_be)] = 1;
    }
    TrainOptions opts;
    opts.folds = 3;
    CHECK_THROWS_AS(train_habitual(ds, opts), InputError);

    auto multi = corpus_head(40);
    multi.records[0].text = "Be what you be.";
    CHECK_THROWS_AS(train_habitual(multi, opts), MultipleBeError);
}
