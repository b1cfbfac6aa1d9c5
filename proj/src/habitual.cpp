#include "aaetag/habitual.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <future>
#include <set>
#include <unordered_map>

namespace aaetag::habitual {

namespace {

std::string offset_name(std::ptrdiff_t offset) {
    return offset > 0 ? fmt::format("+{}", offset) : fmt::format("{}", offset);
}

Label gold(const data::Record &r) {
    return r.label(std::string(data::habitual_be));
}

struct EncodedSet {
    std::vector<FeatureVector> features;
    std::vector<Label> labels;
};

EncodedSet encode(const std::vector<data::Record> &records, std::size_t k) {
    EncodedSet out;
    out.features.reserve(records.size());
    for (const data::Record &r : records) {
        out.features.push_back(vectorize(extract_be_context(r.sentence(), k)));
        out.labels.push_back(gold(r));
    }
    return out;
}

}  // namespace

BeContext extract_be_context(const text::Sentence &sentence, std::size_t k, const pos::Tagger &tagger) {
    std::vector<std::size_t> be;
    for (const text::Token &t : sentence.tokens) {
        if (t.lower == "be") {
            be.push_back(t.index);
        }
    }
    if (be.empty()) {
        throw ZeroBeError(fmt::format("sentence {} has no \"be\" token: \"{}\"", sentence.id, sentence.raw));
    }
    if (be.size() > 1) {
        throw MultipleBeError(fmt::format("sentence {} has {} \"be\" tokens: \"{}\"", sentence.id, be.size(), sentence.raw));
    }

    const auto tags = tagger.tag(sentence);
    BeContext ctx;
    ctx.be_index = be.front();
    ctx.k = k;
    const auto n = static_cast<std::ptrdiff_t>(sentence.tokens.size());
    const auto center = static_cast<std::ptrdiff_t>(ctx.be_index);
    auto push = [&](std::ptrdiff_t at) {
        if (at < 0 || at >= n) {
            ctx.tokens.emplace_back(pad_token);
            ctx.tags.emplace_back(pad_tag);
        } else {
            ctx.tokens.push_back(sentence.tokens[static_cast<std::size_t>(at)].lower);
            ctx.tags.emplace_back(pos::to_string(tags[static_cast<std::size_t>(at)]));
        }
    };
    const auto kk = static_cast<std::ptrdiff_t>(k);
    for (std::ptrdiff_t off = -kk; off <= -1; ++off) {
        push(center + off);
    }
    for (std::ptrdiff_t off = 1; off <= kk; ++off) {
        push(center + off);
    }
    return ctx;
}

FeatureVector vectorize(const BeContext &ctx) {
    const auto kk = static_cast<std::ptrdiff_t>(ctx.k);
    // Positions -k..+k with "be" at 0.
    std::vector<std::ptrdiff_t> offsets;
    std::vector<std::string> tokens;
    std::vector<std::string> tags;
    for (std::ptrdiff_t off = -kk; off <= kk; ++off) {
        offsets.push_back(off);
        if (off == 0) {
            tokens.emplace_back("be");
            tags.emplace_back("VERB");
            continue;
        }
        const auto slot = static_cast<std::size_t>(off < 0 ? off + kk : off + kk - 1);
        tokens.push_back(ctx.tokens[slot]);
        tags.push_back(ctx.tags[slot]);
    }

    std::set<std::string> names;
    names.emplace(intercept_feature);
    for (std::size_t i = 0; i < offsets.size(); ++i) {
        if (offsets[i] == 0) {
            continue;
        }
        const std::string slot = offset_name(offsets[i]);
        names.insert(fmt::format("slot={}:lower={}", slot, tokens[i]));
        names.insert(fmt::format("slot={}:pos={}", slot, tags[i]));
    }
    for (std::size_t i = 0; i + 1 < offsets.size(); ++i) {
        const std::string span = fmt::format("{},{}", offset_name(offsets[i]), offset_name(offsets[i + 1]));
        names.insert(fmt::format("slots={}:lower={}|{}", span, tokens[i], tokens[i + 1]));
        names.insert(fmt::format("slots={}:pos={}|{}", span, tags[i], tags[i + 1]));
    }
    return FeatureVector{{names.begin(), names.end()}};
}

double HabitualModel::probability(const FeatureVector &features) const {
    double score = 0.0;
    for (const std::string &name : features.names) {
        if (const auto it = weights.find(name); it != weights.end()) {
            score += it->second;
        }
    }
    return glm::logistic(score);
}

nlohmann::json HabitualModel::to_json() const {
    return {
        {"format", "aaetag-habitual-model"},
        {"version", 1},
        {"k", k},
        {"threshold", threshold},
        {"l2", l2},
        {"min_count", min_count},
        {"weights", weights},
        {"metadata", metadata},
    };
}

HabitualModel HabitualModel::from_json(const nlohmann::json &j) {
    if (j.value("format", std::string()) != "aaetag-habitual-model") {
        throw InputError("not a habitual model file");
    }
    HabitualModel m;
    m.k = j.at("k").get<std::size_t>();
    m.threshold = j.at("threshold").get<double>();
    m.l2 = j.value("l2", 1e-4);
    m.min_count = j.value("min_count", std::size_t{2});
    m.weights = j.at("weights").get<std::map<std::string, double>>();
    m.metadata = j.value("metadata", nlohmann::json::object());
    if (!(m.threshold > 0.0 && m.threshold < 1.0)) {
        throw InputError("habitual model: threshold must lie in (0, 1)");
    }
    return m;
}

Prediction predict_habitual(const HabitualModel &model, const text::Sentence &sentence) {
    const double p = model.probability(vectorize(extract_be_context(sentence, model.k)));
    return Prediction{label_from_bool(p >= model.threshold), p};
}

HabitualModel fit_model(const std::vector<data::Record> &training, const TrainOptions &options) {
    if (!(options.threshold > 0.0 && options.threshold < 1.0)) {
        throw InputError("habitual: threshold must lie in (0, 1)");
    }
    const EncodedSet set = encode(training, options.k);
    const auto positives = std::count(set.labels.begin(), set.labels.end(), Label::positive);
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(set.labels.size())) {
        throw InputError("habitual: training split holds a single label");
    }

    std::map<std::string, std::size_t> counts;
    for (const FeatureVector &fv : set.features) {
        for (const std::string &name : fv.names) {
            ++counts[name];
        }
    }
    std::vector<std::string> names;
    std::unordered_map<std::string, Eigen::Index> column;
    names.emplace_back(intercept_feature);
    column.emplace(std::string(intercept_feature), 0);
    for (const auto &[name, count] : counts) {
        if (name != intercept_feature && count >= options.min_count) {
            column.emplace(name, static_cast<Eigen::Index>(names.size()));
            names.push_back(name);
        }
    }

    glm::DesignMatrix design;
    design.names = names;
    design.x = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(set.features.size()), static_cast<Eigen::Index>(names.size()));
    Eigen::VectorXd y(static_cast<Eigen::Index>(set.features.size()));
    for (std::size_t i = 0; i < set.features.size(); ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        for (const std::string &name : set.features[i].names) {
            if (const auto it = column.find(name); it != column.end()) {
                design.x(row, it->second) = 1.0;
            }
        }
        y[row] = to_int(set.labels[i]);
    }
    if (design.rows() < design.cols()) {
        throw InputError(fmt::format("habitual: {} training rows for {} features; raise min_count", design.rows(),
                                     design.cols()));
    }

    glm::FitConfig fit = options.fit;
    fit.l2 = options.l2;
    const glm::FitResult result = glm::fit_logistic(design, y, fit);

    HabitualModel model;
    model.k = options.k;
    model.threshold = options.threshold;
    model.l2 = options.l2;
    model.min_count = options.min_count;
    for (std::size_t j = 0; j < names.size(); ++j) {
        model.weights[names[j]] = result.coef[static_cast<Eigen::Index>(j)];
    }
    model.metadata = {
        {"training_rows", training.size()},
        {"features", names.size()},
        {"iterations", result.iterations},
        {"log_likelihood", result.log_likelihood},
    };
    return model;
}

std::vector<FoldResult> train_habitual(const data::Dataset &dataset, const TrainOptions &options) {
    // Surface single-"be" violations before any fitting.
    for (const data::Record &r : dataset.records) {
        (void)extract_be_context(r.sentence(), options.k);
    }
    const std::string feature(data::habitual_be);
    const data::FoldPlan plan = data::kfold(dataset, feature, options.folds, options.seed);

    auto run_fold = [&](std::size_t fold) {
        std::vector<data::Record> train;
        std::vector<data::Record> test;
        for (std::size_t i = 0; i < dataset.records.size(); ++i) {
            const data::Record &r = dataset.records[i];
            if (plan.assignment[i] != fold) {
                train.push_back(r);
            } else if (options.augmented_in_test || !data::template_index(r)) {
                test.push_back(r);
            }
        }
        FoldResult out;
        out.fold = fold;
        try {
            out.model = fit_model(train, options);
        } catch (const glm::ConvergenceError &e) {
            throw glm::ConvergenceError(fmt::format("fold {}: {}", fold + 1, e.what()), e.last_iterate());
        } catch (const glm::SeparationError &e) {
            throw glm::SeparationError(fmt::format("fold {}: {}", fold + 1, e.what()));
        } catch (const InputError &e) {
            throw InputError(fmt::format("fold {}: {}", fold + 1, e.what()));
        }
        out.model.metadata["fold"] = fold + 1;
        out.model.metadata["folds"] = options.folds;
        out.model.metadata["seed"] = options.seed;

        std::vector<Label> preds;
        std::vector<Label> golds;
        for (const data::Record &r : test) {
            preds.push_back(predict_habitual(out.model, r.sentence()).label);
            golds.push_back(gold(r));
        }
        out.report = metrics::score(preds, golds);
        return out;
    };

    std::vector<FoldResult> results;
    if (options.parallel_folds) {
        std::vector<std::future<FoldResult>> pending;
        for (std::size_t f = 0; f < options.folds; ++f) {
            pending.push_back(std::async(std::launch::async, run_fold, f));
        }
        for (auto &p : pending) {
            results.push_back(p.get());
        }
    } else {
        for (std::size_t f = 0; f < options.folds; ++f) {
            results.push_back(run_fold(f));
        }
    }
    return results;
}

}  // namespace aaetag::habitual
