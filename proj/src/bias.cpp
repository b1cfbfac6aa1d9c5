#include "aaetag/bias.hpp"

#include "aaetag/error.hpp"
#include "aaetag/json_io.hpp"
#include "aaetag/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace aaetag::bias {

namespace {

constexpr const char *recency_column = "recency";
constexpr const char *formality_column = "formality";
constexpr const char *gold_column = "gold";

double pearson(const std::vector<double> &a, const std::vector<double> &b) {
    const auto n = static_cast<double>(a.size());
    double ma = 0.0;
    double mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) {
        return 0.0;
    }
    return sab / std::sqrt(saa * sbb);
}

glm::DesignMatrix three_column_design(const std::vector<double> &covariate, const std::vector<double> &gold,
                                      const char *covariate_name) {
    glm::DesignMatrix d;
    d.names = {"intercept", covariate_name, gold_column};
    d.x.resize(static_cast<Eigen::Index>(covariate.size()), 3);
    for (std::size_t i = 0; i < covariate.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        d.x(r, 0) = 1.0;
        d.x(r, 1) = covariate[i];
        d.x(r, 2) = gold[i];
    }
    return d;
}

void require_both_predictions(const Eigen::VectorXd &y, std::string_view analysis) {
    const double ones = y.sum();
    if (ones == 0.0 || ones == static_cast<double>(y.size())) {
        throw InputError(fmt::format("{}: the included predictions hold a single class", analysis));
    }
}

}  // namespace

void PredictionTrace::validate() const {
    for (std::size_t i = 1; i < entries.size(); ++i) {
        if (entries[i].position <= entries[i - 1].position) {
            throw InputError(fmt::format("trace: position {} of entry {} does not increase", entries[i].position,
                                         entries[i].id));
        }
    }
}

PredictionTrace PredictionTrace::parsed_only() const {
    PredictionTrace out;
    for (const TraceEntry &e : entries) {
        if (e.predicted) {
            out.entries.push_back(e);
        }
    }
    return out;
}

std::string to_jsonl(const PredictionTrace &trace) {
    std::string out;
    for (const TraceEntry &e : trace.entries) {
        nlohmann::ordered_json j;
        j["id"] = e.id;
        j["predicted"] = e.predicted ? nlohmann::ordered_json(to_int(*e.predicted)) : nlohmann::ordered_json(nullptr);
        j["gold"] = to_int(e.gold);
        j["batch"] = e.batch;
        j["position"] = e.position;
        out += j.dump() + '\n';
    }
    return out;
}

PredictionTrace parse_trace(std::string_view jsonl) {
    PredictionTrace trace;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < jsonl.size()) {
        std::size_t end = jsonl.find('\n', pos);
        if (end == std::string_view::npos) {
            end = jsonl.size();
        }
        const std::string_view line = jsonl.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            continue;
        }
        const nlohmann::json j = io::parse_json(line, fmt::format("trace line {}", line_no));
        try {
            TraceEntry e;
            e.id = j.at("id").get<std::string>();
            if (!j.at("predicted").is_null()) {
                const int p = j.at("predicted").get<int>();
                if (p != 0 && p != 1) {
                    throw InputError("predicted must be 0, 1 or null");
                }
                e.predicted = label_from_bool(p == 1);
            }
            const int g = j.at("gold").get<int>();
            if (g != 0 && g != 1) {
                throw InputError("gold must be 0 or 1");
            }
            e.gold = label_from_bool(g == 1);
            e.batch = j.at("batch").get<std::size_t>();
            e.position = j.at("position").get<std::size_t>();
            trace.entries.push_back(std::move(e));
        } catch (const nlohmann::json::exception &ex) {
            throw InputError(fmt::format("trace line {}: {}", line_no, ex.what()));
        } catch (const InputError &ex) {
            throw InputError(fmt::format("trace line {}: {}", line_no, ex.what()));
        }
    }
    trace.validate();
    return trace;
}

PredictionTrace load_trace(const std::filesystem::path &path) {
    return parse_trace(io::read_text_file(path));
}

std::vector<RecencyRow> recency_feature(const PredictionTrace &trace, const RecencyOptions &options) {
    if (options.window == 0) {
        throw InputError("recency: window must be positive");
    }
    trace.validate();
    const PredictionTrace parsed = trace.parsed_only();
    if (parsed.size() < options.window + 1) {
        throw InputError(fmt::format("recency: trace holds {} parsed predictions; a window of {} needs at least {}",
                                     parsed.size(), options.window, options.window + 1));
    }

    std::vector<RecencyRow> rows;
    std::size_t run_start = 0;
    for (std::size_t i = 0; i < parsed.entries.size(); ++i) {
        const TraceEntry &e = parsed.entries[i];
        if (options.reset_per_batch && i > 0 && e.batch != parsed.entries[i - 1].batch) {
            run_start = i;
        }
        if (i - run_start < options.window) {
            continue;
        }
        std::size_t same = 0;
        for (std::size_t j = i - options.window; j < i; ++j) {
            if (*parsed.entries[j].predicted == *e.predicted) {
                ++same;
            }
        }
        rows.push_back(RecencyRow{e.id, e.position, *e.predicted, e.gold,
                                  static_cast<double>(same) / static_cast<double>(options.window)});
    }
    return rows;
}

RecencyAnalysis run_recency_regression(const PredictionTrace &trace, const RecencyOptions &options) {
    const std::size_t parsed = trace.parsed_only().size();
    if (parsed <= options.window + 2) {
        throw InputError(fmt::format("recency regression: {} parsed predictions; need more than {}", parsed,
                                     options.window + 2));
    }
    const auto rows = recency_feature(trace, options);
    std::vector<double> recency;
    std::vector<double> gold;
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        recency.push_back(rows[i].proportion);
        gold.push_back(to_int(rows[i].gold));
        y[static_cast<Eigen::Index>(i)] = to_int(rows[i].predicted);
    }
    require_both_predictions(y, "recency regression");

    RecencyAnalysis out;
    out.fit = glm::fit_logistic(three_column_design(recency, gold, recency_column), y);
    out.rows = rows.size();
    out.unparsed_dropped = trace.size() - parsed;
    out.recency_gold_correlation = pearson(recency, gold);
    return out;
}

FormalityAnalysis run_formality_regression(const PredictionTrace &trace, const std::map<std::string, int> &flags) {
    trace.validate();
    const PredictionTrace parsed = trace.parsed_only();
    std::vector<std::string> missing;
    for (const TraceEntry &e : parsed.entries) {
        if (!flags.contains(e.id)) {
            missing.push_back(e.id);
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (std::size_t i = 0; i < missing.size() && i < 20; ++i) {
            list += (i ? ", " : "") + missing[i];
        }
        if (missing.size() > 20) {
            list += fmt::format(", ... ({} total)", missing.size());
        }
        throw InputError("formality regression: no formality flag for ids " + list);
    }

    std::vector<double> flag;
    std::vector<double> gold;
    Eigen::VectorXd y(static_cast<Eigen::Index>(parsed.size()));
    for (std::size_t i = 0; i < parsed.entries.size(); ++i) {
        const TraceEntry &e = parsed.entries[i];
        const int f = flags.at(e.id);
        if (f != 0 && f != 1) {
            throw InputError(fmt::format("formality regression: flag {} for id {} is not binary", f, e.id));
        }
        flag.push_back(f);
        gold.push_back(to_int(e.gold));
        y[static_cast<Eigen::Index>(i)] = to_int(*e.predicted);
    }
    if (flag.empty() || std::all_of(flag.begin(), flag.end(), [&](double v) { return v == flag.front(); })) {
        throw InputError("formality regression: both flag values must be present");
    }
    require_both_predictions(y, "formality regression");

    FormalityAnalysis out;
    out.fit = glm::fit_logistic(three_column_design(flag, gold, formality_column), y);
    out.rows = parsed.size();
    out.unparsed_dropped = trace.size() - parsed.size();
    return out;
}

std::map<std::string, int> formality_flags(const data::Dataset &dataset) {
    std::map<std::string, int> out;
    for (const data::Record &r : dataset.records) {
        if (r.formality) {
            out.emplace(r.id, *r.formality);
        }
    }
    return out;
}

std::string render_recency(const RecencyAnalysis &a, const std::string &title) {
    std::string out = glm::render_summary(a.fit, {{recency_column, "Recency"}, {gold_column, "Ground"}}, title);
    out += fmt::format("rows {}  unparsed dropped {}  corr(recency, gold) {:.4f}\n", a.rows, a.unparsed_dropped,
                       a.recency_gold_correlation);
    return out;
}

std::string render_formality(const FormalityAnalysis &a, const std::string &title) {
    std::string out = glm::render_summary(a.fit, {{formality_column, "Formality"}, {gold_column, "Ground"}}, title);
    out += fmt::format("rows {}  unparsed dropped {}\n", a.rows, a.unparsed_dropped);
    return out;
}

nlohmann::json to_json(const RecencyAnalysis &a) {
    nlohmann::json j = glm::to_json(a.fit);
    j["rows"] = a.rows;
    j["unparsed_dropped"] = a.unparsed_dropped;
    j["recency_gold_correlation"] = a.recency_gold_correlation;
    return j;
}

nlohmann::json to_json(const FormalityAnalysis &a) {
    nlohmann::json j = glm::to_json(a.fit);
    j["rows"] = a.rows;
    j["unparsed_dropped"] = a.unparsed_dropped;
    return j;
}

// ---------------------------------------------------------------------------------------------

std::string_view to_string(OrderingPattern pattern) noexcept {
    switch (pattern) {
        case OrderingPattern::alternating:
            return "alternating";
        case OrderingPattern::ones_then_zeros:
            return "ones_then_zeros";
        case OrderingPattern::zeros_then_ones:
            return "zeros_then_ones";
    }
    return "alternating";
}

OrderingPattern parse_pattern(std::string_view name) {
    for (const auto p : {OrderingPattern::alternating, OrderingPattern::ones_then_zeros, OrderingPattern::zeros_then_ones}) {
        if (to_string(p) == name) {
            return p;
        }
    }
    throw InputError(fmt::format("unknown ordering pattern \"{}\"", name));
}

std::string OrderingRun::name() const {
    return fmt::format("{}_b{}_r{}", to_string(pattern), batch_size, repetition + 1);
}

std::vector<OrderingPlan> default_ordering_plans(std::uint64_t base_seed, std::size_t repetitions) {
    std::vector<OrderingPlan> plans;
    std::uint64_t seed = base_seed;
    for (const std::size_t batch : {std::size_t{10}, std::size_t{30}}) {
        for (const auto pattern : {OrderingPattern::alternating, OrderingPattern::ones_then_zeros}) {
            OrderingPlan plan;
            plan.pattern = pattern;
            plan.batch_size = batch;
            for (std::size_t r = 0; r < repetitions; ++r) {
                plan.shuffle_seeds.push_back(seed++);
            }
            plans.push_back(std::move(plan));
        }
    }
    return plans;
}

std::vector<OrderingRun> build_ordering_runs(const std::vector<data::Record> &probes, const OrderingPlan &plan,
                                             const std::string &feature) {
    std::vector<data::Record> ones;
    std::vector<data::Record> zeros;
    for (const data::Record &r : probes) {
        (r.label(feature) == Label::positive ? ones : zeros).push_back(r);
    }
    if (probes.size() != 2 * probes_per_label || ones.size() != probes_per_label) {
        throw InputError(fmt::format("ordering: need exactly {} probes with gold 1 and {} with gold 0; got {} and {}",
                                     probes_per_label, probes_per_label, ones.size(), zeros.size()));
    }
    if (plan.batch_size == 0 || plan.batch_size % probes.size() != 0) {
        throw InputError(fmt::format("ordering: batch size {} is not a multiple of {}", plan.batch_size, probes.size()));
    }

    // Gold label per slot of one 10-probe block.
    std::vector<int> pattern;
    for (std::size_t i = 0; i < probes.size(); ++i) {
        switch (plan.pattern) {
            case OrderingPattern::alternating:
                pattern.push_back(i % 2 == 0 ? 1 : 0);
                break;
            case OrderingPattern::ones_then_zeros:
                pattern.push_back(i < probes_per_label ? 1 : 0);
                break;
            case OrderingPattern::zeros_then_ones:
                pattern.push_back(i < probes_per_label ? 0 : 1);
                break;
        }
    }

    std::vector<OrderingRun> runs;
    for (std::size_t rep = 0; rep < plan.shuffle_seeds.size(); ++rep) {
        OrderingRun run;
        run.pattern = plan.pattern;
        run.batch_size = plan.batch_size;
        run.repetition = rep;
        run.seed = plan.shuffle_seeds[rep];
        Rng rng(run.seed);
        const std::size_t blocks = plan.batch_size / probes.size();
        for (std::size_t block = 0; block < blocks; ++block) {
            std::vector<data::Record> a = ones;
            std::vector<data::Record> b = zeros;
            rng.shuffle(std::span<data::Record>(a));
            rng.shuffle(std::span<data::Record>(b));
            std::size_t ia = 0;
            std::size_t ib = 0;
            for (const int gold : pattern) {
                data::Record r = gold == 1 ? a[ia++] : b[ib++];
                if (blocks > 1) {
                    r.id = fmt::format("{}#{}", r.id, block + 1);
                }
                run.records.push_back(std::move(r));
            }
        }
        runs.push_back(std::move(run));
    }
    return runs;
}

}  // namespace aaetag::bias
