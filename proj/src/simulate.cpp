#include "aaetag/simulate.hpp"

#include "aaetag/random.hpp"

#include <fmt/format.h>

#include <deque>

namespace aaetag::simulate {

LogisticSample logistic_uniform(std::size_t n, double intercept, double slope, std::uint64_t seed) {
    Rng rng(seed);
    LogisticSample s;
    s.design.names = {"intercept", "x"};
    s.design.x.resize(static_cast<Eigen::Index>(n), 2);
    s.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        const double x = rng.uniform(-1.0, 1.0);
        s.design.x(r, 0) = 1.0;
        s.design.x(r, 1) = x;
        s.y[r] = rng.bernoulli(glm::logistic(intercept + slope * x)) ? 1.0 : 0.0;
    }
    return s;
}

bias::PredictionTrace recency_trace(const RecencySimulation &sim, std::uint64_t seed) {
    Rng rng(seed);
    bias::PredictionTrace trace;
    std::deque<int> history;
    const std::size_t total = sim.rows + sim.window;
    for (std::size_t t = 0; t < total; ++t) {
        const int gold = rng.bernoulli(0.5) ? 1 : 0;
        double share_ones = 0.5;
        if (!history.empty()) {
            int ones = 0;
            for (const int h : history) {
                ones += h;
            }
            share_ones = static_cast<double>(ones) / static_cast<double>(history.size());
        }
        const double p = glm::logistic(sim.intercept + sim.beta_recency * share_ones + sim.beta_gold * gold);
        const int pred = rng.bernoulli(p) ? 1 : 0;
        history.push_back(pred);
        if (history.size() > sim.window) {
            history.pop_front();
        }
        trace.entries.push_back(bias::TraceEntry{fmt::format("sim-{:05}", t), label_from_bool(pred == 1),
                                                 label_from_bool(gold == 1), t / sim.batch_size, t});
    }
    return trace;
}

FormalitySample formality_trace(const FormalitySimulation &sim, std::uint64_t seed) {
    Rng rng(seed);
    FormalitySample out;
    for (std::size_t t = 0; t < sim.rows; ++t) {
        const int gold = rng.bernoulli(0.5) ? 1 : 0;
        const int flag = rng.bernoulli(0.5) ? 1 : 0;
        const double p = glm::logistic(sim.intercept + sim.beta_formality * flag + sim.beta_gold * gold);
        const int pred = rng.bernoulli(p) ? 1 : 0;
        const std::string id = fmt::format("sim-{:05}", t);
        out.trace.entries.push_back(bias::TraceEntry{id, label_from_bool(pred == 1), label_from_bool(gold == 1), 0, t});
        out.flags.emplace(id, flag);
    }
    return out;
}

}  // namespace aaetag::simulate
