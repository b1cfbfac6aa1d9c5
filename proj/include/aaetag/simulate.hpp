#pragma once

#include "aaetag/bias.hpp"
#include "aaetag/glm.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>

namespace aaetag::simulate {

struct LogisticSample {
    glm::DesignMatrix design;
    Eigen::VectorXd y;
};

/// n rows of [1, x] with x ~ Uniform(-1, 1) and y ~ Bernoulli(logistic(b0 + b1 x)).
[[nodiscard]] LogisticSample logistic_uniform(std::size_t n, double intercept, double slope, std::uint64_t seed);

/// Sequential predictor with injected recency bias. Gold labels are fair coin flips; prediction t
/// is 1 with probability logistic(intercept + beta_recency * s + beta_gold * gold), where s is the
/// share of the previous `window` predictions equal to 1 (shorter history at the start). The trace
/// holds `rows + window` entries so that `rows` of them carry a full window.
struct RecencySimulation {
    std::size_t rows = 500;
    std::size_t window = 5;
    double beta_recency = -4.0;
    double beta_gold = 2.0;
    double intercept = 0.0;
    std::size_t batch_size = 100;
};
[[nodiscard]] bias::PredictionTrace recency_trace(const RecencySimulation &sim, std::uint64_t seed);

/// Independent rows: gold and formality flag are fair coin flips; prediction is 1 with probability
/// logistic(intercept + beta_formality * flag + beta_gold * gold).
struct FormalitySimulation {
    std::size_t rows = 500;
    double beta_formality = 1.0;
    double beta_gold = 2.0;
    double intercept = -1.5;
};
struct FormalitySample {
    bias::PredictionTrace trace;
    std::map<std::string, int> flags;
};
[[nodiscard]] FormalitySample formality_trace(const FormalitySimulation &sim, std::uint64_t seed);

}  // namespace aaetag::simulate
