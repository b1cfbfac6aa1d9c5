#pragma once

#include "aaetag/error.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace aaetag::glm {

/// n x p covariates with named columns; the intercept is an explicit column of ones.
struct DesignMatrix {
    Eigen::MatrixXd x;
    std::vector<std::string> names;

    [[nodiscard]] std::size_t rows() const noexcept { return static_cast<std::size_t>(x.rows()); }
    [[nodiscard]] std::size_t cols() const noexcept { return static_cast<std::size_t>(x.cols()); }

    /// Index of the first all-ones column, if any.
    [[nodiscard]] std::optional<std::size_t> intercept_column() const;

    /// Throws InputError unless names match the columns, all entries are finite and n >= p.
    void validate() const;
};

struct FitConfig {
    int max_iter = 100;
    /// Convergence on max |score|, or on relative log-likelihood change.
    double tol = 1e-8;
    /// Ridge penalty (lambda/2)||beta||^2 on every column except the intercept. 0 means pure MLE.
    double l2 = 0.0;
    /// Largest |beta| tolerated in an unpenalized fit before declaring (quasi-)separation.
    double separation_bound = 30.0;
};

struct FitResult {
    std::vector<std::string> names;
    Eigen::VectorXd coef;
    Eigen::VectorXd std_err;
    Eigen::VectorXd z;
    Eigen::VectorXd p_value;
    double log_likelihood = 0.0;
    double null_log_likelihood = 0.0;
    double pseudo_r2 = 0.0;
    /// max |gradient of the (penalized) objective| at coef.
    double score_norm = 0.0;
    bool converged = false;
    int iterations = 0;

    [[nodiscard]] std::size_t index_of(const std::string &name) const;
};

class ConvergenceError : public AnalysisError {
  public:
    ConvergenceError(const std::string &what, FitResult last) : AnalysisError(what), last_(std::move(last)) {}
    [[nodiscard]] const FitResult &last_iterate() const noexcept { return last_; }

  private:
    FitResult last_;
};

class SeparationError : public AnalysisError {
  public:
    using AnalysisError::AnalysisError;
};

/// Newton-Raphson (equivalently IRLS) maximum-likelihood fit of a binomial-logit model with Wald
/// standard errors from the inverse information matrix.
[[nodiscard]] FitResult fit_logistic(const DesignMatrix &design, const Eigen::VectorXd &y, const FitConfig &config = {});

/// 1 - ll/ll0. Requires ll0 <= ll <= 0 and ll0 != 0.
[[nodiscard]] double mcfadden_pseudo_r2(double ll, double ll0);

/// Logistic of x.beta, without overflow for large |x.beta|.
[[nodiscard]] double predict_proba(const Eigen::VectorXd &coef, const Eigen::VectorXd &x_row);
[[nodiscard]] double logistic(double t) noexcept;

/// log(1 + exp(t)) without overflow.
[[nodiscard]] double log1p_exp(double t) noexcept;

// Building blocks of the objective, exposed for derivative checks.
[[nodiscard]] double log_likelihood(const Eigen::MatrixXd &x, const Eigen::VectorXd &y, const Eigen::VectorXd &beta);
/// Penalized objective ll(beta) - (l2/2) sum_{j != intercept} beta_j^2.
[[nodiscard]] double objective(const Eigen::MatrixXd &x, const Eigen::VectorXd &y, const Eigen::VectorXd &beta, double l2,
                               std::optional<std::size_t> intercept);
[[nodiscard]] Eigen::VectorXd gradient(const Eigen::MatrixXd &x, const Eigen::VectorXd &y, const Eigen::VectorXd &beta,
                                       double l2, std::optional<std::size_t> intercept);
/// Negative Hessian of the objective (the information matrix).
[[nodiscard]] Eigen::MatrixXd information(const Eigen::MatrixXd &x, const Eigen::VectorXd &beta, double l2,
                                          std::optional<std::size_t> intercept);

/// Two-sided standard-normal tail probability 2(1 - Phi(|z|)).
[[nodiscard]] double two_sided_p(double z) noexcept;

/// Regression summary: one coefficient row and one p row per listed variable, then pseudo-R2.
struct SummaryRow {
    std::string column;
    std::string label;
};
[[nodiscard]] std::string render_summary(const FitResult &fit, const std::vector<SummaryRow> &rows,
                                         const std::string &title = {});
[[nodiscard]] nlohmann::json to_json(const FitResult &fit);

}  // namespace aaetag::glm
