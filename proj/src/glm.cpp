#include "aaetag/glm.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace aaetag::glm {

namespace {

Eigen::VectorXd fitted(const Eigen::MatrixXd &x, const Eigen::VectorXd &beta) {
    return (x * beta).unaryExpr([](double t) { return logistic(t); });
}

double null_log_likelihood(const Eigen::VectorXd &y) {
    const double n = static_cast<double>(y.size());
    const double ones = y.sum();
    const double rate = ones / n;
    return ones * std::log(rate) + (n - ones) * std::log1p(-rate);
}

void fill_inference(FitResult &r, const Eigen::MatrixXd &info) {
    const auto p = r.coef.size();
    r.std_err = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
    r.z = r.std_err;
    r.p_value = r.std_err;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        return;
    }
    const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(p, p));
    for (Eigen::Index j = 0; j < p; ++j) {
        r.std_err[j] = std::sqrt(cov(j, j));
        r.z[j] = r.coef[j] / r.std_err[j];
        r.p_value[j] = two_sided_p(r.z[j]);
    }
}

}  // namespace

std::optional<std::size_t> DesignMatrix::intercept_column() const {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if ((x.col(j).array() == 1.0).all()) {
            return static_cast<std::size_t>(j);
        }
    }
    return std::nullopt;
}

void DesignMatrix::validate() const {
    if (names.size() != cols()) {
        throw InputError(fmt::format("design matrix: {} names for {} columns", names.size(), cols()));
    }
    if (rows() < cols()) {
        throw InputError(fmt::format("design matrix: n = {} < p = {}", rows(), cols()));
    }
    if (!x.allFinite()) {
        throw InputError("design matrix: non-finite entry");
    }
}

std::size_t FitResult::index_of(const std::string &name) const {
    const auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) {
        throw InputError("no coefficient named \"" + name + "\"");
    }
    return static_cast<std::size_t>(it - names.begin());
}

double logistic(double t) noexcept {
    if (t >= 0.0) {
        return 1.0 / (1.0 + std::exp(-t));
    }
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double log1p_exp(double t) noexcept {
    return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

double predict_proba(const Eigen::VectorXd &coef, const Eigen::VectorXd &x_row) {
    return logistic(coef.dot(x_row));
}

double two_sided_p(double z) noexcept {
    return std::erfc(std::abs(z) / std::sqrt(2.0));
}

double log_likelihood(const Eigen::MatrixXd &x, const Eigen::VectorXd &y, const Eigen::VectorXd &beta) {
    const Eigen::VectorXd eta = x * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        ll += y[i] * eta[i] - log1p_exp(eta[i]);
    }
    return ll;
}

double objective(const Eigen::MatrixXd &x, const Eigen::VectorXd &y, const Eigen::VectorXd &beta, double l2,
                 std::optional<std::size_t> intercept) {
    double penalty = beta.squaredNorm();
    if (intercept) {
        penalty -= beta[static_cast<Eigen::Index>(*intercept)] * beta[static_cast<Eigen::Index>(*intercept)];
    }
    return log_likelihood(x, y, beta) - 0.5 * l2 * penalty;
}

Eigen::VectorXd gradient(const Eigen::MatrixXd &x, const Eigen::VectorXd &y, const Eigen::VectorXd &beta, double l2,
                         std::optional<std::size_t> intercept) {
    Eigen::VectorXd g = x.transpose() * (y - fitted(x, beta));
    if (l2 > 0.0) {
        Eigen::VectorXd shrink = l2 * beta;
        if (intercept) {
            shrink[static_cast<Eigen::Index>(*intercept)] = 0.0;
        }
        g -= shrink;
    }
    return g;
}

Eigen::MatrixXd information(const Eigen::MatrixXd &x, const Eigen::VectorXd &beta, double l2,
                            std::optional<std::size_t> intercept) {
    const Eigen::VectorXd p = fitted(x, beta);
    const Eigen::VectorXd sqrt_w = (p.array() * (1.0 - p.array())).sqrt();
    const Eigen::MatrixXd xw = x.array().colwise() * sqrt_w.array();
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(x.cols(), x.cols());
    info.selfadjointView<Eigen::Lower>().rankUpdate(xw.transpose());
    info = info.selfadjointView<Eigen::Lower>();
    if (l2 > 0.0) {
        for (Eigen::Index j = 0; j < info.rows(); ++j) {
            if (!intercept || static_cast<std::size_t>(j) != *intercept) {
                info(j, j) += l2;
            }
        }
    }
    return info;
}

FitResult fit_logistic(const DesignMatrix &design, const Eigen::VectorXd &y, const FitConfig &config) {
    design.validate();
    const Eigen::MatrixXd &x = design.x;
    if (static_cast<std::size_t>(y.size()) != design.rows()) {
        throw InputError(fmt::format("fit_logistic: {} responses for {} rows", y.size(), design.rows()));
    }
    if (!(y.array() == 0.0 || y.array() == 1.0).all()) {
        throw InputError("fit_logistic: responses must be 0 or 1");
    }
    const double ones = y.sum();
    if (ones == 0.0 || ones == static_cast<double>(y.size())) {
        throw InputError("fit_logistic: both response classes must be present");
    }

    const auto intercept = design.intercept_column();
    const double l2 = config.l2;
    const bool check_separation = l2 == 0.0;

    FitResult r;
    r.names = design.names;
    r.coef = Eigen::VectorXd::Zero(x.cols());
    r.null_log_likelihood = null_log_likelihood(y);

    double obj = objective(x, y, r.coef, l2, intercept);
    Eigen::VectorXd g = gradient(x, y, r.coef, l2, intercept);
    Eigen::MatrixXd info;
    bool polish = false;

    auto finish = [&](bool converged) {
        r.converged = converged;
        r.score_norm = g.cwiseAbs().maxCoeff();
        r.log_likelihood = log_likelihood(x, y, r.coef);
        r.pseudo_r2 = 1.0 - r.log_likelihood / r.null_log_likelihood;
        fill_inference(r, information(x, r.coef, l2, intercept));
    };

    for (int iter = 1; iter <= config.max_iter; ++iter) {
        r.iterations = iter - 1;
        if (g.cwiseAbs().maxCoeff() < config.tol) {
            finish(true);
            return r;
        }
        info = information(x, r.coef, l2, intercept);
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
            if (check_separation) {
                throw SeparationError("fit_logistic: information matrix became singular (separation or collinear columns)");
            }
            throw AnalysisError("fit_logistic: information matrix is not positive definite");
        }
        Eigen::VectorXd step = ldlt.solve(g);
        if (!step.allFinite()) {
            throw AnalysisError("fit_logistic: non-finite Newton step");
        }

        // Step halving keeps the objective monotone.
        Eigen::VectorXd next = r.coef + step;
        double next_obj = objective(x, y, next, l2, intercept);
        for (int halvings = 0; halvings < 40 && !(next_obj >= obj - 1e-12 * std::abs(obj)); ++halvings) {
            step *= 0.5;
            next = r.coef + step;
            next_obj = objective(x, y, next, l2, intercept);
        }

        const double change = std::abs(next_obj - obj) / (std::abs(obj) + config.tol);
        r.coef = next;
        obj = next_obj;
        g = gradient(x, y, r.coef, l2, intercept);
        r.iterations = iter;

        if (check_separation && r.coef.cwiseAbs().maxCoeff() > config.separation_bound) {
            throw SeparationError(fmt::format(
                "fit_logistic: |beta| exceeded {} after {} iterations; the data are (quasi-)separated and the MLE does not exist",
                config.separation_bound, iter));
        }
        if (g.cwiseAbs().maxCoeff() < config.tol) {
            finish(true);
            return r;
        }
        if (polish) {
            finish(true);
            return r;
        }
        // A negligible change means we are at the optimum up to rounding; one more full Newton
        // step brings the score down to its floor.
        polish = change < config.tol;
    }
    finish(false);
    throw ConvergenceError(fmt::format("fit_logistic: no convergence after {} iterations (max |score| = {:.3g})",
                                       config.max_iter, r.score_norm),
                           r);
}

double mcfadden_pseudo_r2(double ll, double ll0) {
    if (ll0 == 0.0) {
        throw InputError("mcfadden_pseudo_r2: null log-likelihood is 0 (degenerate response)");
    }
    if (ll > 0.0 || ll < ll0) {
        throw InputError(fmt::format("mcfadden_pseudo_r2: need ll0 <= ll <= 0, got ll = {}, ll0 = {}", ll, ll0));
    }
    return 1.0 - ll / ll0;
}

std::string render_summary(const FitResult &fit, const std::vector<SummaryRow> &rows, const std::string &title) {
    std::string out;
    if (!title.empty()) {
        out += title + '\n';
    }
    std::size_t width = std::string_view("Pseudo R2").size();
    for (const SummaryRow &row : rows) {
        width = std::max(width, row.label.size() + 5);
    }
    auto p_text = [](double p) {
        return p < 0.001 ? std::string("<0.001") : fmt::format("{:.3f}", p);
    };
    for (const SummaryRow &row : rows) {
        const std::size_t j = fit.index_of(row.column);
        out += fmt::format("{:<{}}  {:>10.4f}\n", row.label + " coef", width, fit.coef[static_cast<Eigen::Index>(j)]);
        out += fmt::format("{:<{}}  {:>10}\n", row.label + " p", width, p_text(fit.p_value[static_cast<Eigen::Index>(j)]));
    }
    out += fmt::format("{:<{}}  {:>10.4f}\n", "Pseudo R2", width, fit.pseudo_r2);
    return out;
}

nlohmann::json to_json(const FitResult &fit) {
    nlohmann::json coefs = nlohmann::json::array();
    for (std::size_t j = 0; j < fit.names.size(); ++j) {
        const auto k = static_cast<Eigen::Index>(j);
        coefs.push_back({{"name", fit.names[j]},
                         {"coef", fit.coef[k]},
                         {"std_err", fit.std_err[k]},
                         {"z", fit.z[k]},
                         {"p_value", fit.p_value[k]}});
    }
    return {
        {"coefficients", coefs},
        {"log_likelihood", fit.log_likelihood},
        {"null_log_likelihood", fit.null_log_likelihood},
        {"pseudo_r2", fit.pseudo_r2},
        {"converged", fit.converged},
        {"iterations", fit.iterations},
        {"score_norm", fit.score_norm},
    };
}

}  // namespace aaetag::glm
