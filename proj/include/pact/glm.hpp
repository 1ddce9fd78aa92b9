#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "pact/cohort.hpp"
#include "pact/dataset.hpp"

namespace pact {

struct FitOptions {
    double tolerance = 1e-8;  // |change in log-likelihood| that ends the iteration
    int max_iterations = 100;
    double ridge_jitter = 0.0;             // first diagonal shift tried when a solve fails
    double separation_coef_bound = 15.0;   // |beta| beyond this is treated as divergence
    bool full_hessian = true;              // multinomial only; false uses a fixed curvature bound

    void validate() const;
};

struct FitResult {
    std::vector<std::string> names;  // "intercept" first
    Eigen::VectorXd coefficients;
    Eigen::VectorXd standard_errors;
    Eigen::VectorXd z_scores;
    Eigen::VectorXd p_values;
    Eigen::VectorXd odds_ratios;
    Eigen::VectorXd ci_low;
    Eigen::VectorXd ci_high;
    Eigen::MatrixXd covariance;
    Eigen::VectorXd leverage;  // h_ii, one per training row
    std::vector<bool> separation_flags;
    std::vector<double> loglik_trace;  // log-likelihood after each accepted iteration, starting at beta = 0
    double log_likelihood = 0.0;
    double jitter = 0.0;  // diagonal shift in effect at the optimum
    int iterations = 0;
    bool converged = false;
};

/// Softmax fit with the reference class pinned at zero. Matrices are
/// p x K with one column per class in `classes` order.
struct MultinomialFit {
    std::vector<std::string> names;
    std::vector<int> classes;
    int reference = 0;
    Eigen::MatrixXd coefficients;
    Eigen::MatrixXd standard_errors;
    Eigen::MatrixXd z_scores;
    Eigen::MatrixXd p_values;
    Eigen::MatrixXd odds_ratios;
    Eigen::MatrixXd ci_low;
    Eigen::MatrixXd ci_high;
    Eigen::MatrixXd covariance;  // over the stacked non-reference coefficients
    std::vector<double> loglik_trace;
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;

    [[nodiscard]] Eigen::Index class_index(int cls) const;
};

// Numerically safe log(sigmoid(eta)) and log(1 - sigmoid(eta)), floored at log(1e-12).
double log_sigmoid(double eta);
double log_one_minus_sigmoid(double eta);
double sigmoid(double eta);

double log_likelihood(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
double log_likelihood(const Eigen::VectorXd& beta, const Dataset& dataset);
Eigen::VectorXd gradient(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);
Eigen::VectorXd gradient(const Eigen::VectorXd& beta, const Dataset& dataset);

// coef is p x K over `classes`; the gradient's reference column is zero.
double multinomial_log_likelihood(const Eigen::MatrixXd& coef, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  const std::vector<int>& classes);
Eigen::MatrixXd multinomial_gradient(const Eigen::MatrixXd& coef, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     const std::vector<int>& classes, int reference);

FitResult fit_binary(const Dataset& dataset, const FitOptions& options = {});
// Reference defaults to the largest class (smallest label on ties).
MultinomialFit fit_multinomial(const Dataset& dataset, std::optional<int> reference = std::nullopt,
                               const FitOptions& options = {});

// x includes the leading intercept entry.
double predict_proba(const FitResult& fit, const Eigen::Ref<const Eigen::VectorXd>& x);
double predict_proba(const FitResult& fit, const FeatureVector& features);
Eigen::VectorXd predict_proba(const MultinomialFit& fit, const Eigen::Ref<const Eigen::VectorXd>& x);
Eigen::VectorXd predict_proba(const MultinomialFit& fit, const FeatureVector& features);

struct WaldRow {
    std::string feature;
    std::optional<int> cls;  // multinomial only
    Eigen::Index coefficient_index = 0;
    double coefficient = 0.0;
    double standard_error = 0.0;
    double odds_ratio = 1.0;
    double ci_low = 1.0;
    double ci_high = 1.0;
    double p_value = 1.0;
    bool significant = false;
};

inline constexpr double kZ975 = 1.96;

// Two-sided normal p-value for a Wald statistic.
double wald_p_value(double z);
std::vector<WaldRow> wald_inference(const FitResult& fit, double alpha = 0.05);
std::vector<WaldRow> wald_inference(const MultinomialFit& fit, double alpha = 0.05);

nlohmann::ordered_json to_json(const FitResult& fit);
nlohmann::ordered_json to_json(const MultinomialFit& fit);

}  // namespace pact
