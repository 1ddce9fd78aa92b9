#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "pact/dataset.hpp"
#include "pact/glm.hpp"

namespace pact {

struct CorrelationResult {
    std::vector<std::string> names;     // features with nonzero variance
    std::vector<std::string> excluded;  // zero-variance features left out
    Eigen::MatrixXd matrix;
    double max_abs_offdiag = 0.0;
    double threshold = 0.3;
    bool pass = true;
};

// Pairwise Pearson coefficients over the feature columns (intercept excluded).
CorrelationResult correlation_matrix(const Dataset& dataset, double threshold = 0.3);

struct LinearityBin {
    double lower = 0.0;
    double upper = 0.0;
    double mean = 0.0;
    std::size_t count = 0;
    std::size_t positives = 0;
    double log_odds = 0.0;
    bool dropped = false;  // pure-outcome bin
};

struct LinearityTable {
    std::string feature;
    std::vector<LinearityBin> bins;
    std::size_t dropped_bins = 0;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

inline const std::vector<std::string>& continuous_diagnostic_features() {
    static const std::vector<std::string> names = {"prior_commits", "re_discip_reports", "off_1_gs_max",
                                                   "off_1_prs_max", "ic_institut_adj"};
    return names;
}

/// Equal-count bins over the feature (tied values kept together); empirical
/// log odds per bin regressed on bin means by least squares.
LinearityTable log_odds_linearity(const Dataset& dataset, const std::string& feature, int bins = 10);

// Residual for one observation from its fitted probability.
double deviance_residual(double y, double mu);
Eigen::VectorXd deviance_residuals(const FitResult& fit, const Dataset& dataset);

struct ResidualBin {
    double fitted_mean = 0.0;
    double residual_mean = 0.0;
    double standard_error = 0.0;
    std::size_t count = 0;
    bool within_band = true;
};

struct PearsonResiduals {
    Eigen::VectorXd fitted;
    Eigen::VectorXd raw;          // (y - mu) / sqrt(mu (1 - mu))
    Eigen::VectorXd studentized;  // raw / sqrt(1 - h)
};

// Studentizes given raw residuals by leverage; throws LeverageError when h >= 1.
Eigen::VectorXd studentize(const Eigen::VectorXd& raw, const Eigen::VectorXd& leverage);
PearsonResiduals studentized_pearson_residuals(const FitResult& fit, const Dataset& dataset);

// Equal-count bins of `values` ordered by `fitted`, with mean and SE per bin.
std::vector<ResidualBin> bin_by_fitted(const Eigen::VectorXd& fitted, const Eigen::VectorXd& values, int bins,
                                       double band = 2.0);
// True when every bin mean lies within +-band standard errors of zero.
bool flat(const std::vector<ResidualBin>& bins);

struct DiagnosticsConfig {
    double correlation_threshold = 0.3;
    int linearity_bins = 10;
    int residual_plot_bins = 10;
    int flatness_bins = 4;
    double flatness_band = 2.0;
};

struct DiagnosticsReport {
    CorrelationResult correlation;
    std::vector<LinearityTable> linearity;
    std::vector<std::string> linearity_skipped;  // feature: reason
    bool residuals_available = false;
    Eigen::VectorXd fitted;
    Eigen::VectorXd deviance;
    Eigen::VectorXd studentized_pearson;
    double deviance_sum_squares = 0.0;
    std::vector<ResidualBin> deviance_bins;
    std::vector<ResidualBin> pearson_bins;
    bool deviance_flat = false;
    bool pearson_flat = false;
    DiagnosticsConfig config;
};

/// Collinearity and linearity on `unbalanced`; residual checks on the binary
/// fit and the data it was trained on.
DiagnosticsReport run_diagnostics(const Dataset& unbalanced, const FitResult* fit, const Dataset* training,
                                  const DiagnosticsConfig& config);

nlohmann::ordered_json to_json(const DiagnosticsReport& report);

// One delimited file per panel under `dir`.
void write_plot_data(const DiagnosticsReport& report, const std::filesystem::path& dir);

}  // namespace pact
