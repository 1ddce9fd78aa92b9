#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pact/dataset.hpp"
#include "pact/glm.hpp"

namespace pact {

struct EliminationStep {
    int round = 0;
    std::string feature;
    double criterion = 0.0;       // |beta| * sd(column) of the eliminated feature
    double log_likelihood = 0.0;  // of the fit that chose it
};

struct EliminationTrace {
    std::vector<EliminationStep> steps;
    std::vector<std::string> survivors;          // by final criterion, descending
    std::vector<double> survivor_criteria;
    std::vector<std::string> importance;         // most important first
    std::optional<std::string> diagnostic;       // set when the trace stopped early
    std::string criterion_label = "|coefficient| x sd(column), refit each round";
};

// Standardized-coefficient magnitude per feature (intercept excluded). For
// multinomial fits the largest magnitude across non-reference classes is used.
std::vector<double> standardized_criteria(const Dataset& dataset, const Eigen::MatrixXd& coefficients);

EliminationTrace recursive_eliminate(const Dataset& dataset, std::size_t min_features, const FitOptions& options);

struct RankedFeature {
    std::string feature;
    double criterion = 0.0;
};

struct ImportanceReport {
    std::vector<RankedFeature> features;
    std::optional<std::string> note;
};

ImportanceReport importance_report(const EliminationTrace& trace, std::size_t top_k);

nlohmann::ordered_json to_json(const EliminationTrace& trace, std::size_t top_k);

}  // namespace pact
