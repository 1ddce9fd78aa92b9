#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "pact/dataset.hpp"

namespace pact {

struct Confusion {
    std::vector<int> classes;  // row/column order
    Eigen::MatrixXi counts;    // rows = truth, cols = predicted

    [[nodiscard]] long total() const { return counts.sum(); }
};

Confusion confusion(const std::vector<int>& predicted, const std::vector<int>& truth,
                    const std::vector<int>& classes);

struct ClassMetrics {
    int cls = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long support = 0;
};

struct MetricsReport {
    Confusion matrix;
    std::vector<ClassMetrics> per_class;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    double accuracy = 0.0;
    std::vector<std::string> notes;
};

MetricsReport precision_recall_f1(const Confusion& matrix);

// Per row: fold index in [0, folds). Classes are dealt round-robin after a
// seeded shuffle; the dealing position carries over between classes.
std::vector<int> stratified_folds(const Eigen::VectorXd& y, int folds, std::uint64_t seed);

struct CvConfig {
    int folds = 10;
    int repeats = 10;
    std::uint64_t seed = 0;
};

// Trains on a dataset and returns a predictor of class labels for rows of x.
using Predictor = std::function<std::vector<int>(const Eigen::MatrixXd& x)>;
using Trainer = std::function<Predictor(const Dataset& train, std::uint64_t fold_seed)>;

struct CvResult {
    double mean_accuracy = 0.0;
    double sd_accuracy = 0.0;
    std::vector<double> fold_accuracies;  // repeat-major
    MetricsReport pooled;                 // confusion summed over all evaluation folds
    int folds = 0;
    int repeats = 0;
    std::vector<std::string> fold_failures;
};

CvResult repeated_stratified_cv(const Dataset& dataset, const CvConfig& config, const Trainer& trainer);

nlohmann::ordered_json to_json(const MetricsReport& m);
nlohmann::ordered_json to_json(const CvResult& cv);

}  // namespace pact
