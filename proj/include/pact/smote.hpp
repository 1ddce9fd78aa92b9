#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pact/dataset.hpp"

namespace pact {

struct ResampleConfig {
    int k_neighbors = 5;
    std::uint64_t rng_seed = 0;
    // Per x column (intercept included). Empty: derived from the data, a column
    // counts as binary when all of its values are 0 or 1.
    std::vector<bool> binary_feature_mask;
};

// Provenance of one appended row: which minority pair it interpolates.
struct SyntheticOrigin {
    Eigen::Index base = 0;
    Eigen::Index neighbor = 0;
    double lambda = 0.0;
};

struct ResampleResult {
    Dataset dataset;                       // originals first, synthetic rows appended
    std::vector<SyntheticOrigin> origins;  // one per synthetic row, in order
    std::map<int, std::size_t> counts_before;
    std::map<int, std::size_t> counts_after;
    std::optional<std::string> note;
};

/// k nearest rows to `query` among the rows of `points` (Euclidean), the
/// query row itself excluded. Ties go to the lower row index.
std::vector<Eigen::Index> knn_minority(Eigen::Index query, const Eigen::MatrixXd& points, int k);

/// Oversamples every class below the majority count up to that count.
/// Distances and interpolation use the feature columns only (the intercept
/// is carried through unchanged). Each synthetic sample draws from its own
/// substream of `rng_seed`, so output does not depend on evaluation order.
ResampleResult smote(const Dataset& dataset, const ResampleConfig& config);

}  // namespace pact
