#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pact/dataset.hpp"
#include "pact/random.hpp"

namespace testutil {

inline pact::Dataset logistic_data(std::uint64_t seed, Eigen::Index n, const Eigen::VectorXd& beta,
                                   bool with_indicator = false) {
    pact::Rng rng(seed);
    const Eigen::Index p = beta.size() - 1;
    Eigen::MatrixXd f(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double eta = beta[0];
        for (Eigen::Index j = 0; j < p; ++j) {
            f(i, j) = (with_indicator && j == 0) ? static_cast<double>(rng.bernoulli(0.4)) : rng.normal();
            eta += beta[j + 1] * f(i, j);
        }
        y[i] = rng.uniform01() < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
    }
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
    return pact::make_dataset(f, y, names);
}

// Softmax data over classes 0..K-1; coef is p x K with column 0 the reference.
inline pact::Dataset softmax_data(std::uint64_t seed, Eigen::Index n, const Eigen::MatrixXd& coef) {
    pact::Rng rng(seed);
    const Eigen::Index p = coef.rows() - 1;
    const Eigen::Index k = coef.cols();
    Eigen::MatrixXd f(n, p);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXd x(p + 1);
        x[0] = 1.0;
        for (Eigen::Index j = 0; j < p; ++j) x[j + 1] = f(i, j) = rng.normal();
        Eigen::VectorXd eta = coef.transpose() * x;
        eta = (eta.array() - eta.maxCoeff()).exp();
        std::vector<double> w(eta.data(), eta.data() + k);
        y[i] = static_cast<double>(rng.categorical(w));
    }
    std::vector<std::string> names;
    for (Eigen::Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
    return pact::make_dataset(f, y, names, {pact::TaskKind::Multinomial, pact::Stage::Initial});
}

// 2x2 table: x=1 has 30 events / 10 non-events, x=0 has 10 / 30.
inline pact::Dataset two_by_two() {
    Eigen::MatrixXd f(80, 1);
    Eigen::VectorXd y(80);
    for (int i = 0; i < 80; ++i) {
        f(i, 0) = i < 40 ? 1.0 : 0.0;
        y[i] = (i < 30 || (i >= 40 && i < 50)) ? 1.0 : 0.0;
    }
    return pact::make_dataset(f, y, {"x"});
}

}  // namespace testutil
