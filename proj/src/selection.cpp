#include "pact/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pact/error.hpp"

namespace pact {

std::vector<double> standardized_criteria(const Dataset& dataset, const Eigen::MatrixXd& coefficients) {
    std::vector<double> out;
    const Eigen::Index n = dataset.rows();
    for (Eigen::Index j = 1; j < dataset.cols(); ++j) {
        const auto col = dataset.x.col(j);
        const double mean = col.mean();
        const double sd = n > 1 ? std::sqrt((col.array() - mean).square().sum() / static_cast<double>(n - 1)) : 0.0;
        out.push_back(coefficients.row(j).cwiseAbs().maxCoeff() * sd);
    }
    return out;
}

namespace {

struct RoundFit {
    Eigen::MatrixXd coefficients;
    double log_likelihood = 0.0;
    bool converged = false;
};

RoundFit fit_round(const Dataset& d, const FitOptions& options) {
    RoundFit r;
    if (d.task.binary()) {
        auto f = fit_binary(d, options);
        r.coefficients = f.coefficients;
        r.log_likelihood = f.log_likelihood;
        r.converged = f.converged;
    } else {
        auto f = fit_multinomial(d, std::nullopt, options);
        r.coefficients = f.coefficients;
        r.log_likelihood = f.log_likelihood;
        r.converged = f.converged;
    }
    return r;
}

// Criteria within this relative distance count as tied (refits differ in the last bits).
constexpr double kTieTolerance = 1e-9;

// Index of the smallest criterion; ties go to the alphabetically first name.
std::size_t weakest(const std::vector<double>& crit, const std::vector<std::string>& names) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < crit.size(); ++j) {
        const bool tie = std::abs(crit[j] - crit[best]) <= kTieTolerance * std::max(std::abs(crit[j]), std::abs(crit[best]));
        if (tie ? names[j] < names[best] : crit[j] < crit[best]) best = j;
    }
    return best;
}

}  // namespace

EliminationTrace recursive_eliminate(const Dataset& dataset, std::size_t min_features, const FitOptions& options) {
    if (min_features < 1) throw ConfigError("min_features must be at least 1");
    EliminationTrace trace;
    Dataset current = dataset;
    int round = 0;

    auto finish = [&](const std::vector<double>& crit) {
        std::vector<std::size_t> order(current.feature_names.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
            if (crit[a] != crit[b]) return crit[a] > crit[b];
            return current.feature_names[a] < current.feature_names[b];
        });
        for (auto j : order) {
            trace.survivors.push_back(current.feature_names[j]);
            trace.survivor_criteria.push_back(crit[j]);
        }
        trace.importance = trace.survivors;
        for (auto it = trace.steps.rbegin(); it != trace.steps.rend(); ++it) trace.importance.push_back(it->feature);
    };

    while (true) {
        RoundFit fit;
        try {
            fit = fit_round(current, options);
        } catch (const Error& e) {
            trace.diagnostic = "round " + std::to_string(round + 1) + " fit failed: " + e.what();
            finish(std::vector<double>(current.feature_names.size(), 0.0));
            return trace;
        }
        if (!fit.converged) {
            trace.diagnostic = "round " + std::to_string(round + 1) + " fit did not converge";
            finish(std::vector<double>(current.feature_names.size(), 0.0));
            return trace;
        }
        const auto crit = standardized_criteria(current, fit.coefficients);
        if (current.feature_names.size() <= min_features) {
            finish(crit);
            return trace;
        }
        const auto j = weakest(crit, current.feature_names);
        ++round;
        trace.steps.push_back({round, current.feature_names[j], crit[j], fit.log_likelihood});
        current = current.drop_features({current.feature_names[j]});
    }
}

ImportanceReport importance_report(const EliminationTrace& trace, std::size_t top_k) {
    ImportanceReport rep;
    if (trace.importance.empty()) throw UsageError("importance_report: empty trace");
    if (top_k > trace.importance.size()) {
        rep.note = "top_k " + std::to_string(top_k) + " clipped to " + std::to_string(trace.importance.size());
        top_k = trace.importance.size();
    }
    for (std::size_t i = 0; i < top_k; ++i) {
        const auto& name = trace.importance[i];
        double crit = 0.0;
        if (i < trace.survivors.size()) {
            crit = trace.survivor_criteria[i];
        } else {
            for (const auto& s : trace.steps)
                if (s.feature == name) crit = s.criterion;
        }
        rep.features.push_back({name, crit});
    }
    return rep;
}

nlohmann::ordered_json to_json(const EliminationTrace& trace, std::size_t top_k) {
    nlohmann::ordered_json j;
    j["criterion"] = trace.criterion_label;
    j["note"] = "criterion and stopping rule are this tool's choice; rankings are not a replication of any published ranking";
    auto& steps = j["eliminated"] = nlohmann::ordered_json::array();
    for (const auto& s : trace.steps)
        steps.push_back({{"round", s.round}, {"feature", s.feature}, {"criterion", s.criterion},
                         {"loglik", s.log_likelihood}});
    j["survivors"] = trace.survivors;
    j["importance_rank"] = trace.importance;
    const auto rep = importance_report(trace, top_k);
    auto& top = j["top_features"] = nlohmann::ordered_json::array();
    for (const auto& f : rep.features) top.push_back({{"feature", f.feature}, {"criterion", f.criterion}});
    if (rep.note) j["top_note"] = *rep.note;
    if (trace.diagnostic) j["diagnostic"] = *trace.diagnostic;
    return j;
}

}  // namespace pact
