#include "pact/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "pact/error.hpp"
#include "pact/table.hpp"

namespace pact {

CorrelationResult correlation_matrix(const Dataset& dataset, double threshold) {
    CorrelationResult res;
    res.threshold = threshold;
    const Eigen::Index n = dataset.rows();
    std::vector<Eigen::Index> cols;
    for (Eigen::Index j = 1; j < dataset.cols(); ++j) {
        const auto col = dataset.x.col(j);
        const double mean = col.mean();
        const double ss = (col.array() - mean).square().sum();
        if (n < 2 || ss == 0.0) {
            res.excluded.push_back(dataset.feature_names[static_cast<std::size_t>(j - 1)]);
            continue;
        }
        cols.push_back(j);
        res.names.push_back(dataset.feature_names[static_cast<std::size_t>(j - 1)]);
    }
    const auto m = static_cast<Eigen::Index>(cols.size());
    Eigen::MatrixXd centered(n, m);
    for (Eigen::Index c = 0; c < m; ++c) {
        const auto col = dataset.x.col(cols[static_cast<std::size_t>(c)]);
        centered.col(c) = col.array() - col.mean();
        centered.col(c) /= centered.col(c).norm();
    }
    res.matrix = centered.transpose() * centered;
    for (Eigen::Index a = 0; a < m; ++a) {
        res.matrix(a, a) = 1.0;
        for (Eigen::Index b = a + 1; b < m; ++b) {
            const double r = std::clamp(0.5 * (res.matrix(a, b) + res.matrix(b, a)), -1.0, 1.0);
            res.matrix(a, b) = res.matrix(b, a) = r;
            res.max_abs_offdiag = std::max(res.max_abs_offdiag, std::abs(r));
        }
    }
    res.pass = res.max_abs_offdiag < threshold;
    return res;
}

LinearityTable log_odds_linearity(const Dataset& dataset, const std::string& feature, int bins) {
    if (bins < 3) throw ConfigError("linearity check needs at least 3 bins");
    const int col = dataset.column_of(feature);
    if (col < 0) throw UsageError("feature '" + feature + "' not in dataset");
    const auto& cont = continuous_diagnostic_features();
    if (std::find(cont.begin(), cont.end(), feature) == cont.end())
        throw UsageError("feature '" + feature + "' is not a continuous variable");
    const Eigen::Index n = dataset.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        if (dataset.y[i] != 0.0 && dataset.y[i] != 1.0) throw UsageError("linearity check needs a binary outcome");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto value = [&](Eigen::Index i) { return dataset.x(i, col); };
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return value(a) < value(b); });

    std::vector<double> cuts;
    for (int k = 1; k < bins; ++k) {
        const auto rank = static_cast<std::size_t>(static_cast<double>(k) * static_cast<double>(n) / bins);
        if (rank >= order.size()) continue;
        const double c = value(order[rank]);
        if (c > value(order.front()) && (cuts.empty() || c > cuts.back())) cuts.push_back(c);
    }

    LinearityTable t;
    t.feature = feature;
    t.bins.resize(cuts.size() + 1);
    for (std::size_t b = 0; b < t.bins.size(); ++b) {
        t.bins[b].lower = b == 0 ? value(order.front()) : cuts[b - 1];
        t.bins[b].upper = b == cuts.size() ? value(order.back()) : cuts[b];
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        const double v = value(i);
        const auto b = static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), v) - cuts.begin());
        auto& bin = t.bins[b];
        ++bin.count;
        bin.mean += v;
        if (dataset.y[i] == 1.0) ++bin.positives;
    }

    std::vector<double> xs, ls;
    for (auto& bin : t.bins) {
        bin.mean /= static_cast<double>(bin.count);
        if (bin.positives == 0 || bin.positives == bin.count) {
            bin.dropped = true;
            ++t.dropped_bins;
            continue;
        }
        const double p = static_cast<double>(bin.positives) / static_cast<double>(bin.count);
        bin.log_odds = std::log(p / (1.0 - p));
        xs.push_back(bin.mean);
        ls.push_back(bin.log_odds);
    }
    if (xs.size() < 3)
        throw InsufficientVariationError("feature '" + feature + "' yields " + std::to_string(xs.size()) +
                                         " usable bins; need at least 3");

    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    const double ml = std::accumulate(ls.begin(), ls.end(), 0.0) / static_cast<double>(ls.size());
    double sxx = 0.0, sxl = 0.0, sll = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxl += (xs[i] - mx) * (ls[i] - ml);
        sll += (ls[i] - ml) * (ls[i] - ml);
    }
    t.slope = sxl / sxx;
    t.intercept = ml - t.slope * mx;
    double ssr = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ls[i] - (t.intercept + t.slope * xs[i]);
        ssr += e * e;
    }
    t.r_squared = sll > 0.0 ? 1.0 - ssr / sll : 1.0;
    return t;
}

double deviance_residual(double y, double mu) {
    const double lm = std::log(std::max(mu, 1e-12));
    const double l1m = std::log(std::max(1.0 - mu, 1e-12));
    const double d2 = -2.0 * (y * lm + (1.0 - y) * l1m);
    const double s = y - mu >= 0.0 ? 1.0 : -1.0;
    return s * std::sqrt(std::max(d2, 0.0));
}

namespace {

void require_converged(const FitResult& fit, const Dataset& dataset) {
    if (!fit.converged) throw ConvergenceError("residuals refused: the fit did not converge");
    if (fit.coefficients.size() != dataset.cols())
        throw UsageError("fit has " + std::to_string(fit.coefficients.size()) + " coefficients, dataset has " +
                         std::to_string(dataset.cols()) + " columns");
}

}  // namespace

Eigen::VectorXd deviance_residuals(const FitResult& fit, const Dataset& dataset) {
    require_converged(fit, dataset);
    const Eigen::VectorXd eta = dataset.x * fit.coefficients;
    Eigen::VectorXd d(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double y = dataset.y[i];
        const double d2 = -2.0 * (y * log_sigmoid(eta[i]) + (1.0 - y) * log_one_minus_sigmoid(eta[i]));
        d[i] = (y == 1.0 ? 1.0 : -1.0) * std::sqrt(std::max(d2, 0.0));
    }
    return d;
}

Eigen::VectorXd studentize(const Eigen::VectorXd& raw, const Eigen::VectorXd& leverage) {
    if (raw.size() != leverage.size()) throw UsageError("residual and leverage lengths differ");
    Eigen::VectorXd out(raw.size());
    for (Eigen::Index i = 0; i < raw.size(); ++i) {
        const double h = leverage[i];
        if (!(h < 1.0 - 1e-12))
            throw LeverageError(static_cast<std::size_t>(i),
                                "leverage h = " + format_number(h) + " at row " + std::to_string(i) + " is not below 1");
        out[i] = raw[i] / std::sqrt(1.0 - std::max(h, 0.0));
    }
    return out;
}

PearsonResiduals studentized_pearson_residuals(const FitResult& fit, const Dataset& dataset) {
    require_converged(fit, dataset);
    if (fit.leverage.size() != dataset.rows())
        throw UsageError("fit leverage was computed on a different dataset");
    PearsonResiduals r;
    r.fitted = (dataset.x * fit.coefficients).unaryExpr([](double e) { return sigmoid(e); });
    r.raw.resize(r.fitted.size());
    for (Eigen::Index i = 0; i < r.fitted.size(); ++i) {
        const double mu = r.fitted[i];
        r.raw[i] = (dataset.y[i] - mu) / std::sqrt(std::max(mu * (1.0 - mu), 1e-300));
    }
    r.studentized = studentize(r.raw, fit.leverage);
    return r;
}

std::vector<ResidualBin> bin_by_fitted(const Eigen::VectorXd& fitted, const Eigen::VectorXd& values, int bins,
                                       double band) {
    if (bins < 1) throw ConfigError("residual bins must be at least 1");
    const auto n = static_cast<std::size_t>(fitted.size());
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fitted[a] < fitted[b]; });
    std::vector<ResidualBin> out;
    for (int b = 0; b < bins; ++b) {
        const std::size_t lo = n * static_cast<std::size_t>(b) / static_cast<std::size_t>(bins);
        const std::size_t hi = n * static_cast<std::size_t>(b + 1) / static_cast<std::size_t>(bins);
        if (hi <= lo) continue;
        ResidualBin rb;
        rb.count = hi - lo;
        double sf = 0.0, sv = 0.0;
        for (std::size_t k = lo; k < hi; ++k) {
            sf += fitted[order[k]];
            sv += values[order[k]];
        }
        rb.fitted_mean = sf / static_cast<double>(rb.count);
        rb.residual_mean = sv / static_cast<double>(rb.count);
        double ss = 0.0;
        for (std::size_t k = lo; k < hi; ++k) ss += std::pow(values[order[k]] - rb.residual_mean, 2);
        const double sd = rb.count > 1 ? std::sqrt(ss / static_cast<double>(rb.count - 1)) : 0.0;
        rb.standard_error = sd / std::sqrt(static_cast<double>(rb.count));
        rb.within_band = std::abs(rb.residual_mean) <= band * rb.standard_error;
        out.push_back(rb);
    }
    return out;
}

bool flat(const std::vector<ResidualBin>& bins) {
    return std::all_of(bins.begin(), bins.end(), [](const ResidualBin& b) { return b.within_band; });
}

DiagnosticsReport run_diagnostics(const Dataset& unbalanced, const FitResult* fit, const Dataset* training,
                                  const DiagnosticsConfig& config) {
    DiagnosticsReport rep;
    rep.config = config;
    rep.correlation = correlation_matrix(unbalanced, config.correlation_threshold);
    if (unbalanced.task.binary()) {
        for (const auto& f : continuous_diagnostic_features()) {
            if (unbalanced.column_of(f) < 0) continue;
            try {
                rep.linearity.push_back(log_odds_linearity(unbalanced, f, config.linearity_bins));
            } catch (const InsufficientVariationError& e) {
                rep.linearity_skipped.push_back(f + ": " + e.what());
            }
        }
    }
    if (fit && training && fit->converged) {
        rep.residuals_available = true;
        const auto pr = studentized_pearson_residuals(*fit, *training);
        rep.fitted = pr.fitted;
        rep.studentized_pearson = pr.studentized;
        rep.deviance = deviance_residuals(*fit, *training);
        rep.deviance_sum_squares = rep.deviance.squaredNorm();
        rep.deviance_bins = bin_by_fitted(rep.fitted, rep.deviance, config.residual_plot_bins, config.flatness_band);
        rep.pearson_bins = bin_by_fitted(rep.fitted, rep.studentized_pearson, config.residual_plot_bins,
                                         config.flatness_band);
        rep.deviance_flat = flat(bin_by_fitted(rep.fitted, rep.deviance, config.flatness_bins, config.flatness_band));
        rep.pearson_flat =
            flat(bin_by_fitted(rep.fitted, rep.studentized_pearson, config.flatness_bins, config.flatness_band));
    }
    return rep;
}

namespace {

nlohmann::ordered_json bins_json(const std::vector<ResidualBin>& bins) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& b : bins)
        arr.push_back({{"fitted_mean", b.fitted_mean},
                       {"residual_mean", b.residual_mean},
                       {"se", b.standard_error},
                       {"count", b.count},
                       {"within_band", b.within_band}});
    return arr;
}

}  // namespace

nlohmann::ordered_json to_json(const DiagnosticsReport& r) {
    nlohmann::ordered_json j;
    auto& c = j["collinearity"];
    c["computed_on"] = "unbalanced complete-case data";
    c["threshold"] = r.correlation.threshold;
    c["max_abs_offdiag"] = r.correlation.max_abs_offdiag;
    c["pass"] = r.correlation.pass;
    c["excluded_zero_variance"] = r.correlation.excluded;

    auto& lin = j["linearity"];
    lin["computed_on"] = "unbalanced complete-case data";
    lin["bins"] = r.config.linearity_bins;
    lin["features"] = nlohmann::ordered_json::array();
    for (const auto& t : r.linearity)
        lin["features"].push_back({{"feature", t.feature},
                                   {"slope", t.slope},
                                   {"intercept", t.intercept},
                                   {"r_squared", t.r_squared},
                                   {"usable_bins", t.bins.size() - t.dropped_bins},
                                   {"dropped_bins", t.dropped_bins}});
    lin["skipped"] = r.linearity_skipped;

    auto& res = j["residuals"];
    res["available"] = r.residuals_available;
    if (r.residuals_available) {
        res["computed_on"] = "fitted model and its training data (balanced when SMOTE applied)";
        res["deviance_sum_squares"] = r.deviance_sum_squares;
        res["flatness_bins"] = r.config.flatness_bins;
        res["flatness_band_se"] = r.config.flatness_band;
        res["deviance_flat"] = r.deviance_flat;
        res["studentized_pearson_flat"] = r.pearson_flat;
        res["deviance_bins"] = bins_json(r.deviance_bins);
        res["studentized_pearson_bins"] = bins_json(r.pearson_bins);
    }
    return j;
}

void write_plot_data(const DiagnosticsReport& r, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "correlation.csv");
        std::vector<std::vector<std::string>> rows;
        for (std::size_t a = 0; a < r.correlation.names.size(); ++a)
            for (std::size_t b = 0; b < r.correlation.names.size(); ++b)
                rows.push_back({r.correlation.names[a], r.correlation.names[b],
                                format_number(r.correlation.matrix(static_cast<Eigen::Index>(a),
                                                                   static_cast<Eigen::Index>(b)))});
        write_delimited(out, {"row", "col", "r"}, rows);
    }
    for (const auto& t : r.linearity) {
        std::ofstream out(dir / ("linearity_" + t.feature + ".csv"));
        std::vector<std::vector<std::string>> rows;
        for (const auto& b : t.bins)
            rows.push_back({format_number(b.lower), format_number(b.upper), format_number(b.mean),
                            std::to_string(b.count), std::to_string(b.positives),
                            b.dropped ? std::string() : format_number(b.log_odds), b.dropped ? "1" : "0"});
        write_delimited(out, {"lower", "upper", "mean", "count", "positives", "log_odds", "dropped"}, rows);
    }
    if (r.residuals_available) {
        {
            std::ofstream out(dir / "residuals.csv");
            std::vector<std::vector<std::string>> rows;
            for (Eigen::Index i = 0; i < r.fitted.size(); ++i)
                rows.push_back({format_number(r.fitted[i]), format_number(r.deviance[i]),
                                format_number(r.studentized_pearson[i])});
            write_delimited(out, {"fitted", "deviance", "studentized_pearson"}, rows);
        }
        std::ofstream out(dir / "residual_bins.csv");
        std::vector<std::vector<std::string>> rows;
        auto emit = [&](const char* kind, const std::vector<ResidualBin>& bins) {
            for (std::size_t b = 0; b < bins.size(); ++b)
                rows.push_back({kind, std::to_string(b), format_number(bins[b].fitted_mean),
                                format_number(bins[b].residual_mean), format_number(bins[b].standard_error),
                                std::to_string(bins[b].count), bins[b].within_band ? "1" : "0"});
        };
        emit("deviance", r.deviance_bins);
        emit("studentized_pearson", r.pearson_bins);
        write_delimited(out, {"kind", "bin", "fitted_mean", "residual_mean", "se", "count", "within_band"}, rows);
    }
}

}  // namespace pact
