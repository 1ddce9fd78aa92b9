#include "pact/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pact/error.hpp"
#include "pact/table.hpp"

namespace pact {

namespace {

constexpr double kLogFloor = -27.631021115928547;  // log(1e-12)

double softplus(double t) { return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

// Names the highest-index column outside the numerical rank of `m`.
std::optional<Eigen::Index> dependent_column(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd scaled = m;
    for (Eigen::Index j = 0; j < scaled.cols(); ++j) {
        const double norm = scaled.col(j).norm();
        if (norm == 0.0) return j;
        scaled.col(j) /= norm;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(scaled);
    qr.setThreshold(1e-10);
    const Eigen::Index rank = qr.rank();
    if (rank == scaled.cols()) return std::nullopt;
    Eigen::Index worst = -1;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = rank; k < scaled.cols(); ++k) worst = std::max<Eigen::Index>(worst, perm[k]);
    return worst;
}

void check_rank(const Eigen::MatrixXd& x, const std::vector<std::string>& names) {
    if (x.rows() < x.cols())
        throw RankDeficiencyError(names.back(), "design has " + std::to_string(x.rows()) + " rows for " +
                                                    std::to_string(x.cols()) + " columns");
    if (auto col = dependent_column(x)) {
        const auto& name = names[static_cast<std::size_t>(*col)];
        throw RankDeficiencyError(name, "column '" + name + "' is collinear with other columns");
    }
}

struct Solve {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0.0;
};

// Cholesky of the information matrix, shifting the diagonal when it fails.
std::optional<Solve> factor(const Eigen::MatrixXd& info, double first_jitter) {
    std::vector<double> shifts{first_jitter};
    for (double s : {1e-10, 1e-9, 1e-8})
        if (s > first_jitter) shifts.push_back(s);
    const double scale = std::max(1.0, info.diagonal().cwiseAbs().maxCoeff());
    for (double s : shifts) {
        Solve out;
        Eigen::MatrixXd m = info;
        m.diagonal().array() += s * scale;
        out.llt.compute(m);
        if (out.llt.info() == Eigen::Success && out.llt.rcond() > 1e-15) {
            out.jitter = s;
            return out;
        }
    }
    return std::nullopt;
}

[[noreturn]] void throw_singular(const Eigen::MatrixXd& weighted_x, const std::vector<std::string>& names) {
    auto col = dependent_column(weighted_x);
    const std::string& name = names[static_cast<std::size_t>(col.value_or(weighted_x.cols() - 1))];
    throw RankDeficiencyError(name, "information matrix is singular; column '" + name +
                                        "' is (numerically) collinear with others");
}

std::vector<std::string> separation_list(const std::vector<bool>& flags, const std::vector<std::string>& names) {
    std::vector<std::string> out;
    for (std::size_t j = 1; j < flags.size(); ++j)
        if (flags[j]) out.push_back(names[j]);
    if (out.empty() && !flags.empty() && flags[0]) out.push_back(names[0]);
    return out;
}

[[noreturn]] void throw_separation(std::vector<std::string> feats, double bound) {
    std::string msg = "coefficients diverged past |beta| > " + format_number(bound) + " (separation):";
    for (const auto& f : feats) msg += " " + f;
    throw SeparationError(std::move(feats), msg);
}

}  // namespace

void FitOptions::validate() const {
    if (!(tolerance > 0.0)) throw ConfigError("fit tolerance must be positive");
    if (max_iterations < 1) throw ConfigError("fit max_iterations must be at least 1");
    if (ridge_jitter < 0.0) throw ConfigError("fit ridge_jitter must be nonnegative");
    if (!(separation_coef_bound > 0.0)) throw ConfigError("separation bound must be positive");
}

double sigmoid(double eta) {
    if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

double log_sigmoid(double eta) { return std::max(-softplus(-eta), kLogFloor); }
double log_one_minus_sigmoid(double eta) { return std::max(-softplus(eta), kLogFloor); }

double log_likelihood(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (beta.size() != x.cols() || x.rows() != y.size()) throw UsageError("log_likelihood: dimension mismatch");
    const Eigen::VectorXd eta = x * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i)
        ll += y[i] * log_sigmoid(eta[i]) + (1.0 - y[i]) * log_one_minus_sigmoid(eta[i]);
    return ll;
}

double log_likelihood(const Eigen::VectorXd& beta, const Dataset& dataset) {
    return log_likelihood(beta, dataset.x, dataset.y);
}

Eigen::VectorXd gradient(const Eigen::VectorXd& beta, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (beta.size() != x.cols() || x.rows() != y.size()) throw UsageError("gradient: dimension mismatch");
    const Eigen::VectorXd mu = (x * beta).unaryExpr([](double e) { return sigmoid(e); });
    return x.transpose() * (y - mu);
}

Eigen::VectorXd gradient(const Eigen::VectorXd& beta, const Dataset& dataset) {
    return gradient(beta, dataset.x, dataset.y);
}

FitResult fit_binary(const Dataset& dataset, const FitOptions& options) {
    options.validate();
    const Eigen::MatrixXd& x = dataset.x;
    const Eigen::VectorXd& y = dataset.y;
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    const auto names = dataset.column_names();
    if (n == 0) throw UsageError("fit_binary: empty dataset");
    bool has0 = false, has1 = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (y[i] == 0.0) has0 = true;
        else if (y[i] == 1.0) has1 = true;
        else throw UsageError("fit_binary: outcomes must be 0 or 1");
    }
    if (!has0 || !has1) throw UsageError("fit_binary: both outcome classes must be present");
    check_rank(x, names);

    FitResult fit;
    fit.names = names;
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    double ll = log_likelihood(beta, x, y);
    fit.loglik_trace.push_back(ll);
    double jitter = options.ridge_jitter;

    auto information = [&](const Eigen::VectorXd& b, Eigen::VectorXd& mu, Eigen::VectorXd& w) {
        mu = (x * b).unaryExpr([](double e) { return sigmoid(e); });
        w = mu.array() * (1.0 - mu.array());
        return Eigen::MatrixXd(x.transpose() * (x.array().colwise() * w.array()).matrix());
    };

    Eigen::VectorXd mu, w;
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        const Eigen::MatrixXd info = information(beta, mu, w);
        const Eigen::VectorXd score = x.transpose() * (y - mu);
        auto solve = factor(info, jitter);
        if (!solve) throw_singular((x.array().colwise() * w.array().sqrt()).matrix(), names);
        const Eigen::VectorXd step = solve->llt.solve(score);

        double t = 1.0;
        Eigen::VectorXd next = beta + step;
        double ll_next = log_likelihood(next, x, y);
        int halvings = 0;
        while (ll_next < ll && halvings < 40) {
            t *= 0.5;
            next = beta + t * step;
            ll_next = log_likelihood(next, x, y);
            ++halvings;
        }
        fit.iterations = iter;
        if (ll_next < ll) {
            // No ascent direction left at working precision.
            fit.converged = score.cwiseAbs().maxCoeff() < 1e-6 * static_cast<double>(n);
            break;
        }

        std::vector<bool> flags(static_cast<std::size_t>(p));
        bool diverged = false;
        for (Eigen::Index j = 0; j < p; ++j) {
            flags[static_cast<std::size_t>(j)] = std::abs(next[j]) > options.separation_coef_bound;
            diverged = diverged || flags[static_cast<std::size_t>(j)];
        }
        if (diverged) throw_separation(separation_list(flags, names), options.separation_coef_bound);

        const double change = ll_next - ll;
        beta = next;
        ll = ll_next;
        fit.loglik_trace.push_back(ll);
        if (std::abs(change) < options.tolerance) {
            fit.converged = true;
            break;
        }
    }

    const Eigen::MatrixXd info = information(beta, mu, w);
    auto solve = factor(info, jitter);
    if (!solve) throw_singular((x.array().colwise() * w.array().sqrt()).matrix(), names);
    fit.jitter = solve->jitter;
    fit.covariance = solve->llt.solve(Eigen::MatrixXd::Identity(p, p));

    fit.coefficients = beta;
    fit.log_likelihood = ll;
    fit.standard_errors = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    fit.z_scores = beta.cwiseQuotient(fit.standard_errors);
    fit.p_values = fit.z_scores.unaryExpr([](double z) { return wald_p_value(z); });
    fit.odds_ratios = beta.unaryExpr([](double b) { return std::exp(b); });
    fit.ci_low = (beta.array() - kZ975 * fit.standard_errors.array()).exp();
    fit.ci_high = (beta.array() + kZ975 * fit.standard_errors.array()).exp();
    fit.separation_flags.assign(static_cast<std::size_t>(p), false);

    // h_ii = w_i x_i' C x_i
    const Eigen::MatrixXd xc = x * fit.covariance;
    fit.leverage = (xc.array() * x.array()).rowwise().sum() * w.array();
    return fit;
}

Eigen::Index MultinomialFit::class_index(int cls) const {
    auto it = std::find(classes.begin(), classes.end(), cls);
    if (it == classes.end()) throw UsageError("class " + std::to_string(cls) + " not in fit");
    return it - classes.begin();
}

namespace {

// Row-wise softmax over class scores; returns N x K probabilities.
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& scores) {
    Eigen::MatrixXd out(scores.rows(), scores.cols());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        const double m = scores.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (scores.row(i).array() - m).exp();
        out.row(i) = e / e.sum();
    }
    return out;
}

Eigen::MatrixXd log_softmax_rows(const Eigen::MatrixXd& scores) {
    Eigen::MatrixXd out(scores.rows(), scores.cols());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        const double m = scores.row(i).maxCoeff();
        const double lse = m + std::log((scores.row(i).array() - m).exp().sum());
        out.row(i) = (scores.row(i).array() - lse).cwiseMax(kLogFloor);
    }
    return out;
}

std::vector<Eigen::Index> label_indices(const Eigen::VectorXd& y, const std::vector<int>& classes) {
    std::vector<Eigen::Index> out(static_cast<std::size_t>(y.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        auto it = std::find(classes.begin(), classes.end(), static_cast<int>(y[i]));
        if (it == classes.end() || static_cast<double>(*it) != y[i])
            throw UsageError("outcome " + std::to_string(y[i]) + " is not one of the model classes");
        out[static_cast<std::size_t>(i)] = it - classes.begin();
    }
    return out;
}

}  // namespace

double multinomial_log_likelihood(const Eigen::MatrixXd& coef, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                  const std::vector<int>& classes) {
    if (coef.rows() != x.cols() || coef.cols() != static_cast<Eigen::Index>(classes.size()) || x.rows() != y.size())
        throw UsageError("multinomial_log_likelihood: dimension mismatch");
    const auto idx = label_indices(y, classes);
    const Eigen::MatrixXd lp = log_softmax_rows(x * coef);
    double ll = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) ll += lp(i, idx[static_cast<std::size_t>(i)]);
    return ll;
}

Eigen::MatrixXd multinomial_gradient(const Eigen::MatrixXd& coef, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     const std::vector<int>& classes, int reference) {
    if (coef.rows() != x.cols() || coef.cols() != static_cast<Eigen::Index>(classes.size()) || x.rows() != y.size())
        throw UsageError("multinomial_gradient: dimension mismatch");
    const auto idx = label_indices(y, classes);
    Eigen::MatrixXd resid = -softmax_rows(x * coef);
    for (Eigen::Index i = 0; i < x.rows(); ++i) resid(i, idx[static_cast<std::size_t>(i)]) += 1.0;
    Eigen::MatrixXd g = x.transpose() * resid;
    const auto ref = std::find(classes.begin(), classes.end(), reference);
    if (ref != classes.end()) g.col(ref - classes.begin()).setZero();
    return g;
}

MultinomialFit fit_multinomial(const Dataset& dataset, std::optional<int> reference, const FitOptions& options) {
    options.validate();
    const Eigen::MatrixXd& x = dataset.x;
    const Eigen::Index n = x.rows();
    const Eigen::Index p = x.cols();
    const auto names = dataset.column_names();
    if (n == 0) throw UsageError("fit_multinomial: empty dataset");

    MultinomialFit fit;
    fit.names = names;
    const auto counts = dataset.class_counts();
    for (const auto& [cls, c] : counts) fit.classes.push_back(cls);
    const auto K = static_cast<Eigen::Index>(fit.classes.size());
    if (K < 2) throw UsageError("fit_multinomial: at least two classes required");
    if (reference) {
        if (!counts.contains(*reference))
            throw UsageError("reference class " + std::to_string(*reference) + " has no rows");
        fit.reference = *reference;
    } else {
        std::size_t best = 0;
        for (const auto& [cls, c] : counts)
            if (c > best) {
                best = c;
                fit.reference = cls;
            }
    }
    check_rank(x, names);

    const Eigen::Index ref = fit.class_index(fit.reference);
    std::vector<Eigen::Index> free;
    for (Eigen::Index k = 0; k < K; ++k)
        if (k != ref) free.push_back(k);
    const auto m = static_cast<Eigen::Index>(free.size());
    const Eigen::Index dim = m * p;

    const auto idx = label_indices(dataset.y, fit.classes);
    Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, K);
    for (Eigen::Index i = 0; i < n; ++i) onehot(i, idx[static_cast<std::size_t>(i)]) = 1.0;

    auto unpack = [&](const Eigen::VectorXd& theta) {
        Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(p, K);
        for (Eigen::Index c = 0; c < m; ++c) coef.col(free[static_cast<std::size_t>(c)]) = theta.segment(c * p, p);
        return coef;
    };
    auto loglik = [&](const Eigen::VectorXd& theta) {
        const Eigen::MatrixXd lp = log_softmax_rows(x * unpack(theta));
        return (lp.array() * onehot.array()).sum();
    };
    auto score_of = [&](const Eigen::MatrixXd& prob) {
        Eigen::VectorXd g(dim);
        const Eigen::MatrixXd r = onehot - prob;
        for (Eigen::Index c = 0; c < m; ++c)
            g.segment(c * p, p) = x.transpose() * r.col(free[static_cast<std::size_t>(c)]);
        return g;
    };
    auto information_of = [&](const Eigen::MatrixXd& prob) {
        Eigen::MatrixXd info(dim, dim);
        for (Eigen::Index a = 0; a < m; ++a) {
            const auto ka = free[static_cast<std::size_t>(a)];
            for (Eigen::Index b = a; b < m; ++b) {
                const auto kb = free[static_cast<std::size_t>(b)];
                Eigen::ArrayXd w = -prob.col(ka).array() * prob.col(kb).array();
                if (a == b) w += prob.col(ka).array();
                const Eigen::MatrixXd block = x.transpose() * (x.array().colwise() * w).matrix();
                info.block(a * p, b * p, p, p) = block;
                if (a != b) info.block(b * p, a * p, p, p) = block.transpose();
            }
        }
        return info;
    };

    // Fixed curvature bound 0.5 (I - 11'/K) kron X'X; dominates the information everywhere.
    std::optional<Solve> bound_solve;
    if (!options.full_hessian) {
        const Eigen::MatrixXd xtx = x.transpose() * x;
        Eigen::MatrixXd bound(dim, dim);
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index b = 0; b < m; ++b)
                bound.block(a * p, b * p, p, p) =
                    0.5 * ((a == b ? 1.0 : 0.0) - 1.0 / static_cast<double>(K)) * xtx;
        bound_solve = factor(bound, options.ridge_jitter);
        if (!bound_solve) throw_singular(x, names);
    }

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
    double ll = loglik(theta);
    fit.loglik_trace.push_back(ll);
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        const Eigen::MatrixXd prob = softmax_rows(x * unpack(theta));
        const Eigen::VectorXd score = score_of(prob);
        Eigen::VectorXd step;
        if (options.full_hessian) {
            auto solve = factor(information_of(prob), options.ridge_jitter);
            if (!solve) throw_singular(x, names);
            step = solve->llt.solve(score);
        } else {
            step = bound_solve->llt.solve(score);
        }

        double t = 1.0;
        Eigen::VectorXd next = theta + step;
        double ll_next = loglik(next);
        int halvings = 0;
        while (ll_next < ll && halvings < 40) {
            t *= 0.5;
            next = theta + t * step;
            ll_next = loglik(next);
            ++halvings;
        }
        fit.iterations = iter;
        if (ll_next < ll) {
            fit.converged = score.cwiseAbs().maxCoeff() < 1e-6 * static_cast<double>(n);
            break;
        }

        std::vector<bool> flags(static_cast<std::size_t>(p), false);
        bool diverged = false;
        for (Eigen::Index c = 0; c < m; ++c)
            for (Eigen::Index j = 0; j < p; ++j)
                if (std::abs(next[c * p + j]) > options.separation_coef_bound) {
                    flags[static_cast<std::size_t>(j)] = true;
                    diverged = true;
                }
        if (diverged) throw_separation(separation_list(flags, names), options.separation_coef_bound);

        const double change = ll_next - ll;
        theta = next;
        ll = ll_next;
        fit.loglik_trace.push_back(ll);
        if (std::abs(change) < options.tolerance) {
            fit.converged = true;
            break;
        }
    }

    const Eigen::MatrixXd prob = softmax_rows(x * unpack(theta));
    auto solve = factor(information_of(prob), options.ridge_jitter);
    if (!solve) throw_singular(x, names);
    fit.covariance = solve->llt.solve(Eigen::MatrixXd::Identity(dim, dim));
    fit.log_likelihood = ll;
    fit.coefficients = unpack(theta);
    Eigen::VectorXd se_flat = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    fit.standard_errors = Eigen::MatrixXd::Zero(p, K);
    for (Eigen::Index c = 0; c < m; ++c)
        fit.standard_errors.col(free[static_cast<std::size_t>(c)]) = se_flat.segment(c * p, p);
    fit.z_scores = Eigen::MatrixXd::Zero(p, K);
    fit.p_values = Eigen::MatrixXd::Ones(p, K);
    for (Eigen::Index c : free) {
        fit.z_scores.col(c) = fit.coefficients.col(c).cwiseQuotient(fit.standard_errors.col(c));
        fit.p_values.col(c) = fit.z_scores.col(c).unaryExpr([](double z) { return wald_p_value(z); });
    }
    fit.odds_ratios = fit.coefficients.unaryExpr([](double b) { return std::exp(b); });
    fit.ci_low = (fit.coefficients.array() - kZ975 * fit.standard_errors.array()).exp();
    fit.ci_high = (fit.coefficients.array() + kZ975 * fit.standard_errors.array()).exp();
    return fit;
}

double predict_proba(const FitResult& fit, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() != fit.coefficients.size())
        throw UsageError("predict_proba: expected " + std::to_string(fit.coefficients.size()) + " values, got " +
                         std::to_string(x.size()));
    return sigmoid(x.dot(fit.coefficients));
}

namespace {

Eigen::VectorXd align(const std::vector<std::string>& names, const FeatureVector& f) {
    if (f.names.size() != f.values.size() || f.names.size() + 1 != names.size())
        throw UsageError("predict_proba: feature vector has " + std::to_string(f.values.size()) +
                         " values, model expects " + std::to_string(names.size() - 1));
    Eigen::VectorXd x(static_cast<Eigen::Index>(names.size()));
    x[0] = 1.0;
    for (std::size_t j = 1; j < names.size(); ++j) {
        auto it = std::find(f.names.begin(), f.names.end(), names[j]);
        if (it == f.names.end()) throw UsageError("predict_proba: feature '" + names[j] + "' missing");
        x[static_cast<Eigen::Index>(j)] = f.values[static_cast<std::size_t>(it - f.names.begin())];
    }
    return x;
}

}  // namespace

double predict_proba(const FitResult& fit, const FeatureVector& features) {
    return predict_proba(fit, align(fit.names, features));
}

Eigen::VectorXd predict_proba(const MultinomialFit& fit, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() != fit.coefficients.rows())
        throw UsageError("predict_proba: expected " + std::to_string(fit.coefficients.rows()) + " values, got " +
                         std::to_string(x.size()));
    const Eigen::RowVectorXd scores = x.transpose() * fit.coefficients;
    return softmax_rows(scores).row(0).transpose();
}

Eigen::VectorXd predict_proba(const MultinomialFit& fit, const FeatureVector& features) {
    return predict_proba(fit, align(fit.names, features));
}

double wald_p_value(double z) {
    if (std::isnan(z)) return 1.0;
    return std::clamp(std::erfc(std::abs(z) / std::numbers::sqrt2), 0.0, 1.0);
}

std::vector<WaldRow> wald_inference(const FitResult& fit, double alpha) {
    if (!fit.converged) throw ConvergenceError("Wald inference refused: the fit did not converge");
    std::vector<WaldRow> rows;
    for (Eigen::Index j = 0; j < fit.coefficients.size(); ++j) {
        WaldRow r;
        r.feature = fit.names[static_cast<std::size_t>(j)];
        r.coefficient_index = j;
        r.coefficient = fit.coefficients[j];
        r.standard_error = fit.standard_errors[j];
        r.odds_ratio = std::exp(r.coefficient);
        r.ci_low = std::exp(r.coefficient - kZ975 * r.standard_error);
        r.ci_high = std::exp(r.coefficient + kZ975 * r.standard_error);
        r.p_value = fit.p_values[j];
        r.significant = r.p_value < alpha;
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<WaldRow> wald_inference(const MultinomialFit& fit, double alpha) {
    if (!fit.converged) throw ConvergenceError("Wald inference refused: the fit did not converge");
    std::vector<WaldRow> rows;
    for (std::size_t k = 0; k < fit.classes.size(); ++k) {
        if (fit.classes[k] == fit.reference) continue;
        const auto c = static_cast<Eigen::Index>(k);
        for (Eigen::Index j = 0; j < fit.coefficients.rows(); ++j) {
            WaldRow r;
            r.feature = fit.names[static_cast<std::size_t>(j)];
            r.cls = fit.classes[k];
            r.coefficient_index = j;
            r.coefficient = fit.coefficients(j, c);
            r.standard_error = fit.standard_errors(j, c);
            r.odds_ratio = std::exp(r.coefficient);
            r.ci_low = std::exp(r.coefficient - kZ975 * r.standard_error);
            r.ci_high = std::exp(r.coefficient + kZ975 * r.standard_error);
            r.p_value = fit.p_values(j, c);
            r.significant = r.p_value < alpha;
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

namespace {

template <class V>
std::vector<double> to_vec(const V& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

nlohmann::ordered_json to_json(const FitResult& fit) {
    nlohmann::ordered_json j;
    j["features"] = fit.names;
    j["coef"] = to_vec(fit.coefficients);
    j["se"] = to_vec(fit.standard_errors);
    j["or"] = to_vec(fit.odds_ratios);
    j["ci_low"] = to_vec(fit.ci_low);
    j["ci_high"] = to_vec(fit.ci_high);
    j["p"] = to_vec(fit.p_values);
    j["loglik"] = fit.log_likelihood;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    return j;
}

nlohmann::ordered_json to_json(const MultinomialFit& fit) {
    nlohmann::ordered_json j;
    j["reference_class"] = fit.reference;
    j["odds_ratio_meaning"] = "relative odds versus reference class " + std::to_string(fit.reference);
    j["features"] = fit.names;
    auto& per = j["classes"] = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < fit.classes.size(); ++k) {
        if (fit.classes[k] == fit.reference) continue;
        const auto c = static_cast<Eigen::Index>(k);
        nlohmann::ordered_json b;
        b["class"] = fit.classes[k];
        b["coef"] = to_vec(Eigen::VectorXd(fit.coefficients.col(c)));
        b["se"] = to_vec(Eigen::VectorXd(fit.standard_errors.col(c)));
        b["or"] = to_vec(Eigen::VectorXd(fit.odds_ratios.col(c)));
        b["ci_low"] = to_vec(Eigen::VectorXd(fit.ci_low.col(c)));
        b["ci_high"] = to_vec(Eigen::VectorXd(fit.ci_high.col(c)));
        b["p"] = to_vec(Eigen::VectorXd(fit.p_values.col(c)));
        per.push_back(std::move(b));
    }
    j["loglik"] = fit.log_likelihood;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    return j;
}

}  // namespace pact
