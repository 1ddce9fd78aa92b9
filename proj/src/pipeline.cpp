#include "pact/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include "pact/error.hpp"
#include "pact/synth.hpp"
#include "pact/table.hpp"

namespace pact {

std::string sha256_hex(std::string_view bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 digest failed");
    std::ostringstream out;
    for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return out.str();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return sha256_hex(buf.str());
}

std::vector<BiasRow> bias_report(const std::vector<WaldRow>& inference, const ClassificationTask& task,
                                 const std::vector<Removal>& removals) {
    const auto task_features = task_feature_names(task);
    std::vector<BiasRow> out;
    for (const auto& f : demographic_feature_names()) {
        if (std::find(task_features.begin(), task_features.end(), f) == task_features.end()) continue;
        bool found = false;
        for (const auto& w : inference) {
            if (w.feature != f) continue;
            found = true;
            BiasRow b;
            b.feature = f;
            b.cls = w.cls;
            b.coefficient_index = w.coefficient_index;
            b.coefficient = w.coefficient;
            b.odds_ratio = w.odds_ratio;
            b.ci_low = w.ci_low;
            b.ci_high = w.ci_high;
            b.p_value = w.p_value;
            b.significant = w.significant;
            out.push_back(b);
        }
        if (found) continue;
        BiasRow b;
        b.feature = f;
        b.status = "removed_separation";
        for (const auto& r : removals)
            if (r.feature == f) b.status = "removed_" + r.reason;
        out.push_back(b);
    }
    return out;
}

bool AuditResult::any_failed() const {
    return std::any_of(reports.begin(), reports.end(), [](const TaskReport& r) { return r.failed; });
}

namespace {

struct Model {
    std::optional<FitResult> binary;
    std::optional<MultinomialFit> multinomial;

    [[nodiscard]] std::vector<int> predict(const Eigen::MatrixXd& x) const {
        std::vector<int> out(static_cast<std::size_t>(x.rows()));
        if (binary) {
            const Eigen::VectorXd eta = x * binary->coefficients;
            for (Eigen::Index i = 0; i < x.rows(); ++i) out[static_cast<std::size_t>(i)] = eta[i] >= 0.0 ? 1 : 0;
        } else {
            const Eigen::MatrixXd eta = x * multinomial->coefficients;
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                Eigen::Index best = 0;
                eta.row(i).maxCoeff(&best);
                out[static_cast<std::size_t>(i)] = multinomial->classes[static_cast<std::size_t>(best)];
            }
        }
        return out;
    }
};

Model fit_model(const Dataset& d, const FitOptions& options) {
    Model m;
    if (d.task.binary()) m.binary = fit_binary(d, options);
    else m.multinomial = fit_multinomial(d, std::nullopt, options);
    return m;
}

bool has_feature(const Dataset& d, const std::string& f) {
    return std::find(d.feature_names.begin(), d.feature_names.end(), f) != d.feature_names.end();
}

// Fits, removing indicator features flagged for separation (or found collinear)
// until the fit succeeds. Continuous features are never removed.
Model fit_with_remedy(Dataset& d, const FitOptions& options, std::vector<Removal>& removals, const std::string& label) {
    for (;;) {
        std::vector<std::string> drop;
        std::string reason;
        try {
            return fit_model(d, options);
        } catch (const SeparationError& e) {
            for (const auto& f : e.features)
                if (is_indicator_feature(f) && has_feature(d, f)) drop.push_back(f);
            if (drop.empty()) throw;
            reason = "separation";
        } catch (const RankDeficiencyError& e) {
            if (!is_indicator_feature(e.column) || !has_feature(d, e.column)) throw;
            drop.push_back(e.column);
            reason = "collinear";
        }
        if (drop.size() >= d.feature_names.size())
            throw SeparationError(drop, "every remaining feature would be removed for separation");
        for (const auto& f : drop) removals.push_back({f, reason, label});
        d = d.drop_features(drop);
    }
}

bool needs_balancing(const std::map<int, std::size_t>& counts, double threshold) {
    std::size_t lo = SIZE_MAX, hi = 0;
    for (const auto& [cls, n] : counts) {
        lo = std::min(lo, n);
        hi = std::max(hi, n);
    }
    if (hi == 0) return false;
    return static_cast<double>(lo) / static_cast<double>(hi) < threshold / (1.0 - threshold);
}

MetricsReport resubstitution(const Model& m, const Dataset& d) {
    std::vector<int> truth(static_cast<std::size_t>(d.rows()));
    for (Eigen::Index i = 0; i < d.rows(); ++i) truth[static_cast<std::size_t>(i)] = static_cast<int>(d.y[i]);
    return precision_recall_f1(confusion(m.predict(d.x), truth, d.classes()));
}

std::string counts_text(const std::map<int, std::size_t>& counts) {
    std::string s;
    for (const auto& [cls, n] : counts) s += (s.empty() ? "" : ", ") + std::to_string(cls) + ": " + std::to_string(n);
    return s;
}

std::vector<PersonRecord> load_files(const RunConfig& config, std::vector<std::string>* notes) {
    auto parsed = parse_cohort(config.cohort_path, config.schema, config.delimiter);
    const auto table = read_code_table(config.codes_path, config.delimiter);
    if (notes) {
        notes->push_back(std::to_string(parsed.rows_read) + " rows read, " + std::to_string(parsed.rejects.size()) +
                         " rejected, " + std::to_string(parsed.dropped_level1) + " level-1 rows dropped");
    }
    return attach_offense_scores(std::move(parsed.records), table);
}

std::vector<PersonRecord> stage_records(const std::vector<PersonRecord>& records, Stage stage) {
    std::vector<PersonRecord> out;
    for (const auto& r : records)
        if (r.stage == stage) out.push_back(r);
    return out;
}

template <class K>
nlohmann::ordered_json counts_json(const std::map<K, std::size_t>& m) {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const auto& [k, v] : m) {
        if constexpr (std::is_same_v<K, std::string>) j[k] = v;
        else j[std::to_string(k)] = v;
    }
    return j;
}

}  // namespace

TaskInput synthetic_input(const RunConfig& config, const ClassificationTask& task) {
    const auto it = config.synth.find(task.stage);
    if (it == config.synth.end()) throw ConfigError("no synthetic spec for stage " + std::string(to_string(task.stage)));
    TaskInput in;
    in.records = generate_cohort(it->second, task).records;
    std::ostringstream buf;
    write_cohort(buf, in.records);
    in.digest = sha256_hex(buf.str());
    in.source = "synthetic";
    return in;
}

TaskReport run_task(const RunConfig& config, const ClassificationTask& task) {
    if (config.source == DataSource::Synthetic) return run_task(config, task, synthetic_input(config, task).records);
    std::vector<std::string> notes;
    auto report = run_task(config, task, load_files(config, &notes));
    report.notes.insert(report.notes.begin(), notes.begin(), notes.end());
    return report;
}

TaskReport run_task(const RunConfig& config, const ClassificationTask& task, const std::vector<PersonRecord>& all_records) {
    TaskReport rep;
    rep.task = task;
    std::string stage = "complete_cases";
    try {
        const auto records = stage_records(all_records, task.stage);
        if (records.size() != all_records.size())
            rep.notes.push_back(std::to_string(all_records.size() - records.size()) +
                                " records from the other stage ignored");
        auto cc = complete_cases(records, task);
        rep.n_input = cc.n_input;
        rep.n_incomplete = cc.n_incomplete;
        rep.n_complete = static_cast<std::size_t>(cc.dataset.rows());
        rep.n_conditions_imputed = cc.n_conditions_imputed;
        rep.class_counts = cc.class_counts;
        rep.missing_counts = cc.missing_counts;
        Dataset original = std::move(cc.dataset);

        stage = "features";
        std::vector<std::string> constant;
        for (Eigen::Index j = 1; j < original.cols(); ++j)
            if (original.x.col(j).maxCoeff() == original.x.col(j).minCoeff())
                constant.push_back(original.feature_names[static_cast<std::size_t>(j - 1)]);
        for (const auto& f : constant) rep.removals.push_back({f, "constant", "unbalanced"});
        if (!constant.empty()) original = original.drop_features(constant);
        if (original.feature_names.empty()) throw InsufficientVariationError("every feature is constant");

        // Separation is first resolved on the unbalanced data, so the removal
        // list does not depend on SMOTE draws.
        stage = "fit";
        fit_with_remedy(original, config.fit, rep.removals, "unbalanced");

        stage = "balancing";
        Dataset training = original;
        ResampleConfig rc = config.smote;
        rc.binary_feature_mask.clear();
        const bool imbalanced = needs_balancing(rep.class_counts, config.balance_threshold);
        if (imbalanced && config.smote_enabled) {
            auto res = smote(original, rc);
            if (res.dataset.x.topRows(original.rows()) != original.x ||
                res.dataset.y.head(original.rows()) != original.y)
                throw Error("balancing altered original rows");
            rep.balancing_applied = true;
            rep.counts_after = res.counts_after;
            rep.synthetic_rows = res.origins.size();
            rep.balancing_note = "SMOTE applied (k = " + std::to_string(rc.k_neighbors) +
                                 "): smallest class share below " + format_number(config.balance_threshold) +
                                 "; counts before {" + counts_text(res.counts_before) + "}, after {" +
                                 counts_text(res.counts_after) + "}";
            training = std::move(res.dataset);
        } else if (imbalanced) {
            rep.balancing_note = "classes imbalanced but SMOTE disabled by configuration";
            rep.counts_after = rep.class_counts;
        } else {
            rep.balancing_note = "SMOTE skipped: smallest class share is at least " + format_number(config.balance_threshold);
            rep.counts_after = rep.class_counts;
        }

        stage = "fit";
        const std::size_t before = rep.removals.size();
        const Model model = fit_with_remedy(training, config.fit, rep.removals, "balanced");
        if (rep.removals.size() != before) {
            std::vector<std::string> extra;
            for (std::size_t i = before; i < rep.removals.size(); ++i) extra.push_back(rep.removals[i].feature);
            original = original.drop_features(extra);
        }
        rep.features = training.feature_names;
        rep.binary_fit = model.binary;
        rep.multinomial_fit = model.multinomial;
        const bool converged = model.binary ? model.binary->converged : model.multinomial->converged;
        if (!converged)
            throw ConvergenceError("fit did not converge within " + std::to_string(config.fit.max_iterations) +
                                   " iterations");

        stage = "inference";
        rep.inference = model.binary ? wald_inference(*model.binary, config.alpha)
                                     : wald_inference(*model.multinomial, config.alpha);

        stage = "diagnostics";
        rep.diagnostics = run_diagnostics(original, model.binary ? &*model.binary : nullptr, &training, config.diagnostics);

        stage = "selection";
        rep.elimination = recursive_eliminate(training, config.min_features, config.fit);

        stage = "metrics";
        rep.resubstitution_training = resubstitution(model, training);
        rep.resubstitution_original = resubstitution(model, original);
        if (config.cv_enabled) {
            const bool balance = rep.balancing_applied;
            const FitOptions opts = config.fit;
            Trainer trainer = [balance, rc, opts](const Dataset& tr, std::uint64_t fold_seed) -> Predictor {
                Model m;
                if (balance) {
                    ResampleConfig fold_rc = rc;
                    fold_rc.rng_seed = fold_seed;
                    m = fit_model(smote(tr, fold_rc).dataset, opts);
                } else {
                    m = fit_model(tr, opts);
                }
                return [m](const Eigen::MatrixXd& x) { return m.predict(x); };
            };
            rep.cv = repeated_stratified_cv(original, config.cv, trainer);
        }

        stage = "bias";
        rep.bias = bias_report(rep.inference, task, rep.removals);
        if (config.dump_resampled) rep.training = std::move(training);
    } catch (const Error& e) {
        rep.failed = true;
        rep.failure_stage = stage;
        rep.failure_message = e.what();
    }
    return rep;
}

AuditResult run_all(const RunConfig& config) {
    config.validate();
    AuditResult out;
    auto& m = out.manifest;
    m["tool"] = "pact-audit";
    m["version"] = kToolVersion;
    m["seeds"] = {{"run", config.seed}, {"smote", config.smote.rng_seed}, {"cv", config.cv.seed}};
    if (config.source == DataSource::Synthetic)
        for (const auto& [stage, spec] : config.synth) m["seeds"]["synth_" + std::string(to_string(stage))] = spec.seed;
    m["thresholds"] = {{"alpha", config.alpha},
                       {"balance_threshold", config.balance_threshold},
                       {"smote_k", config.smote.k_neighbors},
                       {"fit_tolerance", config.fit.tolerance},
                       {"fit_max_iterations", config.fit.max_iterations},
                       {"separation_bound", config.fit.separation_coef_bound},
                       {"correlation", config.diagnostics.correlation_threshold},
                       {"linearity_bins", config.diagnostics.linearity_bins},
                       {"residual_bins", config.diagnostics.residual_plot_bins},
                       {"flatness_bins", config.diagnostics.flatness_bins},
                       {"flatness_band", config.diagnostics.flatness_band},
                       {"cv_folds", config.cv.folds},
                       {"cv_repeats", config.cv.repeats},
                       {"min_features", config.min_features},
                       {"top_k", config.top_k}};
    m["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                    std::to_string(EIGEN_MINOR_VERSION)},
                      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                      {"boost", std::string(BOOST_LIB_VERSION)},
                      {"openssl", std::string(OPENSSL_VERSION_TEXT)}};
    nlohmann::ordered_json resolved = nlohmann::ordered_json::object();
    for (const auto& [k, v] : config.resolved)
        if (k != "run.out") resolved[k] = v;
    m["config"] = resolved;
    // The output location is left out so reruns into another directory stay byte-identical.
    std::vector<std::string> provenance;
    for (const auto& line : config.provenance)
        if (!line.starts_with("override run.out ")) provenance.push_back(line);
    m["provenance"] = provenance;

    // ordered_json stores members in a vector, so references are not held across insertions.
    nlohmann::ordered_json data;
    nlohmann::ordered_json tasks = nlohmann::ordered_json::array();
    std::vector<PersonRecord> file_records;
    if (config.source == DataSource::Files) {
        data["source"] = "files";
        data["inputs"] = nlohmann::ordered_json::array();
        data["inputs"].push_back({{"role", "cohort"}, {"path", config.cohort_path.string()},
                                  {"sha256", sha256_file(config.cohort_path)}});
        data["inputs"].push_back({{"role", "codes"}, {"path", config.codes_path.string()},
                                  {"sha256", sha256_file(config.codes_path)}});
        std::vector<std::string> notes;
        file_records = load_files(config, &notes);
        data["notes"] = notes;
    } else {
        data["source"] = "synthetic";
        data["cohorts"] = nlohmann::ordered_json::array();
    }

    for (const auto& task : config.tasks) {
        TaskReport rep;
        if (config.source == DataSource::Synthetic) {
            auto in = synthetic_input(config, task);
            data["cohorts"].push_back({{"task", task.id()}, {"rows", in.records.size()}, {"sha256", in.digest}});
            rep = run_task(config, task, in.records);
        } else {
            rep = run_task(config, task, file_records);
        }
        nlohmann::ordered_json t = {{"task", task.id()}, {"file", task.file_stem() + ".json"},
                                    {"status", rep.failed ? "failed" : "ok"}};
        if (rep.failed) t["failure_stage"] = rep.failure_stage;
        tasks.push_back(t);
        out.reports.push_back(std::move(rep));
    }
    m["data"] = std::move(data);
    m["tasks"] = std::move(tasks);
    m["any_failed"] = out.any_failed();
    return out;
}

nlohmann::ordered_json to_json(const TaskReport& r, std::size_t top_k) {
    nlohmann::ordered_json j;
    j["task"] = r.task.id();
    j["kind"] = std::string(to_string(r.task.kind));
    j["stage"] = std::string(to_string(r.task.stage));
    j["status"] = r.failed ? "failed" : "ok";
    if (r.failed) j["failure"] = {{"stage", r.failure_stage}, {"message", r.failure_message}};

    j["data"] = {{"n_input", r.n_input},
                 {"n_complete", r.n_complete},
                 {"n_incomplete", r.n_incomplete},
                 {"n_conditions_imputed", r.n_conditions_imputed},
                 {"missing_counts", counts_json(r.missing_counts)},
                 {"class_counts", counts_json(r.class_counts)}};
    j["balancing"] = {{"applied", r.balancing_applied},
                      {"note", r.balancing_note},
                      {"synthetic_rows", r.synthetic_rows},
                      {"class_counts_after", counts_json(r.counts_after)}};
    auto& rem = j["removed_features"] = nlohmann::ordered_json::array();
    for (const auto& x : r.removals) rem.push_back({{"feature", x.feature}, {"reason", x.reason}, {"detected_on", x.data}});
    j["features"] = r.features;

    if (r.binary_fit) j["model"] = to_json(*r.binary_fit);
    else if (r.multinomial_fit) j["model"] = to_json(*r.multinomial_fit);
    if (r.diagnostics) j["diagnostics"] = to_json(*r.diagnostics);
    if (r.elimination) j["feature_selection"] = to_json(*r.elimination, top_k);

    if (r.resubstitution_training || r.cv) {
        auto& met = j["metrics"];
        if (r.resubstitution_training) {
            met["resubstitution_training"] = to_json(*r.resubstitution_training);
            met["resubstitution_training"]["evaluated_on"] =
                r.balancing_applied ? "balanced training data" : "training data (no balancing)";
        }
        if (r.resubstitution_original) {
            met["resubstitution_original"] = to_json(*r.resubstitution_original);
            met["resubstitution_original"]["evaluated_on"] = "original complete-case data";
        }
        if (r.cv) {
            met["cross_validation"] = to_json(*r.cv);
            met["cross_validation"]["evaluated_on"] =
                r.balancing_applied ? "held-out original rows; SMOTE inside training folds only" : "held-out original rows";
        }
    }

    auto& bias = j["bias"] = nlohmann::ordered_json::array();
    for (const auto& b : r.bias) {
        nlohmann::ordered_json row = {{"feature", b.feature}};
        if (b.cls) row["class"] = *b.cls;
        row["status"] = b.status;
        if (b.coefficient_index) {
            row["coefficient_index"] = *b.coefficient_index;
            row["coefficient"] = b.coefficient;
            row["odds_ratio"] = b.odds_ratio;
            row["ci_low"] = b.ci_low;
            row["ci_high"] = b.ci_high;
            row["p"] = b.p_value;
            row["significant"] = b.significant;
        }
        bias.push_back(row);
    }
    if (!r.notes.empty()) j["notes"] = r.notes;
    return j;
}

}  // namespace pact
