#include "pact/config.hpp"

#include <algorithm>
#include <array>
#include <optional>
#include <charconv>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pact/error.hpp"
#include "pact/random.hpp"
#include "pact/table.hpp"

namespace pact {

const std::vector<std::pair<std::string, std::string>>& config_keys() {
    static const std::vector<std::pair<std::string, std::string>> keys = {
        {"run.seed", "master seed; derives smote/cv/synth seeds unless those are set"},
        {"run.out", "output directory"},
        {"run.tasks", "'all' or comma list like HighVsLow:initial,OverrideUp:reclassification"},
        {"run.alpha", "significance level for Wald tests (0.05)"},
        {"data.source", "synthetic | files"},
        {"data.cohort", "cohort file (source = files)"},
        {"data.codes", "criminal-code table (source = files)"},
        {"data.delimiter", "field delimiter: ',' (default), 'tab', ';' or '|'"},
        {"schema.<field>", "column for a logical cohort field; empty leaves it unmapped"},
        {"smote.enabled", "apply SMOTE when classes are imbalanced (true)"},
        {"smote.k", "SMOTE neighbours (5)"},
        {"smote.seed", "SMOTE seed"},
        {"smote.dump", "write resampled training data as CSV (false)"},
        {"balance.threshold", "balance when minority share is below this (0.4)"},
        {"fit.tolerance", "log-likelihood change declaring convergence (1e-8)"},
        {"fit.max_iterations", "Newton iteration cap (100)"},
        {"fit.ridge_jitter", "first diagonal shift tried on a failed solve (0)"},
        {"fit.separation_bound", "|coefficient| treated as divergence (15)"},
        {"fit.full_hessian", "multinomial Newton with the full Hessian (true)"},
        {"diagnostics.threshold_corr", "collinearity threshold on |r| (0.3)"},
        {"diagnostics.linearity_bins", "quantile bins for the log-odds check (10)"},
        {"diagnostics.residual_bins", "bins in residual plot data (10)"},
        {"diagnostics.flatness_bins", "bins used by the flatness flag (4)"},
        {"diagnostics.flatness_band", "band half-width in standard errors (2)"},
        {"diagnostics.plots", "write plot-data files (true)"},
        {"cv.enabled", "run repeated stratified cross-validation (true)"},
        {"cv.folds", "folds (10)"},
        {"cv.repeats", "repeats (10)"},
        {"cv.seed", "fold-assignment seed"},
        {"selection.min_features", "features left by recursive elimination (4)"},
        {"selection.top_k", "features listed as most important (4)"},
        {"synth.n", "cohort size for every synthetic task (overrides per-task sizes)"},
        {"synth.seed", "synthetic cohort seed"},
        {"synth.female_rate", "share identified as female"},
        {"synth.race_weights", "six weights for W,B,A,H,I,O"},
        {"synth.marital_weights", "five weights for SIN,MAR,DIV,SEP,WID"},
        {"synth.employed_rate", "share employed at commitment"},
        {"synth.age_min", "youngest age"},
        {"synth.age_max", "oldest age"},
        {"synth.escape_rate", "share with at least one escape"},
        {"synth.habitual_share", "share of escapees with five or more"},
        {"synth.problematic_rate", "share with a problematic offense"},
        {"synth.condition_rates", "seven rates for the treatment-need flags"},
        {"synth.correlation", "shared copula factor in [0,1) (0)"},
        {"synth.missing.<field>", "probability a field is blanked after outcomes are drawn"},
        {"synth.<Kind>:<stage>.n", "cohort size for one task"},
        {"synth.<Kind>:<stage>.prevalence", "target prevalence; intercept calibrated by bisection"},
        {"synth.<Kind>:<stage>.intercept", "fixed intercept (when no prevalence)"},
        {"synth.<Kind>:<stage>.coef.<feature>", "true coefficient (binary tasks)"},
        {"synth.Multinomial:<stage>.coef.<level>.<feature>", "true coefficient vs the reference level"},
        {"synth.Multinomial:<stage>.share.<level>", "target share of a custody level"},
    };
    return keys;
}

namespace {

using Flat = std::map<std::string, std::string>;

template <class T>
T number(const std::string& key, const std::string& v) {
    T out{};
    const auto t = trim(v);
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw ConfigError("config key " + key + ": cannot parse '" + v + "' as a number");
    return out;
}

bool boolean(const std::string& key, const std::string& v) {
    std::string l(trim(v));
    std::transform(l.begin(), l.end(), l.begin(), [](unsigned char c) { return std::tolower(c); });
    if (l == "true" || l == "1" || l == "yes" || l == "on") return true;
    if (l == "false" || l == "0" || l == "no" || l == "off") return false;
    throw ConfigError("config key " + key + ": expected true/false, got '" + v + "'");
}

std::vector<double> number_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& part : split_delimited(v, ',')) out.push_back(number<double>(key, part));
    return out;
}

template <std::size_t N>
std::array<double, N> fixed_list(const std::string& key, const std::string& v) {
    const auto l = number_list(key, v);
    if (l.size() != N) throw ConfigError("config key " + key + " needs " + std::to_string(N) + " values");
    std::array<double, N> out{};
    std::copy(l.begin(), l.end(), out.begin());
    return out;
}

char delimiter(const std::string& v) {
    if (v == "tab" || v == "\\t") return '\t';
    if (v.size() == 1) return v[0];
    if (v == "comma") return ',';
    throw ConfigError("data.delimiter must be a single character or 'tab'");
}

Flat flatten(std::istream& in) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    Flat flat;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("config key '" + section + "' must sit inside a [section]");
        for (const auto& [key, value] : body) flat[section + "." + key] = value.data();
    }
    return flat;
}

std::vector<ClassificationTask> parse_tasks(const std::string& v) {
    if (trim(v) == "all") return ClassificationTask::all();
    std::vector<ClassificationTask> out;
    for (const auto& part : split_delimited(v, ',')) {
        const auto t = trim(part);
        if (t.empty()) continue;
        try {
            const auto task = ClassificationTask::parse(t);
            if (std::find(out.begin(), out.end(), task) == out.end()) out.push_back(task);
        } catch (const UsageError& e) {
            throw ConfigError(std::string("run.tasks: ") + e.what());
        }
    }
    return out;
}

void apply_truth_key(SynthSpec& spec, TaskKind kind, const std::string& key, const std::string& sub,
                     const std::string& v) {
    TaskTruth& t = spec.truth[kind];
    if (sub == "n") t.n = number<std::size_t>(key, v);
    else if (sub == "prevalence") t.prevalence = number<double>(key, v);
    else if (sub == "intercept") {
        t.intercept = number<double>(key, v);
        t.prevalence.reset();
    } else if (sub == "reference" && kind == TaskKind::Multinomial) t.reference = number<int>(key, v);
    else if (sub.starts_with("share.") && kind == TaskKind::Multinomial)
        t.class_shares[number<int>(key, sub.substr(6))] = number<double>(key, v);
    else if (sub.starts_with("coef.")) {
        const auto rest = sub.substr(5);
        if (kind == TaskKind::Multinomial) {
            const auto dot = rest.find('.');
            if (dot == std::string::npos) throw ConfigError("config key " + key + " must be coef.<level>.<feature>");
            t.class_coefficients[number<int>(key, rest.substr(0, dot))][rest.substr(dot + 1)] = number<double>(key, v);
        } else {
            t.coefficients[rest] = number<double>(key, v);
        }
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

void apply_synth_key(RunConfig& c, const std::string& key, const std::string& name, const std::string& v) {
    auto all = [&](auto&& fn) {
        for (auto& [stage, spec] : c.synth) fn(spec);
    };
    if (name == "n") {
        const auto n = number<std::size_t>(key, v);
        all([&](SynthSpec& s) {
            s.n = n;
            for (auto& [k, t] : s.truth) t.n.reset();
        });
    } else if (name == "seed") {
        const auto s = number<std::uint64_t>(key, v);
        all([&](SynthSpec& sp) { sp.seed = s; });
    } else if (name == "female_rate") {
        const auto r = number<double>(key, v);
        all([&](SynthSpec& s) { s.female_rate = r; });
    } else if (name == "race_weights") {
        const auto w = fixed_list<6>(key, v);
        all([&](SynthSpec& s) { s.race_weights = w; });
    } else if (name == "marital_weights") {
        const auto w = fixed_list<5>(key, v);
        all([&](SynthSpec& s) { s.marital_weights = w; });
    } else if (name == "employed_rate") {
        const auto r = number<double>(key, v);
        all([&](SynthSpec& s) { s.employed_rate = r; });
    } else if (name == "age_min") {
        const auto a = number<int>(key, v);
        all([&](SynthSpec& s) { s.age_min = a; });
    } else if (name == "age_max") {
        const auto a = number<int>(key, v);
        all([&](SynthSpec& s) { s.age_max = a; });
    } else if (name == "escape_rate") {
        const auto r = number<double>(key, v);
        all([&](SynthSpec& s) { s.escape_rate = r; });
    } else if (name == "habitual_share") {
        const auto r = number<double>(key, v);
        all([&](SynthSpec& s) { s.habitual_share = r; });
    } else if (name == "problematic_rate") {
        const auto r = number<double>(key, v);
        all([&](SynthSpec& s) { s.problematic_rate = r; });
    } else if (name == "condition_rates") {
        const auto w = fixed_list<kConditionCount>(key, v);
        all([&](SynthSpec& s) { s.condition_rates = w; });
    } else if (name == "correlation") {
        const auto r = number<double>(key, v);
        all([&](SynthSpec& s) { s.correlation = r; });
    } else if (name.starts_with("missing.")) {
        const auto field = name.substr(8);
        const auto r = number<double>(key, v);
        all([&](SynthSpec& s) { s.missingness[field] = r; });
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

}  // namespace

void RunConfig::validate() const {
    if (tasks.empty()) throw ConfigError("run.tasks selects no task");
    if (source == DataSource::Files && (cohort_path.empty() || codes_path.empty()))
        throw ConfigError("data.source = files needs data.cohort and data.codes");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("run.alpha must lie in (0, 1)");
    if (smote.k_neighbors < 1) throw ConfigError("smote.k must be at least 1");
    if (!(balance_threshold > 0.0 && balance_threshold <= 0.5)) throw ConfigError("balance.threshold must lie in (0, 0.5]");
    fit.validate();
    if (diagnostics.correlation_threshold <= 0.0) throw ConfigError("diagnostics.threshold_corr must be positive");
    if (diagnostics.linearity_bins < 3) throw ConfigError("diagnostics.linearity_bins must be at least 3");
    if (diagnostics.residual_plot_bins < 1 || diagnostics.flatness_bins < 1)
        throw ConfigError("residual bin counts must be positive");
    if (cv.folds < 2) throw ConfigError("cv.folds must be at least 2");
    if (cv.repeats < 1) throw ConfigError("cv.repeats must be at least 1");
    if (min_features < 1) throw ConfigError("selection.min_features must be at least 1");
    if (source == DataSource::Synthetic)
        for (const auto& [stage, spec] : synth) spec.validate();
}

RunConfig parse_config(std::istream& in, const ConfigOverrides& overrides, const std::filesystem::path& base_dir) {
    Flat flat = flatten(in);
    RunConfig c;
    for (const auto& [key, value] : overrides) {
        const auto it = flat.find(key);
        c.provenance.push_back("override " + key + " = " + value +
                               (it == flat.end() ? std::string(" (not in config file)") : " (config file had " + it->second + ")"));
        flat[key] = value;
    }
    c.synth[Stage::Initial] = default_spec_from_paper(Stage::Initial);
    c.synth[Stage::Reclassification] = default_spec_from_paper(Stage::Reclassification);

    auto path_of = [&](const std::string& v) {
        std::filesystem::path p(std::string(trim(v)));
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };

    std::optional<std::uint64_t> smote_seed, cv_seed, synth_seed;
    for (const auto& [key, v] : flat) {
        const auto dot = key.find('.');
        const std::string section = key.substr(0, dot);
        const std::string name = key.substr(dot + 1);
        if (key == "run.seed") c.seed = number<std::uint64_t>(key, v);
        else if (key == "run.out") c.out_dir = path_of(v);
        else if (key == "run.tasks") c.tasks = parse_tasks(v);
        else if (key == "run.alpha") c.alpha = number<double>(key, v);
        else if (key == "data.source") {
            if (trim(v) == "synthetic") c.source = DataSource::Synthetic;
            else if (trim(v) == "files") c.source = DataSource::Files;
            else throw ConfigError("data.source must be 'synthetic' or 'files'");
        } else if (key == "data.cohort") c.cohort_path = path_of(v);
        else if (key == "data.codes") c.codes_path = path_of(v);
        else if (key == "data.delimiter") c.delimiter = delimiter(v);
        else if (section == "schema") {
            const auto& fields = schema_fields();
            if (std::find(fields.begin(), fields.end(), name) == fields.end())
                throw ConfigError("unknown schema field '" + name + "'");
            c.schema[name] = std::string(trim(v));
        } else if (key == "smote.enabled") c.smote_enabled = boolean(key, v);
        else if (key == "smote.k") c.smote.k_neighbors = number<int>(key, v);
        else if (key == "smote.seed") smote_seed = number<std::uint64_t>(key, v);
        else if (key == "smote.dump") c.dump_resampled = boolean(key, v);
        else if (key == "balance.threshold") c.balance_threshold = number<double>(key, v);
        else if (key == "fit.tolerance") c.fit.tolerance = number<double>(key, v);
        else if (key == "fit.max_iterations") c.fit.max_iterations = number<int>(key, v);
        else if (key == "fit.ridge_jitter") c.fit.ridge_jitter = number<double>(key, v);
        else if (key == "fit.separation_bound") c.fit.separation_coef_bound = number<double>(key, v);
        else if (key == "fit.full_hessian") c.fit.full_hessian = boolean(key, v);
        else if (key == "diagnostics.threshold_corr") c.diagnostics.correlation_threshold = number<double>(key, v);
        else if (key == "diagnostics.linearity_bins") c.diagnostics.linearity_bins = number<int>(key, v);
        else if (key == "diagnostics.residual_bins") c.diagnostics.residual_plot_bins = number<int>(key, v);
        else if (key == "diagnostics.flatness_bins") c.diagnostics.flatness_bins = number<int>(key, v);
        else if (key == "diagnostics.flatness_band") c.diagnostics.flatness_band = number<double>(key, v);
        else if (key == "diagnostics.plots") c.write_plots = boolean(key, v);
        else if (key == "cv.enabled") c.cv_enabled = boolean(key, v);
        else if (key == "cv.folds") c.cv.folds = number<int>(key, v);
        else if (key == "cv.repeats") c.cv.repeats = number<int>(key, v);
        else if (key == "cv.seed") cv_seed = number<std::uint64_t>(key, v);
        else if (key == "selection.min_features") c.min_features = number<std::size_t>(key, v);
        else if (key == "selection.top_k") c.top_k = number<std::size_t>(key, v);
        else if (section == "synth" && name.find(':') == std::string::npos) {
            if (name == "seed") synth_seed = number<std::uint64_t>(key, v);
            else apply_synth_key(c, key, name, v);
        } else if (section == "synth") {
            // Sections named "synth.<Kind>:<stage>" arrive as "synth.<Kind>:<stage>.<key>".
            const auto rest = key.substr(6);
            const auto sep = rest.find('.');
            if (sep == std::string::npos) throw ConfigError("unknown config key '" + key + "'");
            ClassificationTask task;
            try {
                task = ClassificationTask::parse(rest.substr(0, sep));
            } catch (const UsageError& e) {
                throw ConfigError("config key " + key + ": " + e.what());
            }
            apply_truth_key(c.synth[task.stage], task.kind, key, rest.substr(sep + 1), v);
        } else {
            throw ConfigError("unknown config key '" + key + "'");
        }
        c.resolved[key] = v;
    }
    c.smote.rng_seed = smote_seed.value_or(substream_seed(c.seed, 0x53));
    c.cv.seed = cv_seed.value_or(substream_seed(c.seed, 0xc7));
    const auto sseed = synth_seed.value_or(substream_seed(c.seed, 0x5e));
    for (auto& [stage, spec] : c.synth) spec.seed = substream_seed(sseed, static_cast<std::uint64_t>(stage));
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    return parse_config(in, overrides, path.parent_path());
}

RunConfig default_config(const ConfigOverrides& overrides) {
    std::istringstream empty;
    return parse_config(empty, overrides);
}

}  // namespace pact
