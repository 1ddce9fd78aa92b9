#include "pact/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <cstdio>
#include <numeric>
#include <span>

#include "pact/error.hpp"
#include "pact/glm.hpp"
#include "pact/random.hpp"

namespace pact {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

int draw_int(const IntDistribution& d, double u) {
    if (d.kind == IntDistribution::Kind::Uniform) {
        const int span = d.hi - d.lo + 1;
        return std::min(d.hi, d.lo + static_cast<int>(u * span));
    }
    double pmf = std::exp(-d.rate);
    double cdf = pmf;
    int k = 0;
    while (u >= cdf && k < d.hi) {
        ++k;
        pmf *= d.rate / k;
        cdf += pmf;
    }
    return k;
}

std::size_t draw_category(std::span<const double> weights, double u) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i] / total;
        if (u < acc) return i;
    }
    return weights.size() - 1;
}

void check_rate(double r, const std::string& what) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("synth " + what + " must lie in [0, 1]");
}

template <std::size_t N>
void check_weights(const std::array<double, N>& w, const std::string& what) {
    double total = 0.0;
    for (double v : w) {
        if (!(v >= 0.0)) throw ConfigError("synth " + what + " weights must be nonnegative");
        total += v;
    }
    if (!(total > 0.0)) throw ConfigError("synth " + what + " weights sum to zero");
}

void check_dist(const IntDistribution& d, const std::string& what) {
    if (d.kind == IntDistribution::Kind::Uniform && d.lo > d.hi)
        throw ConfigError("synth " + what + " has lo above hi");
    if (d.kind == IntDistribution::Kind::CappedPoisson && (!(d.rate >= 0.0) || d.hi < 0))
        throw ConfigError("synth " + what + " has an invalid Poisson rate or cap");
    if (d.lo < 0) throw ConfigError("synth " + what + " must be nonnegative");
}

std::map<std::string, double> ln_map(std::initializer_list<std::pair<const char*, double>> odds) {
    std::map<std::string, double> out;
    for (const auto& [name, ratio] : odds) out[name] = std::log(ratio);
    return out;
}

}  // namespace

const std::vector<std::string>& synth_missing_fields() {
    static const std::vector<std::string> fields = {
        "employed", "prior_commits", "institutional_adjustment", "disciplinary_reports", "escape_count",
        "offense_codes", "marital_status", "conditions", "problematic_offense", "override_direction"};
    return fields;
}

void SynthSpec::validate() const {
    if (n == 0) throw ConfigError("synth n must be positive");
    check_rate(female_rate, "female_rate");
    check_rate(employed_rate, "employed_rate");
    check_rate(escape_rate, "escape_rate");
    check_rate(habitual_share, "habitual_share");
    check_rate(problematic_rate, "problematic_rate");
    for (double r : condition_rates) check_rate(r, "condition rate");
    check_weights(race_weights, "race");
    check_weights(marital_weights, "marital");
    if (age_min < 0 || age_min > age_max) throw ConfigError("synth age range invalid");
    check_dist(prior_commits, "prior_commits");
    check_dist(gravity, "gravity");
    check_dist(prior_record, "prior_record");
    check_dist(institutional_adjustment, "institutional_adjustment");
    check_dist(disciplinary_reports, "disciplinary_reports");
    if (!(correlation >= 0.0 && correlation < 1.0)) throw ConfigError("synth correlation must lie in [0, 1)");
    for (int lvl : {2, 3, 4, 5})
        if (!level_shares.contains(lvl) || !(level_shares.at(lvl) > 0.0))
            throw ConfigError("synth level share for level " + std::to_string(lvl) + " must be positive");
    for (const auto& [field, rate] : missingness) {
        const auto& ok = synth_missing_fields();
        if (std::find(ok.begin(), ok.end(), field) == ok.end())
            throw ConfigError("synth missingness names unknown field '" + field + "'");
        check_rate(rate, "missingness for " + field);
    }
    for (const auto& [kind, t] : truth) {
        const auto names = task_feature_names({kind, stage});
        auto check_names = [&](const std::map<std::string, double>& coefs) {
            for (const auto& [name, v] : coefs) {
                if (std::find(names.begin(), names.end(), name) == names.end())
                    throw ConfigError("synth coefficient '" + name + "' is not a feature of " +
                                      ClassificationTask{kind, stage}.id());
                if (!std::isfinite(v)) throw ConfigError("synth coefficient '" + name + "' is not finite");
            }
        };
        if (kind == TaskKind::Multinomial) {
            double total = 0.0;
            for (int lvl : {2, 3, 4, 5}) {
                auto it = t.class_shares.find(lvl);
                if (it == t.class_shares.end() || !(it->second > 0.0))
                    throw ConfigError("synth multinomial share for level " + std::to_string(lvl) + " must be positive");
                total += it->second;
            }
            if (!(total > 0.0)) throw ConfigError("synth multinomial shares sum to zero");
            for (const auto& [cls, coefs] : t.class_coefficients) {
                if (cls == t.reference) throw ConfigError("reference class coefficients are fixed at zero");
                check_names(coefs);
            }
        } else {
            check_names(t.coefficients);
            if (t.prevalence && !(*t.prevalence > 0.0 && *t.prevalence < 1.0))
                throw ConfigError("synth prevalence must lie strictly between 0 and 1");
        }
    }
}

SynthSpec default_spec_from_paper(Stage stage) {
    SynthSpec s;
    s.stage = stage;
    s.placeholders = {"female_rate", "race_weights (uniform; keeps Black:White at 1:1)", "age range",
                      "marital_weights", "employed_rate", "count and score distributions", "escape rates",
                      "condition_rates", "problematic_rate", "multinomial per-class coefficients (ratios of "
                      "per-level odds ratios to the level-4 value)"};
    if (stage == Stage::Initial) {
        s.n = 13815;
        s.level_shares = {{2, 1324}, {3, 4741}, {4, 7699}, {5, 51}};
        TaskTruth hl;
        hl.n = 13185;
        hl.prevalence = 7750.0 / 13185.0;
        hl.coefficients = ln_map({{"ic_institut_adj", 2.09}, {"escape_hist_5", 4.01}, {"race_B", 1.27},
                                  {"age_lt_25", 1.47}, {"age_gt_45", 0.28}, {"gender_female", 0.34}});
        s.truth[TaskKind::HighVsLow] = hl;

        TaskTruth mx;
        mx.n = 13815;
        mx.prevalence = 51.0 / 13815.0;
        mx.coefficients = ln_map({{"ic_institut_adj", 1.40}, {"off_1_gs_max", 1.09}, {"age_lt_25", 1.22},
                                  {"gender_female", 0.004}});
        s.truth[TaskKind::MaxVsRegular] = mx;

        TaskTruth mn;
        mn.n = 13815;
        mn.reference = 4;
        mn.class_shares = {{2, 1324}, {3, 4741}, {4, 7699}, {5, 51}};
        mn.class_coefficients[2] = ln_map({{"gender_female", 2.13 / 1.88}, {"age_gt_45", 4.40 / 0.59}});
        mn.class_coefficients[3] =
            ln_map({{"gender_female", 1.56 / 1.88}, {"age_gt_45", 1.60 / 0.59}, {"age_lt_25", 1.05 / 3.08},
                    {"race_B", 1.22 / 2.79}, {"race_A", 0.89 / 3.93}, {"race_H", 1.46 / 2.39},
                    {"race_I", 1.05 / 2.03}, {"race_O", 1.08 / 2.44}});
        mn.class_coefficients[5] = ln_map({{"ic_institut_adj", 1.40}});
        s.truth[TaskKind::Multinomial] = mn;

        TaskTruth ov;
        ov.n = 13816;
        ov.prevalence = 253.0 / 13816.0;
        ov.coefficients = ln_map({{"problematic_offenses", 3.54}, {"escape_hist_5", 3.86}, {"gender_female", 0.62}});
        s.truth[TaskKind::OverrideUp] = ov;
    } else {
        s.n = 14572;
        // Levels 4/5 from the high and maximum counts; 2/3 split in the initial-stage ratio (placeholder).
        s.level_shares = {{2, 2625}, {3, 9400}, {4, 1784}, {5, 763}};
        s.placeholders.push_back("reclassification level 2/3 split");
        TaskTruth hl;
        hl.n = 14572;
        hl.prevalence = 2547.0 / 14572.0;
        hl.coefficients = ln_map({{"re_discip_reports", 3.49}, {"gender_female", 0.09}, {"race_A", 0.09}});
        s.truth[TaskKind::HighVsLow] = hl;

        TaskTruth mx;
        mx.n = 14572;
        mx.prevalence = 763.0 / 14572.0;
        mx.coefficients = ln_map({{"re_discip_reports", 2.09}, {"age_gt_45", 0.16}, {"gender_female", 0.03}});
        s.truth[TaskKind::MaxVsRegular] = mx;

        TaskTruth mn;
        mn.n = 14572;
        mn.reference = 4;
        mn.class_shares = s.level_shares;
        mn.class_coefficients[2] =
            ln_map({{"gender_female", 5.78 / 0.35}, {"age_gt_45", 4.37 / 0.46}, {"age_lt_25", 1.11 / 1.56},
                    {"race_B", 1.39 / 1.16}, {"race_A", 1.27 / 1.00}, {"race_H", 2.31 / 0.91},
                    {"race_I", 0.69 / 0.90}, {"race_O", 1.90 / 0.98}});
        mn.class_coefficients[3] =
            ln_map({{"gender_female", 1.81 / 0.35}, {"age_gt_45", 1.50 / 0.46}, {"age_lt_25", 0.67 / 1.56},
                    {"race_B", 0.95 / 1.16}, {"race_A", 0.81 / 1.00}, {"race_H", 0.93 / 0.91},
                    {"race_I", 1.97 / 0.90}, {"race_O", 1.04 / 0.98}});
        mn.class_coefficients[5] = ln_map({{"mrt_stat_WID", 2.35}, {"re_discip_reports", 2.06}});
        s.truth[TaskKind::Multinomial] = mn;

        TaskTruth ov;
        ov.n = 16543;
        ov.prevalence = 2797.0 / 16543.0;
        ov.coefficients = ln_map({{"problematic_offenses", 3.43}, {"escape_hist_5", 2.71}, {"gender_female", 0.45},
                                  {"race_B", 1.23}, {"race_H", 0.80}, {"age_gt_45", 1.59}, {"age_lt_25", 0.27}});
        s.truth[TaskKind::OverrideUp] = ov;
    }
    return s;
}

std::vector<CriminalCodeEntry> synthetic_code_table(const SynthSpec& spec) {
    const int g_hi = spec.gravity.hi;
    const int p_hi = spec.prior_record.hi;
    const int g_lo = spec.gravity.kind == IntDistribution::Kind::Uniform ? spec.gravity.lo : 0;
    const int p_lo = spec.prior_record.kind == IntDistribution::Kind::Uniform ? spec.prior_record.lo : 0;
    std::vector<CriminalCodeEntry> out;
    for (int g = g_lo; g <= g_hi; ++g)
        for (int p = p_lo; p <= p_hi; ++p)
            out.push_back({"SYN-G" + std::to_string(g) + "-P" + std::to_string(p), std::max(g_lo, g - 2), g,
                           std::max(p_lo, p - 1), p});
    return out;
}

double calibrate_intercept(const std::vector<double>& offsets, double target) {
    if (!(target > 0.0 && target < 1.0)) throw ConfigError("target prevalence must lie strictly in (0, 1)");
    if (offsets.empty()) throw ConfigError("cannot calibrate an intercept on zero rows");
    auto mean_prob = [&](double b) {
        double s = 0.0;
        for (double o : offsets) s += sigmoid(b + o);
        return s / static_cast<double>(offsets.size());
    };
    double lo = -60.0, hi = 60.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (mean_prob(mid) < target ? lo : hi) = mid;
        if (hi - lo < 1e-13) break;
    }
    return 0.5 * (lo + hi);
}

namespace {

// Draws one person's attributes; the outcome fields are filled in later.
PersonRecord draw_person(const SynthSpec& spec, Stage stage, std::size_t row) {
    Rng rng(substream_seed(spec.seed, row, 1));
    const double rho = spec.correlation;
    const double latent = rho > 0.0 ? rng.normal() : 0.0;
    auto u = [&] {
        if (rho == 0.0) return rng.uniform01();
        const double z = std::sqrt(rho) * latent + std::sqrt(1.0 - rho) * rng.normal();
        return std::min(normal_cdf(z), std::nextafter(1.0, 0.0));
    };

    PersonRecord r;
    char id[32];
    std::snprintf(id, sizeof id, "syn-%07zu", row + 1);
    r.person_id = id;
    r.stage = stage;
    r.gender_female = u() < spec.female_rate;
    r.race = static_cast<Race>(draw_category(spec.race_weights, u()));
    r.age_years = draw_int(IntDistribution::uniform(spec.age_min, spec.age_max), u());
    r.marital = static_cast<Marital>(draw_category(spec.marital_weights, u()));
    r.employed = u() < spec.employed_rate;
    r.prior_commits = draw_int(spec.prior_commits, u());
    const int g = draw_int(spec.gravity, u());
    const int p = draw_int(spec.prior_record, u());
    r.offense_codes = {"SYN-G" + std::to_string(g) + "-P" + std::to_string(p)};
    r.gs_max = g;
    r.prs_max = p;
    const double adj = draw_int(spec.institutional_adjustment, u());
    const int disc = draw_int(spec.disciplinary_reports, u());
    if (stage == Stage::Initial) r.institutional_adjustment = adj;
    else r.disciplinary_reports = disc;
    int escapes = 0;
    const double ue = u(), uh = u(), uc = u();
    if (ue < spec.escape_rate)
        escapes = uh < spec.habitual_share ? 5 + static_cast<int>(uc * 5) : 1 + static_cast<int>(uc * 4);
    r.escape_count = escapes;
    for (std::size_t k = 0; k < kConditionCount; ++k) r.conditions[k] = u() < spec.condition_rates[k];
    r.problematic_offense = u() < spec.problematic_rate;
    r.override_direction = OverrideDirection::None;
    return r;
}

double linear_offset(const FeatureVector& f, const std::map<std::string, double>& coefs) {
    double eta = 0.0;
    for (std::size_t j = 0; j < f.names.size(); ++j) {
        auto it = coefs.find(f.names[j]);
        if (it != coefs.end()) eta += it->second * f.values[j];
    }
    return eta;
}

int draw_level(const std::map<int, double>& shares, std::initializer_list<int> allowed, double u) {
    std::vector<double> w;
    for (int lvl : allowed) w.push_back(shares.at(lvl));
    return *(allowed.begin() + static_cast<std::ptrdiff_t>(draw_category(w, u)));
}

void inject_missing(PersonRecord& r, const SynthSpec& spec, std::size_t row) {
    if (spec.missingness.empty()) return;
    Rng rng(substream_seed(spec.seed, row, 3));
    for (const auto& field : synth_missing_fields()) {
        auto it = spec.missingness.find(field);
        const double u = rng.uniform01();  // always consumed so fields draw independently of configuration
        if (it == spec.missingness.end() || !(u < it->second)) continue;
        if (field == "employed") r.employed.reset();
        else if (field == "prior_commits") r.prior_commits.reset();
        else if (field == "institutional_adjustment") r.institutional_adjustment.reset();
        else if (field == "disciplinary_reports") r.disciplinary_reports.reset();
        else if (field == "escape_count") r.escape_count.reset();
        else if (field == "offense_codes") {
            r.offense_codes.clear();
            r.gs_max.reset();
            r.prs_max.reset();
        } else if (field == "marital_status") r.marital = Marital::Unknown;
        else if (field == "conditions") r.conditions.fill(std::nullopt);
        else if (field == "problematic_offense") r.problematic_offense.reset();
        else if (field == "override_direction") r.override_direction.reset();
    }
}

}  // namespace

SynthCohort generate_cohort(const SynthSpec& spec, const ClassificationTask& task) {
    if (spec.stage != task.stage)
        throw ConfigError("synth spec is for the " + std::string(to_string(spec.stage)) + " stage, task " + task.id() +
                          " is not");
    spec.validate();
    auto tit = spec.truth.find(task.kind);
    const TaskTruth truth = tit == spec.truth.end() ? TaskTruth{} : tit->second;
    const std::size_t n = truth.n.value_or(spec.n);

    SynthCohort out;
    out.records.reserve(n);
    std::vector<FeatureVector> feats;
    feats.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.records.push_back(draw_person(spec, task.stage, i));
        feats.push_back(*encode_features(out.records.back(), task).features);
    }

    if (task.kind == TaskKind::Multinomial) {
        std::vector<int> levels = {2, 3, 4, 5};
        std::map<int, double> share = truth.class_shares;
        if (share.empty()) share = spec.level_shares;
        double total = 0.0;
        for (int l : levels) total += share.at(l);
        // offsets[i][k] for each level; reference level stays at zero.
        std::vector<std::array<double, 4>> offsets(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < 4; ++k) {
                auto cit = truth.class_coefficients.find(levels[k]);
                offsets[i][k] = cit == truth.class_coefficients.end() ? 0.0 : linear_offset(feats[i], cit->second);
            }
        std::array<double, 4> b{};
        for (int it = 0; it < 500; ++it) {
            std::array<double, 4> mean{};
            for (std::size_t i = 0; i < n; ++i) {
                std::array<double, 4> s{};
                double m = -1e300;
                for (std::size_t k = 0; k < 4; ++k) m = std::max(m, s[k] = b[k] + offsets[i][k]);
                double z = 0.0;
                for (std::size_t k = 0; k < 4; ++k) z += s[k] = std::exp(s[k] - m);
                for (std::size_t k = 0; k < 4; ++k) mean[k] += s[k] / z / static_cast<double>(n);
            }
            double worst = 0.0;
            const std::size_t ref = static_cast<std::size_t>(
                std::find(levels.begin(), levels.end(), truth.reference) - levels.begin());
            for (std::size_t k = 0; k < 4; ++k) {
                const double target = share.at(levels[k]) / total;
                worst = std::max(worst, std::abs(mean[k] - target));
            }
            for (std::size_t k = 0; k < 4; ++k) {
                if (k == ref) continue;
                const double target = share.at(levels[k]) / total;
                const double target_ref = share.at(levels[ref]) / total;
                b[k] += std::log(target / mean[k]) - std::log(target_ref / mean[ref]);
            }
            if (worst < 1e-12) break;
        }
        for (std::size_t k = 0; k < 4; ++k) out.class_intercepts[levels[k]] = b[k];
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng(substream_seed(spec.seed, i, 2));
            std::array<double, 4> w{};
            for (std::size_t k = 0; k < 4; ++k) w[k] = b[k] + offsets[i][k];
            const double m = *std::max_element(w.begin(), w.end());
            for (auto& v : w) v = std::exp(v - m);
            out.records[i].custody_level = levels[draw_category(w, rng.uniform01())];
        }
    } else {
        std::vector<double> offsets(n);
        for (std::size_t i = 0; i < n; ++i) offsets[i] = linear_offset(feats[i], truth.coefficients);
        out.intercept = truth.prevalence ? calibrate_intercept(offsets, *truth.prevalence) : truth.intercept;
        double expected = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng(substream_seed(spec.seed, i, 2));
            const double prob = sigmoid(out.intercept + offsets[i]);
            expected += prob;
            const bool y = rng.uniform01() < prob;
            const double ul = rng.uniform01();
            auto& r = out.records[i];
            switch (task.kind) {
                case TaskKind::HighVsLow:
                    r.custody_level = y ? draw_level(spec.level_shares, {4, 5}, ul) : draw_level(spec.level_shares, {2, 3}, ul);
                    break;
                case TaskKind::MaxVsRegular:
                    r.custody_level = y ? 5 : draw_level(spec.level_shares, {2, 3, 4}, ul);
                    break;
                case TaskKind::OverrideUp:
                    r.custody_level = draw_level(spec.level_shares, {2, 3, 4, 5}, ul);
                    r.override_direction = y ? OverrideDirection::Up : OverrideDirection::None;
                    break;
                case TaskKind::Multinomial:
                    break;
            }
        }
        out.expected_prevalence = expected / static_cast<double>(n);
    }
    for (std::size_t i = 0; i < n; ++i) inject_missing(out.records[i], spec, i);
    return out;
}

namespace {

nlohmann::ordered_json dist_json(const IntDistribution& d) {
    if (d.kind == IntDistribution::Kind::Uniform) return {{"uniform", {d.lo, d.hi}}};
    return {{"capped_poisson", {{"rate", d.rate}, {"cap", d.hi}}}};
}

}  // namespace

nlohmann::ordered_json to_json(const SynthSpec& s) {
    nlohmann::ordered_json j;
    j["n"] = s.n;
    j["seed"] = s.seed;
    j["stage"] = std::string(to_string(s.stage));
    j["female_rate"] = s.female_rate;
    j["race_weights"] = s.race_weights;
    j["age_range"] = {s.age_min, s.age_max};
    j["marital_weights"] = s.marital_weights;
    j["employed_rate"] = s.employed_rate;
    j["prior_commits"] = dist_json(s.prior_commits);
    j["gravity"] = dist_json(s.gravity);
    j["prior_record"] = dist_json(s.prior_record);
    j["institutional_adjustment"] = dist_json(s.institutional_adjustment);
    j["disciplinary_reports"] = dist_json(s.disciplinary_reports);
    j["escape_rate"] = s.escape_rate;
    j["habitual_share"] = s.habitual_share;
    j["condition_rates"] = s.condition_rates;
    j["problematic_rate"] = s.problematic_rate;
    auto& ls = j["level_shares"] = nlohmann::ordered_json::object();
    for (const auto& [l, v] : s.level_shares) ls[std::to_string(l)] = v;
    j["missingness"] = s.missingness;
    j["correlation"] = s.correlation;
    auto& tr = j["truth"] = nlohmann::ordered_json::object();
    for (const auto& [kind, t] : s.truth) {
        nlohmann::ordered_json tj;
        if (t.n) tj["n"] = *t.n;
        if (kind == TaskKind::Multinomial) {
            tj["reference"] = t.reference;
            for (const auto& [l, v] : t.class_shares) tj["class_shares"][std::to_string(l)] = v;
            for (const auto& [l, c] : t.class_coefficients) tj["class_coefficients"][std::to_string(l)] = c;
        } else {
            if (t.prevalence) tj["prevalence"] = *t.prevalence;
            else tj["intercept"] = t.intercept;
            tj["coefficients"] = t.coefficients;
        }
        tr[std::string(to_string(kind))] = tj;
    }
    j["placeholders"] = s.placeholders;
    return j;
}

}  // namespace pact
