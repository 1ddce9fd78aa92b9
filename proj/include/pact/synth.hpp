#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pact/cohort.hpp"
#include "pact/dataset.hpp"

namespace pact {

// Bounded integer distribution: uniform on [lo, hi] or Poisson(rate) capped at hi.
struct IntDistribution {
    enum class Kind { Uniform, CappedPoisson } kind = Kind::Uniform;
    int lo = 0;
    int hi = 0;
    double rate = 0.0;

    static IntDistribution uniform(int lo, int hi) { return {Kind::Uniform, lo, hi, 0.0}; }
    static IntDistribution capped_poisson(double rate, int cap) { return {Kind::CappedPoisson, 0, cap, rate}; }
};

/// Ground truth for one task. Binary tasks use `coefficients` plus either a
/// target prevalence (intercept calibrated by bisection) or a fixed
/// intercept. Multinomial tasks use per-class coefficients relative to
/// `reference` and target class shares.
struct TaskTruth {
    std::optional<std::size_t> n;
    std::map<std::string, double> coefficients;
    std::optional<double> prevalence;
    double intercept = 0.0;
    std::map<int, std::map<std::string, double>> class_coefficients;
    std::map<int, double> class_shares;
    int reference = 4;
};

struct SynthSpec {
    std::size_t n = 10000;
    std::uint64_t seed = 1;
    Stage stage = Stage::Initial;

    double female_rate = 0.5;
    std::array<double, 6> race_weights{1, 1, 1, 1, 1, 1};  // W B A H I O
    int age_min = 18;
    int age_max = 70;
    std::array<double, 5> marital_weights{1, 1, 1, 1, 1};  // SIN MAR DIV SEP WID
    double employed_rate = 0.5;

    IntDistribution prior_commits = IntDistribution::capped_poisson(1.0, 10);
    IntDistribution gravity = IntDistribution::uniform(1, 14);
    IntDistribution prior_record = IntDistribution::uniform(0, 5);
    IntDistribution institutional_adjustment = IntDistribution::uniform(0, 4);
    IntDistribution disciplinary_reports = IntDistribution::capped_poisson(0.5, 10);
    double escape_rate = 0.1;      // P(at least one escape)
    double habitual_share = 0.2;   // P(at least five | at least one)
    std::array<double, kConditionCount> condition_rates{0.25, 0.25, 0.25, 0.25, 0.25, 0.25, 0.25};
    double problematic_rate = 0.3;

    // Custody-level mix used where a task's outcome does not pin the level.
    std::map<int, double> level_shares{{2, 1324}, {3, 4741}, {4, 7699}, {5, 51}};

    // Field -> probability the value is removed after outcomes are drawn.
    std::map<std::string, double> missingness;

    // Shared Gaussian-copula factor; 0 draws every field independently.
    double correlation = 0.0;

    std::map<TaskKind, TaskTruth> truth;
    std::vector<std::string> placeholders;  // defaults not backed by reported numbers

    void validate() const;
};

// Fields accepted as keys of SynthSpec::missingness.
const std::vector<std::string>& synth_missing_fields();

SynthSpec default_spec_from_paper(Stage stage);

// Code "SYN-G<g>-P<p>" carries gravity_max g and prs_max p.
std::vector<CriminalCodeEntry> synthetic_code_table(const SynthSpec& spec);

struct SynthCohort {
    std::vector<PersonRecord> records;  // offense scores already attached
    double intercept = 0.0;             // binary tasks
    std::map<int, double> class_intercepts;
    double expected_prevalence = 0.0;   // mean model probability of class 1 (binary)
};

// Intercept that makes the mean of sigmoid(intercept + offsets) equal `target`.
double calibrate_intercept(const std::vector<double>& offsets, double target);

SynthCohort generate_cohort(const SynthSpec& spec, const ClassificationTask& task);

nlohmann::ordered_json to_json(const SynthSpec& spec);

}  // namespace pact
