#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pact/cohort.hpp"
#include "pact/config.hpp"
#include "pact/diagnostics.hpp"
#include "pact/evaluation.hpp"
#include "pact/glm.hpp"
#include "pact/selection.hpp"
#include "pact/smote.hpp"

namespace pact {

struct BiasRow {
    std::string feature;
    std::optional<int> cls;  // multinomial: the non-reference level this odds ratio compares
    // "estimated", "removed_separation" or "removed_constant".
    std::string status = "estimated";
    std::optional<Eigen::Index> coefficient_index;
    double coefficient = 0.0;
    double odds_ratio = 1.0;
    double ci_low = 1.0;
    double ci_high = 1.0;
    double p_value = 1.0;
    bool significant = false;
};

struct Removal {
    std::string feature;
    std::string reason;  // "constant", "separation", "collinear"
    std::string data;    // "unbalanced" or "balanced"
};

// One row per demographic feature of the task (per class for multinomial fits).
// Features missing from the inference table keep a row whose status names the removal.
std::vector<BiasRow> bias_report(const std::vector<WaldRow>& inference, const ClassificationTask& task,
                                 const std::vector<Removal>& removals = {});

struct TaskReport {
    ClassificationTask task;
    bool failed = false;
    std::string failure_stage;
    std::string failure_message;

    std::size_t n_input = 0;
    std::size_t n_complete = 0;
    std::size_t n_incomplete = 0;
    std::size_t n_conditions_imputed = 0;
    std::map<int, std::size_t> class_counts;
    std::map<std::string, std::size_t> missing_counts;
    std::vector<std::string> features;  // final feature set fitted

    bool balancing_applied = false;
    std::string balancing_note;
    std::map<int, std::size_t> counts_after;
    std::size_t synthetic_rows = 0;

    std::vector<Removal> removals;

    std::optional<FitResult> binary_fit;
    std::optional<MultinomialFit> multinomial_fit;
    std::vector<WaldRow> inference;
    std::optional<DiagnosticsReport> diagnostics;
    std::optional<EliminationTrace> elimination;
    std::optional<MetricsReport> resubstitution_training;
    std::optional<MetricsReport> resubstitution_original;
    std::optional<CvResult> cv;
    std::vector<BiasRow> bias;
    std::vector<std::string> notes;

    // Training data after balancing; kept for optional dumps.
    std::optional<Dataset> training;
};

// Records for one task: synthetic cohorts come from the task's own ground truth.
struct TaskInput {
    std::vector<PersonRecord> records;
    std::string digest;  // sha256 of the records serialized in cohort format
    std::string source;
};

TaskInput synthetic_input(const RunConfig& config, const ClassificationTask& task);

TaskReport run_task(const RunConfig& config, const ClassificationTask& task, const std::vector<PersonRecord>& records);
// Loads the data source itself.
TaskReport run_task(const RunConfig& config, const ClassificationTask& task);

struct AuditResult {
    std::vector<TaskReport> reports;
    nlohmann::ordered_json manifest;
    [[nodiscard]] bool any_failed() const;
};

AuditResult run_all(const RunConfig& config);

nlohmann::ordered_json to_json(const TaskReport& report, std::size_t top_k);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace pact
