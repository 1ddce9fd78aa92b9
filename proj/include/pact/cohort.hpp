#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pact/dataset.hpp"

namespace pact {

enum class Race { W, B, A, H, I, O };
enum class Marital { SIN, MAR, DIV, SEP, WID, Unknown };
enum class OverrideDirection { Up, None, Down };

// Order matches the seven treatment-need histories counted into problematic_conditions.
enum class Condition { EscapeTendency, Alcohol, Drugs, Suicidal, Psychological, SexualNature, Aggression };
inline constexpr std::size_t kConditionCount = 7;

std::string_view to_string(Race r);
std::string_view to_string(Marital m);
std::string_view to_string(OverrideDirection o);

/// One person's raw attributes at a classification event.
struct PersonRecord {
    std::string person_id;
    Race race = Race::W;
    bool gender_female = false;
    int age_years = 0;
    Marital marital = Marital::Unknown;
    std::optional<bool> employed;
    std::vector<std::string> offense_codes;
    std::optional<int> prior_commits;
    std::optional<double> institutional_adjustment;  // initial stage only
    std::optional<int> disciplinary_reports;         // reclassification stage only
    std::optional<int> escape_count;
    std::array<std::optional<bool>, kConditionCount> conditions{};
    std::optional<bool> problematic_offense;
    int custody_level = 2;
    std::optional<OverrideDirection> override_direction;
    Stage stage = Stage::Initial;

    // Filled by attach_offense_scores.
    std::optional<int> gs_max;
    std::optional<int> prs_max;
};

struct CriminalCodeEntry {
    std::string code;
    int gravity_min = 0;
    int gravity_max = 0;
    int prs_min = 0;
    int prs_max = 0;
};

// Logical field -> column spec. An empty spec leaves the field unmapped.
// escape_count accepts "colA+colB+..." to sum several raw escape columns.
using SchemaMap = std::map<std::string, std::string>;

// Every logical field mapped to a column of the same name.
SchemaMap default_schema();
const std::vector<std::string>& schema_fields();

struct RejectedRow {
    std::size_t row = 0;  // 1-based data row number (header excluded)
    std::string reason;
};

struct ParseResult {
    std::vector<PersonRecord> records;
    std::vector<RejectedRow> rejects;
    std::size_t rows_read = 0;
    std::size_t dropped_level1 = 0;
};

ParseResult parse_cohort(const std::filesystem::path& path, const SchemaMap& schema, char delim = ',');
ParseResult parse_cohort(std::istream& in, const SchemaMap& schema, char delim = ',');

// Writes records with the default schema columns; parse_cohort reads it back.
void write_cohort(std::ostream& out, const std::vector<PersonRecord>& records, char delim = ',');
void write_rejects(std::ostream& out, const std::vector<RejectedRow>& rejects, char delim = ',');

std::vector<CriminalCodeEntry> read_code_table(const std::filesystem::path& path, char delim = ',');
std::vector<CriminalCodeEntry> parse_code_table(std::istream& in, char delim = ',');
void write_code_table(std::ostream& out, const std::vector<CriminalCodeEntry>& table, char delim = ',');

/// Resolves gs_max and prs_max as the maximum over each person's matched
/// offense codes. Unmatched people keep both scores absent.
std::vector<PersonRecord> attach_offense_scores(std::vector<PersonRecord> records,
                                                const std::vector<CriminalCodeEntry>& table);

struct EscapeHistory {
    int ever = 0;       // escape_hist_1
    int habitual = 0;   // escape_hist_5
};
EscapeHistory reduce_escape_history(int escape_count);

struct ConditionCount {
    int count = 0;
    bool imputed = false;  // at least one flag was absent and counted as false
};
ConditionCount count_problematic_conditions(const PersonRecord& record);

// Statute-list check for offenses treated as problematic in override decisions:
// homicide and murder, manslaughter, kidnapping, sex offenses other than
// prostitution, and attempt/solicitation/conspiracy to commit any of these.
bool is_problematic_offense_code(std::string_view code);

// All 22 encoded variable names in canonical order.
const std::vector<std::string>& all_feature_names();
// Subset used by a task at its stage, in canonical order.
std::vector<std::string> task_feature_names(const ClassificationTask& task);
// gender_female, age_gt_45, age_lt_25 and the five race indicators.
const std::vector<std::string>& demographic_feature_names();
bool is_indicator_feature(std::string_view name);

struct FeatureVector {
    std::vector<std::string> names;
    std::vector<double> values;
};

struct EncodedRecord {
    std::optional<FeatureVector> features;  // absent when incomplete
    std::vector<std::string> missing;       // fields that made the record incomplete
    bool conditions_imputed = false;
    std::optional<int> outcome;
};

// Outcome label for a task: 0/1 for binary kinds, the level for multinomial.
std::optional<int> outcome_label(const PersonRecord& record, TaskKind kind);

EncodedRecord encode_features(const PersonRecord& record, const ClassificationTask& task);

struct CompleteCaseResult {
    Dataset dataset;
    std::size_t n_input = 0;
    std::size_t n_incomplete = 0;
    std::size_t n_conditions_imputed = 0;
    std::map<int, std::size_t> class_counts;
    std::map<std::string, std::size_t> missing_counts;
};

// Expected outcome classes for a task kind.
std::vector<int> task_classes(TaskKind kind);

CompleteCaseResult complete_cases(const std::vector<PersonRecord>& records, const ClassificationTask& task);
CompleteCaseResult complete_cases(const std::vector<EncodedRecord>& encoded, const ClassificationTask& task);

}  // namespace pact
