#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pact/cohort.hpp"
#include "pact/diagnostics.hpp"
#include "pact/evaluation.hpp"
#include "pact/glm.hpp"
#include "pact/smote.hpp"
#include "pact/synth.hpp"

namespace pact {

inline constexpr const char* kConfigEnvVar = "PACT_AUDIT_CONFIG";
inline constexpr const char* kToolVersion = "0.3.0";

enum class DataSource { Synthetic, Files };

/// Everything one audit run needs. Built from a sectioned key-value file;
/// see README for the key list.
struct RunConfig {
    DataSource source = DataSource::Synthetic;
    std::filesystem::path cohort_path;
    std::filesystem::path codes_path;
    char delimiter = ',';
    SchemaMap schema = default_schema();

    std::vector<ClassificationTask> tasks = ClassificationTask::all();
    std::filesystem::path out_dir = "pact-audit-out";
    std::uint64_t seed = 20240601;
    double alpha = 0.05;

    bool smote_enabled = true;
    ResampleConfig smote;
    bool dump_resampled = false;
    double balance_threshold = 0.4;

    FitOptions fit;
    DiagnosticsConfig diagnostics;
    bool write_plots = true;

    bool cv_enabled = true;
    CvConfig cv;

    std::size_t min_features = 4;
    std::size_t top_k = 4;

    std::map<Stage, SynthSpec> synth;

    // Lines like "flag --seed overrides run.seed = 7".
    std::vector<std::string> provenance;
    // Every resolved key and value, sorted; used for the manifest.
    std::map<std::string, std::string> resolved;

    void validate() const;
};

using ConfigOverrides = std::vector<std::pair<std::string, std::string>>;  // key -> value, key "section.name"

RunConfig parse_config(std::istream& in, const ConfigOverrides& overrides = {},
                       const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});
// Defaults only, plus overrides.
RunConfig default_config(const ConfigOverrides& overrides = {});

// Every recognised "section.key" with a one-line description (wildcards shown with <...>).
const std::vector<std::pair<std::string, std::string>>& config_keys();

}  // namespace pact
