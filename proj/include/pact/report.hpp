#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "pact/config.hpp"
#include "pact/pipeline.hpp"

namespace pact {

/// Writes <out>/manifest.json, <out>/<task stem>.json per task, plot data under
/// <out>/plots/<task stem>/ and, when configured, resampled training data
/// under <out>/resampled/. Returns the files written.
std::vector<std::filesystem::path> write_audit(const AuditResult& result, const RunConfig& config,
                                               const std::filesystem::path& out_dir);

// Text summary of an audit directory. Throws UsageError listing absent files.
void render_report(const std::filesystem::path& dir, std::ostream& out);

// Serialized JSON as written to disk (two-space indent, trailing newline).
std::string dump_json(const nlohmann::ordered_json& j);

}  // namespace pact
