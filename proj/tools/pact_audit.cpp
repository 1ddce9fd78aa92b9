#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pact/config.hpp"
#include "pact/error.hpp"
#include "pact/pipeline.hpp"
#include "pact/report.hpp"
#include "pact/synth.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitTask = 2;

struct Flags {
    std::string config;
    std::optional<std::string> tasks;
    std::optional<std::string> seed;
    std::optional<std::string> out;
    std::optional<std::string> smote_k;
    std::optional<std::string> cv_repeats;
    std::optional<std::string> threshold_corr;
    bool verbose = false;
};

pact::RunConfig resolve(const Flags& f) {
    pact::ConfigOverrides o;
    auto add = [&](const char* key, const std::optional<std::string>& v) {
        if (v) o.emplace_back(key, *v);
    };
    add("run.tasks", f.tasks);
    add("run.seed", f.seed);
    add("run.out", f.out);
    add("smote.k", f.smote_k);
    add("cv.repeats", f.cv_repeats);
    add("diagnostics.threshold_corr", f.threshold_corr);
    auto cfg = f.config.empty() ? pact::default_config(o) : pact::load_config(f.config, o);
    for (const auto& line : cfg.provenance) std::cerr << "pact-audit: " << line << "\n";
    return cfg;
}

std::string counts_line(const std::map<int, std::size_t>& counts) {
    std::string s;
    for (const auto& [c, n] : counts) s += " " + std::to_string(c) + "=" + std::to_string(n);
    return s;
}

int cmd_ingest(const Flags& f) {
    const auto cfg = resolve(f);
    if (cfg.source != pact::DataSource::Files) throw pact::ConfigError("ingest needs data.source = files");
    const auto parsed = pact::parse_cohort(cfg.cohort_path, cfg.schema, cfg.delimiter);
    const auto table = pact::read_code_table(cfg.codes_path, cfg.delimiter);
    const auto records = pact::attach_offense_scores(parsed.records, table);
    std::filesystem::create_directories(cfg.out_dir);
    const auto rejects_path = cfg.out_dir / "rejects.csv";
    {
        std::ofstream out(rejects_path);
        if (!out) throw pact::ConfigError("cannot write " + rejects_path.string());
        pact::write_rejects(out, parsed.rejects, cfg.delimiter);
    }
    std::cout << "rows read: " << parsed.rows_read << "\nrecords kept: " << parsed.records.size()
              << "\nrejected: " << parsed.rejects.size() << " (" << rejects_path.string() << ")"
              << "\nlevel-1 rows dropped: " << parsed.dropped_level1 << "\n";
    for (const auto& task : cfg.tasks) {
        std::vector<pact::PersonRecord> stage;
        for (const auto& r : records)
            if (r.stage == task.stage) stage.push_back(r);
        try {
            const auto cc = pact::complete_cases(stage, task);
            std::cout << task.id() << ": N = " << cc.dataset.rows() << " of " << cc.n_input << ", classes"
                      << counts_line(cc.class_counts) << "\n";
        } catch (const pact::DegenerateTaskError& e) {
            std::cout << task.id() << ": warning: degenerate task, " << e.what() << "\n";
        }
    }
    return kExitOk;
}

int cmd_synth(const Flags& f) {
    const auto cfg = resolve(f);
    const auto dir = cfg.out_dir / "synthetic";
    std::filesystem::create_directories(dir);
    for (const auto& [stage, spec] : cfg.synth) {
        const auto path = dir / ("codes_" + std::string(pact::to_string(stage)) + ".csv");
        std::ofstream out(path);
        pact::write_code_table(out, pact::synthetic_code_table(spec));
        std::ofstream js(dir / ("spec_" + std::string(pact::to_string(stage)) + ".json"));
        js << pact::dump_json(pact::to_json(spec));
    }
    for (const auto& task : cfg.tasks) {
        const auto in = pact::synthetic_input(cfg, task);
        const auto path = dir / (task.file_stem() + "_cohort.csv");
        std::ofstream out(path);
        pact::write_cohort(out, in.records);
        std::cout << path.string() << ": " << in.records.size() << " rows, sha256 " << in.digest << "\n";
    }
    return kExitOk;
}

int cmd_fit(const Flags& f) {
    auto cfg = resolve(f);
    cfg.cv_enabled = false;
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    bool failed = false;
    for (const auto& task : cfg.tasks) {
        const auto rep = pact::run_task(cfg, task);
        failed = failed || rep.failed;
        auto j = pact::to_json(rep, cfg.top_k);
        nlohmann::ordered_json slim;
        for (const char* key : {"task", "status", "failure", "data", "balancing", "removed_features", "model", "bias"})
            if (j.contains(key)) slim[key] = j[key];
        out.push_back(slim);
    }
    std::cout << pact::dump_json(out);
    return failed ? kExitTask : kExitOk;
}

int cmd_audit(const Flags& f) {
    const auto cfg = resolve(f);
    const auto result = pact::run_all(cfg);
    const auto written = pact::write_audit(result, cfg, cfg.out_dir);
    for (const auto& r : result.reports) {
        std::cerr << r.task.id() << ": " << (r.failed ? "FAILED at " + r.failure_stage + ": " + r.failure_message : "ok")
                  << "\n";
    }
    std::cout << "wrote " << written.size() << " outputs to " << cfg.out_dir.string() << "\n";
    return result.any_failed() ? kExitTask : kExitOk;
}

int cmd_report(const Flags& f, const std::string& dir) {
    std::filesystem::path path = dir;
    if (path.empty()) path = resolve(f).out_dir;
    pact::render_report(path, std::cout);
    return kExitOk;
}

std::string config_key_footer() {
    std::string s = "\nConfiguration keys (sectioned key = value file; [section] then key):\n";
    for (const auto& [key, desc] : pact::config_keys()) s += "  " + key + "\n      " + desc + "\n";
    s += "\nExit codes: 0 success, 1 configuration or schema error, 2 task failure.\n";
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Audit custody-classification models: ingest, synthesize, fit, audit, report."};
    app.require_subcommand(1, 1);
    app.fallthrough();
    app.footer(config_key_footer());

    Flags f;
    app.add_option("--config", f.config, "Config file path")->envname(pact::kConfigEnvVar);
    app.add_option("--tasks", f.tasks, "Tasks to run, 'all' or Kind:stage list (config: run.tasks)");
    app.add_option("--seed", f.seed, "Master seed (config: run.seed)");
    app.add_option("--out", f.out, "Output directory (config: run.out)");
    app.add_option("--smote-k", f.smote_k, "SMOTE neighbours (config: smote.k)");
    app.add_option("--cv-repeats", f.cv_repeats, "Cross-validation repeats (config: cv.repeats)");
    app.add_option("--threshold-corr", f.threshold_corr, "Collinearity threshold (config: diagnostics.threshold_corr)");
    app.add_flag("-v,--verbose", f.verbose, "Print the resolved configuration");

    auto* ingest = app.add_subcommand("ingest", "Validate a cohort file and print complete-case counts per task");
    auto* synth = app.add_subcommand("synth", "Write synthetic cohorts and code tables");
    auto* fit = app.add_subcommand("fit", "Fit each task and print coefficients and bias tables as JSON");
    auto* audit = app.add_subcommand("audit", "Run the full audit and write the report directory");
    auto* report = app.add_subcommand("report", "Render a report directory as text");
    std::string report_dir;
    report->add_option("dir", report_dir, "Report directory (default: run.out)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (f.verbose) {
            const auto cfg = resolve(f);
            for (const auto& [k, v] : cfg.resolved) std::cerr << "  " << k << " = " << v << "\n";
        }
        if (ingest->parsed()) return cmd_ingest(f);
        if (synth->parsed()) return cmd_synth(f);
        if (fit->parsed()) return cmd_fit(f);
        if (audit->parsed()) return cmd_audit(f);
        if (report->parsed()) return cmd_report(f, report_dir);
    } catch (const pact::Error& e) {
        std::cerr << "pact-audit: error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "pact-audit: error: " << e.what() << "\n";
        return kExitConfig;
    }
    return kExitConfig;
}
