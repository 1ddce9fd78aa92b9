#include "pact/report.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "pact/error.hpp"
#include "pact/table.hpp"

namespace pact {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

namespace {

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << text;
}

void write_dataset(const fs::path& path, const Dataset& d) {
    Table t;
    t.header = d.feature_names;
    t.header.push_back("outcome");
    for (Eigen::Index i = 0; i < d.rows(); ++i) {
        std::vector<std::string> row;
        for (Eigen::Index j = 1; j < d.cols(); ++j) row.push_back(format_number(d.x(i, j)));
        row.push_back(format_number(d.y[i]));
        t.rows.push_back(std::move(row));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    write_delimited(out, t.header, t.rows);
}

json read_json(const fs::path& path) {
    std::ifstream in(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw UsageError("cannot parse " + path.string() + ": " + e.what());
    }
}

std::string fixed(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string num(const json& v, int digits = 3) {
    return v.is_number() ? fixed(v.get<double>(), digits) : std::string("n/a");
}

void render_metrics(const json& m, const std::string& label, std::ostream& out) {
    out << "  " << label << ": accuracy " << num(m["accuracy"]) << ", weighted precision "
        << num(m["weighted"]["precision"]) << ", recall " << num(m["weighted"]["recall"]) << ", F1 "
        << num(m["weighted"]["f1"]) << "\n";
}

void render_task(const json& t, std::ostream& out) {
    out << "== " << t.value("task", std::string("?")) << " ==\n";
    const auto& d = t["data"];
    out << "  complete cases: " << d.value("n_complete", 0) << " of " << d.value("n_input", 0) << "; classes";
    for (const auto& [cls, n] : d["class_counts"].items()) out << " " << cls << "=" << n.get<long>();
    out << "\n";
    if (t.contains("balancing")) out << "  balancing: " << t["balancing"].value("note", std::string()) << "\n";
    for (const auto& r : t["removed_features"])
        out << "  removed " << r["feature"].get<std::string>() << " (" << r["reason"].get<std::string>() << ", "
            << r["detected_on"].get<std::string>() << " data)\n";
    if (t.value("status", std::string()) == "failed") {
        out << "  FAILED at stage " << t["failure"]["stage"].get<std::string>() << ": "
            << t["failure"]["message"].get<std::string>() << "\n\n";
        return;
    }
    if (t.contains("metrics")) {
        const auto& m = t["metrics"];
        if (m.contains("resubstitution_training")) render_metrics(m["resubstitution_training"], "training fit", out);
        if (m.contains("resubstitution_original")) render_metrics(m["resubstitution_original"], "original data", out);
        if (m.contains("cross_validation")) {
            const auto& cv = m["cross_validation"];
            out << "  cross-validation (" << cv.value("folds", 0) << " folds x " << cv.value("repeats", 0)
                << "): accuracy " << num(cv["mean_accuracy"]) << " +- " << num(cv["sd_accuracy"]) << "\n";
        }
    }
    if (t.contains("feature_selection")) {
        out << "  top features:";
        for (const auto& f : t["feature_selection"]["top_features"]) out << " " << f["feature"].get<std::string>();
        out << "\n";
    }
    out << "  bias table (odds ratio [95% CI], * p < alpha):\n";
    char line[160];
    for (const auto& b : t["bias"]) {
        std::string name = b["feature"].get<std::string>();
        if (b.contains("class")) name += " @" + std::to_string(b["class"].get<int>());
        if (b.contains("odds_ratio")) {
            std::snprintf(line, sizeof line, "    %-22s %8s [%s, %s] %s\n", name.c_str(), num(b["odds_ratio"]).c_str(),
                          num(b["ci_low"]).c_str(), num(b["ci_high"]).c_str(),
                          b.value("significant", false) ? "*" : "");
        } else {
            std::snprintf(line, sizeof line, "    %-22s %s\n", name.c_str(), b["status"].get<std::string>().c_str());
        }
        out << line;
    }
    out << "\n";
}

}  // namespace

std::vector<fs::path> write_audit(const AuditResult& result, const RunConfig& config, const fs::path& out_dir) {
    std::vector<fs::path> written;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create " + out_dir.string() + ": " + ec.message());
    for (const auto& r : result.reports) {
        const auto stem = r.task.file_stem();
        const auto path = out_dir / (stem + ".json");
        write_text(path, dump_json(to_json(r, config.top_k)));
        written.push_back(path);
        if (config.write_plots && r.diagnostics) {
            const auto dir = out_dir / "plots" / stem;
            fs::create_directories(dir);
            write_plot_data(*r.diagnostics, dir);
            written.push_back(dir);
        }
        if (config.dump_resampled && r.training) {
            fs::create_directories(out_dir / "resampled");
            const auto p = out_dir / "resampled" / (stem + ".csv");
            write_dataset(p, *r.training);
            written.push_back(p);
        }
    }
    const auto manifest = out_dir / "manifest.json";
    write_text(manifest, dump_json(result.manifest));
    written.push_back(manifest);
    return written;
}

void render_report(const fs::path& dir, std::ostream& out) {
    if (!fs::is_directory(dir)) throw UsageError("report directory not found: " + dir.string());
    const auto manifest_path = dir / "manifest.json";
    if (!fs::exists(manifest_path)) throw UsageError("missing files in " + dir.string() + ": manifest.json");
    const json manifest = read_json(manifest_path);
    std::vector<std::string> missing;
    std::vector<json> tasks;
    for (const auto& t : manifest["tasks"]) {
        const auto file = t["file"].get<std::string>();
        if (!fs::exists(dir / file)) missing.push_back(file);
        else tasks.push_back(read_json(dir / file));
    }
    if (!missing.empty()) {
        std::string msg = "missing files in " + dir.string() + ":";
        for (const auto& m : missing) msg += " " + m;
        throw UsageError(msg);
    }
    out << "pact-audit report " << manifest.value("version", std::string()) << ", " << tasks.size()
        << " task(s), data source " << manifest["data"].value("source", std::string()) << "\n\n";
    for (const auto& t : tasks) render_task(t, out);
}

}  // namespace pact
