#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pact/config.hpp"
#include "pact/error.hpp"
#include "pact/evaluation.hpp"
#include "pact/glm.hpp"
#include "pact/pipeline.hpp"
#include "pact/report.hpp"
#include "pact/smote.hpp"
#include "pact/synth.hpp"

namespace py = pybind11;

namespace {

pact::Dataset dataset(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> names,
                      pact::TaskKind kind) {
    if (names.empty())
        for (Eigen::Index j = 0; j < x.cols(); ++j) names.push_back("x" + std::to_string(j + 1));
    if (static_cast<Eigen::Index>(names.size()) != x.cols()) throw pact::UsageError("names must match columns of x");
    return pact::make_dataset(x, y, std::move(names), pact::ClassificationTask{kind, pact::Stage::Initial});
}

pact::FitOptions options(double tolerance, int max_iterations) {
    pact::FitOptions o;
    o.tolerance = tolerance;
    o.max_iterations = max_iterations;
    o.validate();
    return o;
}

std::string fit_binary(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> names,
                       double tolerance, int max_iterations) {
    const auto d = dataset(x, y, std::move(names), pact::TaskKind::HighVsLow);
    const auto fit = pact::fit_binary(d, options(tolerance, max_iterations));
    auto j = pact::to_json(fit);
    j["leverage_sum"] = fit.leverage.sum();
    return j.dump();
}

std::string fit_multinomial(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::vector<std::string> names,
                            std::optional<int> reference, double tolerance, int max_iterations) {
    const auto d = dataset(x, y, std::move(names), pact::TaskKind::Multinomial);
    return pact::to_json(pact::fit_multinomial(d, reference, options(tolerance, max_iterations))).dump();
}

py::tuple smote(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int k, std::uint64_t seed) {
    const auto d = dataset(x, y, {}, pact::TaskKind::HighVsLow);
    pact::ResampleConfig rc;
    rc.k_neighbors = k;
    rc.rng_seed = seed;
    const auto res = pact::smote(d, rc);
    Eigen::MatrixXd features = res.dataset.x.rightCols(res.dataset.x.cols() - 1);
    return py::make_tuple(features, res.dataset.y);
}

std::string metrics(const std::vector<int>& predicted, const std::vector<int>& truth, const std::vector<int>& classes) {
    return pact::to_json(pact::precision_recall_f1(pact::confusion(predicted, truth, classes))).dump();
}

std::string synth_cohort(const std::string& task, std::uint64_t seed, std::size_t n) {
    const auto t = pact::ClassificationTask::parse(task);
    auto spec = pact::default_spec_from_paper(t.stage);
    spec.seed = seed;
    spec.n = n;
    for (auto& [kind, truth] : spec.truth) truth.n.reset();
    std::ostringstream out;
    pact::write_cohort(out, pact::generate_cohort(spec, t).records);
    return out.str();
}

std::string run_audit(const std::string& config_text, const std::string& out_dir,
                      const std::map<std::string, std::string>& overrides) {
    pact::ConfigOverrides o(overrides.begin(), overrides.end());
    o.emplace_back("run.out", out_dir);
    std::istringstream in(config_text);
    const auto cfg = pact::parse_config(in, o);
    const auto result = pact::run_all(cfg);
    pact::write_audit(result, cfg, cfg.out_dir);
    return result.manifest.dump();
}

std::string render_report(const std::string& dir) {
    std::ostringstream out;
    pact::render_report(dir, out);
    return out.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Custody-classification audit core";
    m.attr("__version__") = pact::kToolVersion;

    auto base = py::register_exception<pact::Error>(m, "PactError", PyExc_RuntimeError);
    py::register_exception<pact::ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<pact::SeparationError>(m, "SeparationError", base.ptr());

    m.def("fit_binary", &fit_binary, py::arg("x"), py::arg("y"), py::arg("names") = std::vector<std::string>{},
          py::arg("tolerance") = 1e-8, py::arg("max_iterations") = 100);
    m.def("fit_multinomial", &fit_multinomial, py::arg("x"), py::arg("y"),
          py::arg("names") = std::vector<std::string>{}, py::arg("reference") = py::none(),
          py::arg("tolerance") = 1e-8, py::arg("max_iterations") = 100);
    m.def("smote", &smote, py::arg("x"), py::arg("y"), py::arg("k") = 5, py::arg("seed") = 0);
    m.def("metrics", &metrics, py::arg("predicted"), py::arg("truth"), py::arg("classes"));
    m.def("stratified_folds", &pact::stratified_folds, py::arg("y"), py::arg("folds"), py::arg("seed"));
    m.def("synth_cohort", &synth_cohort, py::arg("task"), py::arg("seed"), py::arg("n"));
    m.def("run_audit", &run_audit, py::arg("config_text"), py::arg("out_dir"),
          py::arg("overrides") = std::map<std::string, std::string>{});
    m.def("render_report", &render_report, py::arg("dir"));
}
