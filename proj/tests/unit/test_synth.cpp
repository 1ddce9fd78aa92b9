#include <doctest.h>

#include <cmath>
#include <sstream>

#include "pact/cohort.hpp"
#include "pact/error.hpp"
#include "pact/glm.hpp"
#include "pact/synth.hpp"

using namespace pact;

TEST_CASE("female rate concentration") {
    int ok = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        auto spec = default_spec_from_paper(Stage::Initial);
        spec.n = 10000;
        for (auto& [k, t] : spec.truth) t.n.reset();
        spec.female_rate = 0.1;
        spec.seed = s;
        const auto c = generate_cohort(spec, {TaskKind::HighVsLow, Stage::Initial});
        double f = 0;
        for (const auto& r : c.records) f += r.gender_female;
        f /= static_cast<double>(c.records.size());
        ok += (f >= 0.09 && f <= 0.11) ? 1 : 0;
    }
    CHECK(ok >= 19);
}

TEST_CASE("default prevalence for initial HighVsLow") {
    const auto spec = default_spec_from_paper(Stage::Initial);
    const auto c = generate_cohort(spec, {TaskKind::HighVsLow, Stage::Initial});
    const auto cc = complete_cases(c.records, {TaskKind::HighVsLow, Stage::Initial});
    const double prev = static_cast<double>(cc.class_counts.at(1)) / static_cast<double>(cc.dataset.rows());
    CHECK(std::abs(prev - 7750.0 / 13185.0) <= 0.02);
    CHECK(spec.truth.at(TaskKind::HighVsLow).coefficients.at("escape_hist_5") == doctest::Approx(std::log(4.01)));
    const auto re = default_spec_from_paper(Stage::Reclassification);
    CHECK(re.truth.at(TaskKind::HighVsLow).coefficients.at("re_discip_reports") == doctest::Approx(std::log(3.49)));
}

TEST_CASE("null model prevalence follows the intercept") {
    auto spec = default_spec_from_paper(Stage::Initial);
    auto& t = spec.truth[TaskKind::HighVsLow];
    t.coefficients.clear();
    t.prevalence.reset();
    t.intercept = -1.0;
    t.n = 20000;
    const auto c = generate_cohort(spec, {TaskKind::HighVsLow, Stage::Initial});
    double pos = 0;
    for (const auto& r : c.records) pos += r.custody_level >= 4;
    const double p = 1.0 / (1.0 + std::exp(1.0));
    CHECK(std::abs(pos / 20000.0 - p) < 3.0 * std::sqrt(p * (1 - p) / 20000.0) + 1e-9);
}

TEST_CASE("no missingness keeps every row; missingness drops some") {
    auto spec = default_spec_from_paper(Stage::Reclassification);
    spec.n = 3000;
    for (auto& [k, t] : spec.truth) t.n.reset();
    const ClassificationTask task{TaskKind::Multinomial, Stage::Reclassification};
    CHECK(complete_cases(generate_cohort(spec, task).records, task).dataset.rows() == 3000);
    spec.missingness["prior_commits"] = 0.2;
    const auto cc = complete_cases(generate_cohort(spec, task).records, task);
    CHECK(cc.dataset.rows() < 3000);
    CHECK(cc.dataset.rows() > 2200);
}

TEST_CASE("records satisfy invariants and round-trip") {
    auto spec = default_spec_from_paper(Stage::Initial);
    spec.n = 500;
    for (auto& [k, t] : spec.truth) t.n.reset();
    const ClassificationTask task{TaskKind::OverrideUp, Stage::Initial};
    const auto c = generate_cohort(spec, task);
    for (const auto& r : c.records) {
        CHECK(r.custody_level >= 2);
        CHECK(r.custody_level <= 5);
        CHECK_FALSE(r.disciplinary_reports.has_value());
    }
    std::ostringstream out;
    write_cohort(out, c.records);
    std::istringstream in(out.str());
    const auto back = attach_offense_scores(parse_cohort(in, default_schema()).records, synthetic_code_table(spec));
    const auto a = complete_cases(c.records, task), b = complete_cases(back, task);
    CHECK(a.dataset.x == b.dataset.x);
    CHECK(a.dataset.y == b.dataset.y);
}

TEST_CASE("intercept calibration") {
    std::vector<double> offs(1000);
    for (std::size_t i = 0; i < offs.size(); ++i) offs[i] = std::sin(static_cast<double>(i));
    const double b = calibrate_intercept(offs, 0.3);
    double m = 0;
    for (double o : offs) m += 1.0 / (1.0 + std::exp(-(b + o)));
    CHECK(m / 1000.0 == doctest::Approx(0.3).epsilon(1e-6));
}

TEST_CASE("invalid distributions are configuration errors") {
    auto spec = default_spec_from_paper(Stage::Initial);
    spec.female_rate = 1.5;
    CHECK_THROWS_AS(spec.validate(), ConfigError);
    spec = default_spec_from_paper(Stage::Initial);
    spec.race_weights = {0, 0, 0, 0, 0, 0};
    CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("deterministic given seed") {
    auto spec = default_spec_from_paper(Stage::Initial);
    spec.n = 300;
    for (auto& [k, t] : spec.truth) t.n.reset();
    const ClassificationTask task{TaskKind::Multinomial, Stage::Initial};
    std::ostringstream a, b;
    write_cohort(a, generate_cohort(spec, task).records);
    write_cohort(b, generate_cohort(spec, task).records);
    CHECK(a.str() == b.str());
}
