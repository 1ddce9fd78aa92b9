#include <doctest.h>

#include <sstream>

#include "pact/config.hpp"
#include "pact/error.hpp"

using namespace pact;

namespace {
RunConfig parse(const std::string& text, const ConfigOverrides& o = {}) {
    std::istringstream in(text);
    return parse_config(in, o);
}
}  // namespace

TEST_CASE("defaults") {
    const auto c = default_config();
    CHECK(c.tasks.size() == 8);
    CHECK(c.smote.k_neighbors == 5);
    CHECK(c.cv.folds == 10);
    CHECK(c.cv.repeats == 10);
    CHECK(c.balance_threshold == 0.4);
    CHECK(c.diagnostics.correlation_threshold == 0.3);
    CHECK(c.source == DataSource::Synthetic);
}

TEST_CASE("sections and task filtering") {
    const auto c = parse("[run]\ntasks = HighVsLow:initial\nseed = 7\n[smote]\nk = 3\n[cv]\nrepeats = 2\n"
                         "[diagnostics]\nthreshold_corr = 0.25\n[fit]\nfull_hessian = false\n");
    REQUIRE(c.tasks.size() == 1);
    CHECK(c.tasks[0].id() == "HighVsLow:initial");
    CHECK(c.seed == 7);
    CHECK(c.smote.k_neighbors == 3);
    CHECK(c.cv.repeats == 2);
    CHECK(c.diagnostics.correlation_threshold == 0.25);
    CHECK_FALSE(c.fit.full_hessian);
}

TEST_CASE("overrides win and are logged") {
    const auto c = parse("[run]\nseed = 7\n", {{"run.seed", "9"}});
    CHECK(c.seed == 9);
    REQUIRE(c.provenance.size() == 1);
    CHECK(c.provenance[0].find("run.seed") != std::string::npos);
}

TEST_CASE("derived seeds follow the master seed") {
    const auto a = parse("[run]\nseed = 1\n"), b = parse("[run]\nseed = 2\n");
    CHECK(a.smote.rng_seed != b.smote.rng_seed);
    CHECK(a.cv.seed != b.cv.seed);
    CHECK(parse("[smote]\nseed = 5\n").smote.rng_seed == 5);
}

TEST_CASE("synthetic sections") {
    const auto c = parse("[synth]\nn = 1234\nfemale_rate = 0.2\nmissing.employed = 0.1\n"
                         "[synth.HighVsLow:initial]\nprevalence = 0.5\ncoef.race_B = 0.7\n"
                         "[synth.Multinomial:reclassification]\nshare.5 = 0.1\ncoef.3.age_gt_45 = -1\n");
    const auto& s = c.synth.at(Stage::Initial);
    CHECK(s.n == 1234);
    CHECK(s.female_rate == 0.2);
    CHECK(s.missingness.at("employed") == 0.1);
    CHECK(s.truth.at(TaskKind::HighVsLow).prevalence == 0.5);
    CHECK(s.truth.at(TaskKind::HighVsLow).coefficients.at("race_B") == 0.7);
    const auto& r = c.synth.at(Stage::Reclassification).truth.at(TaskKind::Multinomial);
    CHECK(r.class_shares.at(5) == 0.1);
    CHECK(r.class_coefficients.at(3).at("age_gt_45") == -1.0);
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(parse("[run]\nbogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[run]\nseed = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse("[run]\ntasks = Nope:initial\n"), ConfigError);
    CHECK_THROWS_AS(parse("[data]\nsource = files\n"), ConfigError);
    CHECK_THROWS_AS(parse("[cv]\nfolds = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[schema]\nnot_a_field = x\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/pact.ini"), ConfigError);
}

TEST_CASE("every flag key is documented") {
    const auto& keys = config_keys();
    for (const char* k : {"run.tasks", "run.seed", "run.out", "smote.k", "cv.repeats", "diagnostics.threshold_corr"}) {
        bool found = false;
        for (const auto& [key, desc] : keys) found = found || key == k;
        CHECK_MESSAGE(found, k);
    }
}
