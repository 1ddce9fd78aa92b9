#include <doctest.h>

#include "helpers.hpp"
#include "pact/error.hpp"
#include "pact/selection.hpp"

using namespace pact;

TEST_CASE("noise feature eliminated before signal") {
    int ok = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto d = testutil::logistic_data(s, 5000, Eigen::Vector3d(0.0, 1.5, 0.0));
        const auto t = recursive_eliminate(d, 1, {});
        ok += (t.steps.size() == 1 && t.steps[0].feature == "x2") ? 1 : 0;
    }
    CHECK(ok >= 19);
}

TEST_CASE("min_features p-1 gives one round; rounds increase") {
    const auto d = testutil::logistic_data(4, 1000, Eigen::Vector4d(0.0, 1.0, 0.5, 0.2));
    CHECK(recursive_eliminate(d, 2, {}).steps.size() == 1);
    const auto t = recursive_eliminate(d, 1, {});
    REQUIRE(t.steps.size() == 2);
    CHECK(t.steps[0].round < t.steps[1].round);
    CHECK(t.importance.size() == 3);
    CHECK(t.importance.front() == t.survivors.front());
}

TEST_CASE("importance report ordering and bounds") {
    EliminationTrace t;
    t.steps = {{1, "x2", 0.1, -1.0}, {2, "x3", 0.2, -1.0}};
    t.survivors = {"x1"};
    t.survivor_criteria = {1.0};
    t.importance = {"x1", "x3", "x2"};
    const auto rep = importance_report(t, 2);
    REQUIRE(rep.features.size() == 2);
    CHECK(rep.features[0].feature == "x1");
    CHECK(rep.features[1].feature == "x3");
    CHECK(importance_report(t, 0).features.empty());
    CHECK(importance_report(t, 10).note.has_value());
    CHECK_THROWS_AS(importance_report(EliminationTrace{}, 1), UsageError);
}

TEST_CASE("exact criterion tie eliminates alphabetically first") {
    // Two features with mirrored data produce identical |beta| * sd.
    Eigen::MatrixXd f(400, 2);
    Eigen::VectorXd y(400);
    for (int i = 0; i < 400; ++i) {
        const int a = i % 2, b = (i / 2) % 2;
        f(i, 0) = a;
        f(i, 1) = b;
        // Symmetric outcome table in a and b.
        const int k = (i / 4) % 10;
        y[i] = (a + b == 2) ? (k < 7) : (a + b == 1) ? (k < 5) : (k < 3);
    }
    const auto t = recursive_eliminate(make_dataset(f, y, {"b", "a"}), 1, {});
    REQUIRE(t.steps.size() == 1);
    CHECK(t.steps[0].feature == "a");
}

TEST_CASE("rescaling a column leaves elimination order unchanged") {
    auto d = testutil::logistic_data(12, 2000, Eigen::Vector4d(0.0, 1.0, 0.3, 0.6));
    const auto before = recursive_eliminate(d, 1, {});
    d.x.col(2) *= 37.0;
    const auto after = recursive_eliminate(d, 1, {});
    REQUIRE(before.steps.size() == after.steps.size());
    for (std::size_t i = 0; i < before.steps.size(); ++i) CHECK(before.steps[i].feature == after.steps[i].feature);
}

TEST_CASE("fit failure mid-trace returns a partial trace") {
    Eigen::MatrixXd f(60, 2);
    Eigen::VectorXd y(60);
    Rng rng(1);
    for (int i = 0; i < 60; ++i) {
        y[i] = i % 2;
        f(i, 0) = y[i];
        f(i, 1) = rng.normal();
    }
    const auto t = recursive_eliminate(make_dataset(f, y, {"leak", "n"}), 1, {});
    CHECK(t.diagnostic.has_value());
}
