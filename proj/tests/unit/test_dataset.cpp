#include <doctest.h>

#include <sstream>

#include "pact/dataset.hpp"
#include "pact/error.hpp"
#include "pact/random.hpp"
#include "pact/table.hpp"

using namespace pact;

TEST_CASE("task ids") {
    const ClassificationTask t{TaskKind::MaxVsRegular, Stage::Reclassification};
    CHECK(t.id() == "MaxVsRegular:reclassification");
    CHECK(t.file_stem() == "MaxVsRegular_reclassification");
    CHECK(ClassificationTask::parse(t.id()) == t);
    CHECK(ClassificationTask::all().size() == 8);
    CHECK_THROWS_AS(ClassificationTask::parse("HighVsLow"), UsageError);
}

TEST_CASE("dataset helpers") {
    Eigen::MatrixXd f(4, 2);
    f << 0, 1.5, 1, 2, 0, 3, 1, 4;
    Eigen::VectorXd y(4);
    y << 0, 1, 1, 1;
    const auto d = make_dataset(f, y, {"a", "b"});
    CHECK(d.column_names() == std::vector<std::string>{"intercept", "a", "b"});
    CHECK(d.is_binary_column(1));
    CHECK_FALSE(d.is_binary_column(2));
    CHECK(d.class_counts().at(1) == 3);
    CHECK(d.drop_features({"a"}).feature_names == std::vector<std::string>{"b"});
    CHECK(d.keep_features({"b"}).cols() == 2);
    CHECK(d.select_rows({3, 0}).x(0, 2) == 4.0);
    CHECK(d.column_of("b") == 2);
}

TEST_CASE("delimited text") {
    const auto cells = split_delimited("a,\"b,c\",\"d\"\"e\"", ',');
    CHECK(cells == std::vector<std::string>{"a", "b,c", "d\"e"});
    std::ostringstream out;
    write_delimited(out, {"x", "y"}, {{"1", "a,b"}});
    std::istringstream in(out.str());
    const auto t = parse_delimited(in, ',');
    CHECK(t.rows[0][1] == "a,b");
}

TEST_CASE("rng substreams are stable") {
    Rng a(substream_seed(1, 2, 3)), b(substream_seed(1, 2, 3)), c(substream_seed(1, 2, 4));
    CHECK(a.next() == b.next());
    CHECK(a.next() != c.next());
    Rng r(9);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}
