#include <doctest.h>

#include <sstream>

#include "pact/cohort.hpp"
#include "pact/error.hpp"

using namespace pact;

namespace {

const char* kHeader =
    "person_id,race,gender_female,age_years,marital_status,employed,offense_codes,prior_commits,"
    "institutional_adjustment,disciplinary_reports,escape_count,cond_escape_tendency,cond_alcohol,cond_drugs,"
    "cond_suicidal,cond_psychological,cond_sexual_nature,cond_aggression,problematic_offense,custody_level,"
    "override_direction,stage\n";

ParseResult parse(const std::string& body) {
    std::istringstream in(std::string(kHeader) + body);
    return parse_cohort(in, default_schema());
}

PersonRecord complete_initial() {
    PersonRecord r;
    r.person_id = "p1";
    r.race = Race::W;
    r.age_years = 30;
    r.marital = Marital::SIN;
    r.employed = true;
    r.offense_codes = {"C1"};
    r.prior_commits = 1;
    r.institutional_adjustment = 2;
    r.escape_count = 0;
    r.conditions.fill(false);
    r.problematic_offense = false;
    r.custody_level = 3;
    r.override_direction = OverrideDirection::None;
    r.gs_max = 5;
    r.prs_max = 2;
    return r;
}

double value(const FeatureVector& f, const std::string& name) {
    for (std::size_t i = 0; i < f.names.size(); ++i)
        if (f.names[i] == name) return f.values[i];
    FAIL("feature not found: " << name);
    return 0.0;
}

}  // namespace

TEST_CASE("parse_cohort maps fields directly") {
    const auto res = parse("p1,B,0,52,MAR,1,C1,2,1,,0,0,0,0,0,0,0,0,0,4,none,initial\n");
    REQUIRE(res.records.size() == 1);
    CHECK(res.records[0].race == Race::B);
    CHECK(res.records[0].age_years == 52);
    CHECK(res.records[0].custody_level == 4);
    CHECK_FALSE(res.records[0].disciplinary_reports.has_value());
}

TEST_CASE("parse_cohort drops level 1 and rejects bad levels") {
    const auto res = parse("p1,B,0,52,MAR,1,C1,2,1,,0,0,0,0,0,0,0,0,0,1,none,initial\n"
                           "p2,B,0,52,MAR,1,C1,2,1,,0,0,0,0,0,0,0,0,0,7,none,initial\n"
                           "p3,B,0,52,MAR,1,C1,2,1,,0,0,0,0,0,0,0,0,0,3,none,initial\n");
    CHECK(res.records.size() == 1);
    CHECK(res.dropped_level1 == 1);
    REQUIRE(res.rejects.size() == 1);
    CHECK(res.rejects[0].row == 2);
}

TEST_CASE("parse_cohort with header only yields nothing") {
    const auto res = parse("");
    CHECK(res.records.empty());
    CHECK(res.rejects.empty());
}

TEST_CASE("missing column is a schema error naming it") {
    std::istringstream in("person_id,race\np,W\n");
    try {
        parse_cohort(in, default_schema());
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(std::string(e.what()).find("gender_female") != std::string::npos);
    }
}

TEST_CASE("unparseable optional fields become absent") {
    const auto res = parse("p1,W,1,40,SIN,maybe,C1,x,1,,0,0,0,0,0,0,0,0,0,3,none,initial\n");
    REQUIRE(res.records.size() == 1);
    CHECK_FALSE(res.records[0].employed.has_value());
    CHECK_FALSE(res.records[0].prior_commits.has_value());
}

TEST_CASE("escape columns can be summed through the schema") {
    auto schema = default_schema();
    schema["escape_count"] = "esc_a+esc_b";
    std::istringstream in("race,gender_female,age_years,custody_level,stage,esc_a,esc_b\nW,0,30,3,initial,2,3\n");
    auto s2 = schema;
    for (auto& [k, v] : s2)
        if (k != "race" && k != "gender_female" && k != "age_years" && k != "custody_level" && k != "stage" &&
            k != "escape_count")
            v.clear();
    const auto res = parse_cohort(in, s2);
    REQUIRE(res.records.size() == 1);
    CHECK(res.records[0].escape_count == 5);
}

TEST_CASE("attach_offense_scores takes the maximum over matched codes") {
    std::vector<CriminalCodeEntry> table = {{"3926(b)", 1, 3, 0, 1}, {"A", 2, 4, 1, 2}, {"B", 5, 9, 0, 3}};
    PersonRecord a;
    a.offense_codes = {" 3926(b) "};
    PersonRecord b;
    b.offense_codes = {"A", "B"};
    PersonRecord c;
    c.offense_codes = {"ZZZ"};
    const auto out = attach_offense_scores({a, b, c}, table);
    CHECK(out[0].gs_max == 3);
    CHECK(out[1].gs_max == 9);
    CHECK(out[1].prs_max == 3);
    CHECK_FALSE(out[2].gs_max.has_value());
}

TEST_CASE("adding an offense never lowers the scores") {
    std::vector<CriminalCodeEntry> table = {{"A", 2, 4, 1, 2}, {"B", 1, 1, 0, 0}};
    PersonRecord a;
    a.offense_codes = {"A"};
    PersonRecord b = a;
    b.offense_codes.push_back("B");
    const auto out = attach_offense_scores({a, b}, table);
    CHECK(*out[1].gs_max >= *out[0].gs_max);
    CHECK(*out[1].prs_max >= *out[0].prs_max);
}

TEST_CASE("duplicate code keys are a configuration error") {
    std::vector<CriminalCodeEntry> table = {{"A", 1, 2, 0, 0}, {"A", 1, 3, 0, 0}};
    CHECK_THROWS_AS(attach_offense_scores({}, table), ConfigError);
}

TEST_CASE("code table rejects inverted ranges") {
    std::istringstream in("code,gravity_min,gravity_max,prs_min,prs_max\nA,5,3,0,1\n");
    CHECK_THROWS_AS(parse_code_table(in), ConfigError);
}

TEST_CASE("reduce_escape_history") {
    CHECK(reduce_escape_history(0).ever == 0);
    CHECK(reduce_escape_history(0).habitual == 0);
    CHECK(reduce_escape_history(2).ever == 1);
    CHECK(reduce_escape_history(2).habitual == 0);
    CHECK(reduce_escape_history(5).ever == 1);
    CHECK(reduce_escape_history(5).habitual == 1);
}

TEST_CASE("count_problematic_conditions") {
    PersonRecord r;
    r.conditions.fill(false);
    r.conditions[static_cast<std::size_t>(Condition::Drugs)] = true;
    r.conditions[static_cast<std::size_t>(Condition::Alcohol)] = true;
    CHECK(count_problematic_conditions(r).count == 2);
    CHECK_FALSE(count_problematic_conditions(r).imputed);
    r.conditions.fill(true);
    CHECK(count_problematic_conditions(r).count == 7);
    PersonRecord blank;
    CHECK(count_problematic_conditions(blank).count == 0);
    CHECK(count_problematic_conditions(blank).imputed);
}

TEST_CASE("problematic offense statutes") {
    CHECK(is_problematic_offense_code("2501"));
    CHECK(is_problematic_offense_code("18 2502(a)"));
    CHECK(is_problematic_offense_code("3121"));
    CHECK(is_problematic_offense_code("901-2501"));
    CHECK_FALSE(is_problematic_offense_code("3926(b)"));
}

TEST_CASE("encode_features follows the variable definitions") {
    const ClassificationTask task{TaskKind::HighVsLow, Stage::Initial};
    auto r = complete_initial();
    r.age_years = 52;
    auto e = encode_features(r, task);
    REQUIRE(e.features);
    CHECK(value(*e.features, "age_gt_45") == 1.0);
    CHECK(value(*e.features, "age_lt_25") == 0.0);

    r.age_years = 30;
    e = encode_features(r, task);
    for (const auto& f : demographic_feature_names()) CHECK(value(*e.features, f) == 0.0);
    for (const char* m : {"mrt_stat_DIV", "mrt_stat_SEP", "mrt_stat_MAR", "mrt_stat_WID"})
        CHECK(value(*e.features, m) == 0.0);

    for (int age : {24, 25, 45, 46}) {
        r.age_years = age;
        e = encode_features(r, task);
        CHECK(value(*e.features, "age_lt_25") == (age < 25 ? 1.0 : 0.0));
        CHECK(value(*e.features, "age_gt_45") == (age > 45 ? 1.0 : 0.0));
    }
}

TEST_CASE("encode_features stage rules") {
    auto r = complete_initial();
    CHECK_THROWS_AS(encode_features(r, {TaskKind::HighVsLow, Stage::Reclassification}), UsageError);
    r.stage = Stage::Reclassification;
    r.disciplinary_reports.reset();
    const auto e = encode_features(r, {TaskKind::HighVsLow, Stage::Reclassification});
    CHECK_FALSE(e.features.has_value());
    const auto names = task_feature_names({TaskKind::HighVsLow, Stage::Reclassification});
    CHECK(std::find(names.begin(), names.end(), "ic_institut_adj") == names.end());
    CHECK(std::find(names.begin(), names.end(), "re_discip_reports") != names.end());
}

TEST_CASE("override features only in OverrideUp") {
    const auto o = task_feature_names({TaskKind::OverrideUp, Stage::Initial});
    const auto h = task_feature_names({TaskKind::HighVsLow, Stage::Initial});
    CHECK(std::find(o.begin(), o.end(), "problematic_conditions") != o.end());
    CHECK(std::find(h.begin(), h.end(), "problematic_conditions") == h.end());
    CHECK(all_feature_names().size() == 22);
}

TEST_CASE("complete_cases filters and maps outcomes") {
    const ClassificationTask task{TaskKind::HighVsLow, Stage::Initial};
    std::vector<PersonRecord> rs;
    for (int level : {2, 3, 4, 5}) {
        auto r = complete_initial();
        r.custody_level = level;
        rs.push_back(r);
    }
    auto bad = complete_initial();
    bad.gs_max.reset();
    rs.push_back(bad);
    const auto cc = complete_cases(rs, task);
    CHECK(cc.dataset.rows() == 4);
    CHECK(cc.n_incomplete == 1);
    CHECK(cc.dataset.y[0] == 0.0);
    CHECK(cc.dataset.y[1] == 0.0);
    CHECK(cc.dataset.y[2] == 1.0);
    CHECK(cc.dataset.y[3] == 1.0);
    CHECK((cc.dataset.x.col(0).array() == 1.0).all());
    CHECK(cc.dataset.x.allFinite());
}

TEST_CASE("complete_cases names the empty class") {
    std::vector<PersonRecord> rs(3, complete_initial());
    try {
        complete_cases(rs, {TaskKind::MaxVsRegular, Stage::Initial});
        FAIL("expected DegenerateTaskError");
    } catch (const DegenerateTaskError& e) {
        CHECK_FALSE(e.class_name.empty());
    }
}

TEST_CASE("write_cohort round-trips through parse_cohort") {
    auto r = complete_initial();
    r.race = Race::H;
    r.marital = Marital::WID;
    r.offense_codes = {"A", "B"};
    r.escape_count = 6;
    std::ostringstream out;
    write_cohort(out, {r});
    std::istringstream in(out.str());
    const auto res = parse_cohort(in, default_schema());
    REQUIRE(res.records.size() == 1);
    const auto& p = res.records[0];
    CHECK(p.race == Race::H);
    CHECK(p.marital == Marital::WID);
    CHECK(p.offense_codes == r.offense_codes);
    CHECK(p.escape_count == 6);
    CHECK(p.institutional_adjustment == r.institutional_adjustment);
}
