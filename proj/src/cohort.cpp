#include "pact/cohort.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "pact/error.hpp"
#include "pact/table.hpp"

namespace pact {

namespace {

constexpr std::array<const char*, kConditionCount> kConditionFields = {
    "cond_escape_tendency", "cond_alcohol",       "cond_drugs",      "cond_suicidal",
    "cond_psychological",   "cond_sexual_nature", "cond_aggression",
};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

bool is_missing_token(std::string_view v) {
    const auto l = lower(v);
    return l.empty() || l == "na" || l == "n/a" || l == "null" || l == "." || l == "nan";
}

template <class T>
std::optional<T> parse_number(std::string_view v) {
    v = trim(v);
    if (is_missing_token(v)) return std::nullopt;
    T out{};
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || ptr != end) return std::nullopt;
    return out;
}

std::optional<int> parse_count(std::string_view v) {
    auto n = parse_number<int>(v);
    if (!n || *n < 0) return std::nullopt;
    return n;
}

std::optional<bool> parse_bool(std::string_view v) {
    const auto l = lower(trim(v));
    if (l == "1" || l == "true" || l == "t" || l == "yes" || l == "y") return true;
    if (l == "0" || l == "false" || l == "f" || l == "no" || l == "n") return false;
    return std::nullopt;
}

std::optional<bool> parse_gender_female(std::string_view v) {
    const auto l = lower(trim(v));
    if (l == "female") return true;
    if (l == "m" || l == "male") return false;
    if (l == "f") return true;  // as a sex code, not a boolean
    return parse_bool(l);
}

std::optional<Race> parse_race(std::string_view v) {
    const auto l = lower(trim(v));
    if (l == "w") return Race::W;
    if (l == "b") return Race::B;
    if (l == "a") return Race::A;
    if (l == "h") return Race::H;
    if (l == "i") return Race::I;
    if (l == "o") return Race::O;
    return std::nullopt;
}

Marital parse_marital(std::string_view v) {
    const auto l = lower(trim(v));
    if (l == "sin") return Marital::SIN;
    if (l == "mar") return Marital::MAR;
    if (l == "div") return Marital::DIV;
    if (l == "sep") return Marital::SEP;
    if (l == "wid") return Marital::WID;
    return Marital::Unknown;
}

std::optional<OverrideDirection> parse_override(std::string_view v) {
    const auto l = lower(trim(v));
    if (l == "up") return OverrideDirection::Up;
    if (l == "none") return OverrideDirection::None;
    if (l == "down") return OverrideDirection::Down;
    return std::nullopt;
}

std::vector<std::string> split_codes(std::string_view v) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
        auto t = trim(cur);
        if (!t.empty()) out.emplace_back(t);
        cur.clear();
    };
    for (char c : v) {
        if (c == ';' || c == '|') flush();
        else cur.push_back(c);
    }
    flush();
    return out;
}

// Resolved column positions for one logical field; empty when unmapped.
using ColumnSet = std::vector<int>;

std::vector<std::string> split_plus(const std::string& spec) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : spec) {
        if (c == '+') {
            parts.emplace_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.emplace_back(trim(cur));
    return parts;
}

std::string cell(const std::vector<std::string>& row, const ColumnSet& cols) {
    if (cols.empty()) return {};
    return row[static_cast<std::size_t>(cols.front())];
}

}  // namespace

std::string_view to_string(Race r) {
    constexpr std::array<const char*, 6> names = {"W", "B", "A", "H", "I", "O"};
    return names[static_cast<std::size_t>(r)];
}

std::string_view to_string(Marital m) {
    constexpr std::array<const char*, 6> names = {"SIN", "MAR", "DIV", "SEP", "WID", "unknown"};
    return names[static_cast<std::size_t>(m)];
}

std::string_view to_string(OverrideDirection o) {
    constexpr std::array<const char*, 3> names = {"up", "none", "down"};
    return names[static_cast<std::size_t>(o)];
}

const std::vector<std::string>& schema_fields() {
    static const std::vector<std::string> fields = [] {
        std::vector<std::string> f = {"person_id",       "race",           "gender_female",
                                      "age_years",       "marital_status", "employed",
                                      "offense_codes",   "prior_commits",  "institutional_adjustment",
                                      "disciplinary_reports", "escape_count"};
        for (const char* c : kConditionFields) f.emplace_back(c);
        f.insert(f.end(), {"problematic_offense", "custody_level", "override_direction", "stage"});
        return f;
    }();
    return fields;
}

SchemaMap default_schema() {
    SchemaMap m;
    for (const auto& f : schema_fields()) m[f] = f;
    return m;
}

ParseResult parse_cohort(const std::filesystem::path& path, const SchemaMap& schema, char delim) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open cohort file: " + path.string());
    return parse_cohort(in, schema, delim);
}

ParseResult parse_cohort(std::istream& in, const SchemaMap& schema, char delim) {
    for (const auto& [field, spec] : schema)
        if (std::find(schema_fields().begin(), schema_fields().end(), field) == schema_fields().end())
            throw SchemaError("schema maps unknown field '" + field + "'");

    const Table table = parse_delimited(in, delim);

    std::unordered_map<std::string, ColumnSet> cols;
    for (const auto& field : schema_fields()) {
        auto it = schema.find(field);
        if (it == schema.end() || trim(it->second).empty()) {
            cols[field] = {};
            continue;
        }
        ColumnSet set;
        for (const auto& part : split_plus(it->second)) {
            const int c = table.column(part);
            if (c < 0) throw SchemaError("missing required column '" + part + "' (field " + field + ")");
            set.push_back(c);
        }
        cols[field] = std::move(set);
    }
    for (const char* req : {"race", "gender_female", "age_years", "custody_level", "stage"})
        if (cols[req].empty()) throw SchemaError(std::string("field '") + req + "' must be mapped to a column");

    ParseResult result;
    std::size_t row_no = 0;
    for (const auto& row : table.rows) {
        ++row_no;
        ++result.rows_read;
        if (row.size() != table.header.size()) {
            result.rejects.push_back({row_no, "expected " + std::to_string(table.header.size()) +
                                                  " fields, found " + std::to_string(row.size())});
            continue;
        }
        PersonRecord r;
        r.person_id = std::string(trim(cell(row, cols["person_id"])));

        const auto level = parse_number<int>(cell(row, cols["custody_level"]));
        if (!level || *level < 1 || *level > 5) {
            result.rejects.push_back({row_no, "custody level '" + cell(row, cols["custody_level"]) +
                                                  "' outside 1-5"});
            continue;
        }
        if (*level == 1) {
            ++result.dropped_level1;
            continue;
        }
        r.custody_level = *level;

        const auto race = parse_race(cell(row, cols["race"]));
        if (!race) {
            result.rejects.push_back({row_no, "unknown race code '" + cell(row, cols["race"]) + "'"});
            continue;
        }
        r.race = *race;
        const auto female = parse_gender_female(cell(row, cols["gender_female"]));
        if (!female) {
            result.rejects.push_back({row_no, "unparseable gender '" + cell(row, cols["gender_female"]) + "'"});
            continue;
        }
        r.gender_female = *female;
        const auto age = parse_count(cell(row, cols["age_years"]));
        if (!age) {
            result.rejects.push_back({row_no, "unparseable age '" + cell(row, cols["age_years"]) + "'"});
            continue;
        }
        r.age_years = *age;
        try {
            r.stage = parse_stage(lower(trim(cell(row, cols["stage"]))));
        } catch (const UsageError&) {
            result.rejects.push_back({row_no, "unknown stage '" + cell(row, cols["stage"]) + "'"});
            continue;
        }

        r.marital = parse_marital(cell(row, cols["marital_status"]));
        r.employed = parse_bool(cell(row, cols["employed"]));
        r.offense_codes = split_codes(cell(row, cols["offense_codes"]));
        r.prior_commits = parse_count(cell(row, cols["prior_commits"]));
        if (auto adj = parse_number<double>(cell(row, cols["institutional_adjustment"])); adj && *adj >= 0.0)
            r.institutional_adjustment = adj;
        r.disciplinary_reports = parse_count(cell(row, cols["disciplinary_reports"]));
        if (!cols["escape_count"].empty()) {
            int total = 0;
            bool ok = true;
            for (int c : cols["escape_count"]) {
                auto v = parse_count(row[static_cast<std::size_t>(c)]);
                if (!v) {
                    ok = false;
                    break;
                }
                total += *v;
            }
            if (ok) r.escape_count = total;
        }
        for (std::size_t k = 0; k < kConditionCount; ++k)
            r.conditions[k] = parse_bool(cell(row, cols[kConditionFields[k]]));
        r.problematic_offense = parse_bool(cell(row, cols["problematic_offense"]));
        r.override_direction = parse_override(cell(row, cols["override_direction"]));

        // Stage-specific fields never cross stages.
        if (r.stage == Stage::Initial) r.disciplinary_reports.reset();
        result.records.push_back(std::move(r));
    }
    return result;
}

namespace {

template <class T>
std::string opt_str(const std::optional<T>& v) {
    if (!v) return {};
    if constexpr (std::is_same_v<T, bool>) return *v ? "1" : "0";
    else if constexpr (std::is_same_v<T, double>) return format_number(*v);
    else return std::to_string(*v);
}

}  // namespace

void write_cohort(std::ostream& out, const std::vector<PersonRecord>& records, char delim) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(records.size());
    for (const auto& r : records) {
        std::string codes;
        for (std::size_t i = 0; i < r.offense_codes.size(); ++i) {
            if (i) codes += ';';
            codes += r.offense_codes[i];
        }
        std::vector<std::string> row = {
            r.person_id,
            std::string(to_string(r.race)),
            r.gender_female ? "1" : "0",
            std::to_string(r.age_years),
            r.marital == Marital::Unknown ? std::string() : std::string(to_string(r.marital)),
            opt_str(r.employed),
            codes,
            opt_str(r.prior_commits),
            opt_str(r.institutional_adjustment),
            opt_str(r.disciplinary_reports),
            opt_str(r.escape_count),
        };
        for (const auto& c : r.conditions) row.push_back(opt_str(c));
        row.push_back(opt_str(r.problematic_offense));
        row.push_back(std::to_string(r.custody_level));
        row.push_back(r.override_direction ? std::string(to_string(*r.override_direction)) : std::string());
        row.emplace_back(to_string(r.stage));
        rows.push_back(std::move(row));
    }
    write_delimited(out, schema_fields(), rows, delim);
}

void write_rejects(std::ostream& out, const std::vector<RejectedRow>& rejects, char delim) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : rejects) rows.push_back({std::to_string(r.row), r.reason});
    write_delimited(out, {"row", "reason"}, rows, delim);
}

std::vector<CriminalCodeEntry> read_code_table(const std::filesystem::path& path, char delim) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open criminal-code table: " + path.string());
    return parse_code_table(in, delim);
}

std::vector<CriminalCodeEntry> parse_code_table(std::istream& in, char delim) {
    const Table t = parse_delimited(in, delim);
    std::array<int, 5> idx{};
    const std::array<const char*, 5> names = {"code", "gravity_min", "gravity_max", "prs_min", "prs_max"};
    for (std::size_t i = 0; i < names.size(); ++i) {
        idx[i] = t.column(names[i]);
        if (idx[i] < 0) throw SchemaError(std::string("criminal-code table missing column '") + names[i] + "'");
    }
    std::vector<CriminalCodeEntry> out;
    std::size_t row_no = 0;
    for (const auto& row : t.rows) {
        ++row_no;
        if (row.size() != t.header.size())
            throw ConfigError("criminal-code table row " + std::to_string(row_no) + " has wrong field count");
        CriminalCodeEntry e;
        e.code = std::string(trim(row[static_cast<std::size_t>(idx[0])]));
        std::array<int*, 4> dst = {&e.gravity_min, &e.gravity_max, &e.prs_min, &e.prs_max};
        for (std::size_t i = 0; i < 4; ++i) {
            auto v = parse_number<int>(row[static_cast<std::size_t>(idx[i + 1])]);
            if (!v) throw ConfigError("criminal-code table row " + std::to_string(row_no) + ": bad " + names[i + 1]);
            *dst[i] = *v;
        }
        if (e.gravity_min > e.gravity_max || e.prs_min > e.prs_max)
            throw ConfigError("criminal-code entry '" + e.code + "' has min above max");
        out.push_back(std::move(e));
    }
    return out;
}

void write_code_table(std::ostream& out, const std::vector<CriminalCodeEntry>& table, char delim) {
    std::vector<std::vector<std::string>> rows;
    for (const auto& e : table)
        rows.push_back({e.code, std::to_string(e.gravity_min), std::to_string(e.gravity_max),
                        std::to_string(e.prs_min), std::to_string(e.prs_max)});
    write_delimited(out, {"code", "gravity_min", "gravity_max", "prs_min", "prs_max"}, rows, delim);
}

std::vector<PersonRecord> attach_offense_scores(std::vector<PersonRecord> records,
                                                const std::vector<CriminalCodeEntry>& table) {
    std::unordered_map<std::string, const CriminalCodeEntry*> index;
    for (const auto& e : table) {
        std::string key(trim(e.code));
        if (!index.emplace(key, &e).second) throw ConfigError("duplicate criminal code '" + key + "' in table");
    }
    for (auto& r : records) {
        r.gs_max.reset();
        r.prs_max.reset();
        for (const auto& code : r.offense_codes) {
            auto it = index.find(std::string(trim(code)));
            if (it == index.end()) continue;
            r.gs_max = std::max(r.gs_max.value_or(it->second->gravity_max), it->second->gravity_max);
            r.prs_max = std::max(r.prs_max.value_or(it->second->prs_max), it->second->prs_max);
        }
    }
    return records;
}

EscapeHistory reduce_escape_history(int escape_count) {
    return {escape_count >= 1 ? 1 : 0, escape_count >= 5 ? 1 : 0};
}

ConditionCount count_problematic_conditions(const PersonRecord& record) {
    ConditionCount c;
    for (const auto& flag : record.conditions) {
        if (!flag) c.imputed = true;
        else if (*flag) ++c.count;
    }
    return c;
}

bool is_problematic_offense_code(std::string_view code) {
    std::vector<int> sections;
    for (std::size_t i = 0; i < code.size();) {
        if (std::isdigit(static_cast<unsigned char>(code[i]))) {
            std::size_t j = i;
            int v = 0;
            while (j < code.size() && std::isdigit(static_cast<unsigned char>(code[j]))) v = v * 10 + (code[j++] - '0');
            sections.push_back(v);
            // skip ".1" style subsection suffixes
            if (j + 1 < code.size() && code[j] == '.' && std::isdigit(static_cast<unsigned char>(code[j + 1]))) {
                ++j;
                while (j < code.size() && std::isdigit(static_cast<unsigned char>(code[j]))) ++j;
            }
            // skip "(a)(1)" style paragraph markers
            while (j < code.size() && code[j] == '(') {
                auto close = code.find(')', j);
                if (close == std::string_view::npos) break;
                j = close + 1;
            }
            i = j;
        } else {
            ++i;
        }
    }
    if (sections.size() > 1 && sections.front() == 18) sections.erase(sections.begin());
    if (sections.empty()) return false;

    auto listed = [](int s) {
        switch (s) {
            case 2501:  // criminal homicide
            case 2502:  // murder
            case 2503:  // voluntary manslaughter
            case 2507:  // manslaughter of law enforcement officer
            case 2604:  // murder of unborn child
            case 2901:  // kidnapping
                return true;
            default:
                break;
        }
        return s >= 3101 && s <= 3199;  // sexual offenses chapter; prostitution is 5902
    };
    const int head = sections.front();
    if (head == 901 || head == 902 || head == 903)
        return std::any_of(sections.begin() + 1, sections.end(), listed);
    return listed(head);
}

const std::vector<std::string>& all_feature_names() {
    static const std::vector<std::string> names = {
        "gender_female", "age_gt_45",     "age_lt_25",     "race_B",        "race_A",
        "race_H",        "race_I",        "race_O",        "off_1_prs_max", "off_1_gs_max",
        "prior_commits", "ic_institut_adj", "re_discip_reports", "escape_hist_1", "escape_hist_5",
        "mrt_stat_DIV",  "mrt_stat_SEP",  "mrt_stat_MAR",  "mrt_stat_WID",  "employed",
        "problematic_offenses", "problematic_conditions",
    };
    return names;
}

std::vector<std::string> task_feature_names(const ClassificationTask& task) {
    std::vector<std::string> out;
    for (const auto& n : all_feature_names()) {
        if (n == "ic_institut_adj" && task.stage != Stage::Initial) continue;
        if (n == "re_discip_reports" && task.stage != Stage::Reclassification) continue;
        if ((n == "problematic_offenses" || n == "problematic_conditions") && task.kind != TaskKind::OverrideUp)
            continue;
        out.push_back(n);
    }
    return out;
}

const std::vector<std::string>& demographic_feature_names() {
    static const std::vector<std::string> names = {"gender_female", "age_gt_45", "age_lt_25", "race_B",
                                                   "race_A",        "race_H",    "race_I",    "race_O"};
    return names;
}

bool is_indicator_feature(std::string_view name) {
    static const std::set<std::string_view> continuous = {"off_1_prs_max", "off_1_gs_max", "prior_commits",
                                                          "ic_institut_adj", "re_discip_reports",
                                                          "problematic_conditions"};
    return !continuous.contains(name);
}

std::optional<int> outcome_label(const PersonRecord& record, TaskKind kind) {
    switch (kind) {
        case TaskKind::Multinomial: return record.custody_level;
        case TaskKind::MaxVsRegular: return record.custody_level == 5 ? 1 : 0;
        case TaskKind::HighVsLow: return record.custody_level >= 4 ? 1 : 0;
        case TaskKind::OverrideUp:
            if (!record.override_direction) return std::nullopt;
            return *record.override_direction == OverrideDirection::Up ? 1 : 0;
    }
    return std::nullopt;
}

EncodedRecord encode_features(const PersonRecord& record, const ClassificationTask& task) {
    if (record.stage != task.stage)
        throw UsageError("record " + record.person_id + " is " + std::string(to_string(record.stage)) +
                         "-stage but task " + task.id() + " expects " + std::string(to_string(task.stage)));

    EncodedRecord enc;
    FeatureVector fv;
    fv.names = task_feature_names(task);
    fv.values.reserve(fv.names.size());

    auto need = [&](bool present, const char* field) {
        if (!present && std::find(enc.missing.begin(), enc.missing.end(), field) == enc.missing.end())
            enc.missing.emplace_back(field);
        return present;
    };
    auto ind = [](bool b) { return b ? 1.0 : 0.0; };

    for (const auto& name : fv.names) {
        double v = 0.0;
        if (name == "gender_female") v = ind(record.gender_female);
        else if (name == "age_gt_45") v = ind(record.age_years > 45);
        else if (name == "age_lt_25") v = ind(record.age_years < 25);
        else if (name == "race_B") v = ind(record.race == Race::B);
        else if (name == "race_A") v = ind(record.race == Race::A);
        else if (name == "race_H") v = ind(record.race == Race::H);
        else if (name == "race_I") v = ind(record.race == Race::I);
        else if (name == "race_O") v = ind(record.race == Race::O);
        else if (name == "off_1_prs_max") {
            if (need(record.prs_max.has_value(), "off_1_prs_max")) v = *record.prs_max;
        } else if (name == "off_1_gs_max") {
            if (need(record.gs_max.has_value(), "off_1_gs_max")) v = *record.gs_max;
        } else if (name == "prior_commits") {
            if (need(record.prior_commits.has_value(), "prior_commits")) v = *record.prior_commits;
        } else if (name == "ic_institut_adj") {
            if (need(record.institutional_adjustment.has_value(), "institutional_adjustment"))
                v = *record.institutional_adjustment;
        } else if (name == "re_discip_reports") {
            if (need(record.disciplinary_reports.has_value(), "disciplinary_reports")) v = *record.disciplinary_reports;
        } else if (name == "escape_hist_1" || name == "escape_hist_5") {
            if (need(record.escape_count.has_value(), "escape_count")) {
                const auto h = reduce_escape_history(*record.escape_count);
                v = name == "escape_hist_1" ? h.ever : h.habitual;
            }
        } else if (name.starts_with("mrt_stat_")) {
            if (need(record.marital != Marital::Unknown, "marital_status")) {
                const auto code = name.substr(9);
                v = ind(to_string(record.marital) == code);
            }
        } else if (name == "employed") {
            if (need(record.employed.has_value(), "employed")) v = ind(*record.employed);
        } else if (name == "problematic_offenses") {
            std::optional<bool> p = record.problematic_offense;
            if (!p && !record.offense_codes.empty())
                p = std::any_of(record.offense_codes.begin(), record.offense_codes.end(),
                                [](const std::string& c) { return is_problematic_offense_code(c); });
            if (need(p.has_value(), "problematic_offense")) v = ind(*p);
        } else if (name == "problematic_conditions") {
            const auto c = count_problematic_conditions(record);
            enc.conditions_imputed = c.imputed;
            v = c.count;
        }
        fv.values.push_back(v);
    }

    enc.outcome = outcome_label(record, task.kind);
    need(enc.outcome.has_value(), "override_direction");
    if (enc.missing.empty()) enc.features = std::move(fv);
    return enc;
}

std::vector<int> task_classes(TaskKind kind) {
    if (kind == TaskKind::Multinomial) return {2, 3, 4, 5};
    return {0, 1};
}

namespace {

std::string class_label(TaskKind kind, int cls) {
    switch (kind) {
        case TaskKind::Multinomial: return "custody level " + std::to_string(cls);
        case TaskKind::MaxVsRegular: return cls ? "maximum (level 5)" : "regular (levels 2-4)";
        case TaskKind::HighVsLow: return cls ? "high (levels 4-5)" : "low (levels 2-3)";
        case TaskKind::OverrideUp: return cls ? "override up" : "no upward override";
    }
    return std::to_string(cls);
}

}  // namespace

CompleteCaseResult complete_cases(const std::vector<PersonRecord>& records, const ClassificationTask& task) {
    std::vector<EncodedRecord> encoded;
    encoded.reserve(records.size());
    for (const auto& r : records) encoded.push_back(encode_features(r, task));
    return complete_cases(encoded, task);
}

CompleteCaseResult complete_cases(const std::vector<EncodedRecord>& encoded, const ClassificationTask& task) {
    CompleteCaseResult res;
    res.n_input = encoded.size();
    const auto names = task_feature_names(task);
    std::vector<const EncodedRecord*> keep;
    for (const auto& e : encoded) {
        if (!e.features) {
            ++res.n_incomplete;
            for (const auto& m : e.missing) ++res.missing_counts[m];
            continue;
        }
        if (e.features->names != names) throw UsageError("encoded record does not match task " + task.id());
        if (e.conditions_imputed) ++res.n_conditions_imputed;
        keep.push_back(&e);
    }
    for (int cls : task_classes(task.kind)) res.class_counts[cls] = 0;
    for (const auto* e : keep) ++res.class_counts[*e->outcome];
    for (const auto& [cls, count] : res.class_counts)
        if (count == 0)
            throw DegenerateTaskError(class_label(task.kind, cls),
                                      "task " + task.id() + " has no complete records in class " +
                                          class_label(task.kind, cls));

    const auto n = static_cast<Eigen::Index>(keep.size());
    const auto p = static_cast<Eigen::Index>(names.size());
    Dataset& d = res.dataset;
    d.x.resize(n, p + 1);
    d.y.resize(n);
    d.feature_names = names;
    d.task = task;
    for (Eigen::Index i = 0; i < n; ++i) {
        d.x(i, 0) = 1.0;
        const auto& v = keep[static_cast<std::size_t>(i)]->features->values;
        for (Eigen::Index j = 0; j < p; ++j) d.x(i, j + 1) = v[static_cast<std::size_t>(j)];
        d.y[i] = *keep[static_cast<std::size_t>(i)]->outcome;
    }
    return res;
}

}  // namespace pact
