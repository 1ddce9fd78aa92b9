#include "pact/dataset.hpp"

#include <algorithm>
#include <set>

#include "pact/error.hpp"

namespace pact {

std::string_view to_string(Stage s) {
    return s == Stage::Initial ? "initial" : "reclassification";
}

std::string_view to_string(TaskKind k) {
    switch (k) {
        case TaskKind::Multinomial: return "Multinomial";
        case TaskKind::MaxVsRegular: return "MaxVsRegular";
        case TaskKind::HighVsLow: return "HighVsLow";
        case TaskKind::OverrideUp: return "OverrideUp";
    }
    return "?";
}

Stage parse_stage(std::string_view text) {
    if (text == "initial" || text == "ic" || text == "INITIAL") return Stage::Initial;
    if (text == "reclassification" || text == "reclass" || text == "re" || text == "RECLASSIFICATION")
        return Stage::Reclassification;
    throw UsageError("unknown stage '" + std::string(text) + "'");
}

std::string ClassificationTask::id() const {
    return std::string(to_string(kind)) + ":" + std::string(to_string(stage));
}

std::string ClassificationTask::file_stem() const {
    return std::string(to_string(kind)) + "_" + std::string(to_string(stage));
}

ClassificationTask ClassificationTask::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos)
        throw UsageError("task must look like Kind:stage, got '" + std::string(text) + "'");
    const auto kind = text.substr(0, colon);
    ClassificationTask t;
    if (kind == "Multinomial") t.kind = TaskKind::Multinomial;
    else if (kind == "MaxVsRegular") t.kind = TaskKind::MaxVsRegular;
    else if (kind == "HighVsLow") t.kind = TaskKind::HighVsLow;
    else if (kind == "OverrideUp") t.kind = TaskKind::OverrideUp;
    else throw UsageError("unknown task kind '" + std::string(kind) + "'");
    t.stage = parse_stage(text.substr(colon + 1));
    return t;
}

std::vector<ClassificationTask> ClassificationTask::all() {
    std::vector<ClassificationTask> out;
    for (auto stage : {Stage::Initial, Stage::Reclassification})
        for (auto kind : {TaskKind::HighVsLow, TaskKind::MaxVsRegular, TaskKind::Multinomial, TaskKind::OverrideUp})
            out.push_back({kind, stage});
    return out;
}

std::vector<std::string> Dataset::column_names() const {
    std::vector<std::string> out{"intercept"};
    out.insert(out.end(), feature_names.begin(), feature_names.end());
    return out;
}

std::vector<int> Dataset::classes() const {
    std::set<int> s;
    for (Eigen::Index i = 0; i < y.size(); ++i) s.insert(static_cast<int>(y[i]));
    return {s.begin(), s.end()};
}

std::map<int, std::size_t> Dataset::class_counts() const {
    std::map<int, std::size_t> m;
    for (Eigen::Index i = 0; i < y.size(); ++i) ++m[static_cast<int>(y[i])];
    return m;
}

int Dataset::column_of(std::string_view feature) const {
    for (std::size_t j = 0; j < feature_names.size(); ++j)
        if (feature_names[j] == feature) return static_cast<int>(j) + 1;
    return -1;
}

bool Dataset::is_binary_column(Eigen::Index j) const {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double v = x(i, j);
        if (v != 0.0 && v != 1.0) return false;
    }
    return true;
}

Dataset Dataset::select_rows(const std::vector<Eigen::Index>& idx) const {
    Dataset d;
    d.x.resize(static_cast<Eigen::Index>(idx.size()), x.cols());
    d.y.resize(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t r = 0; r < idx.size(); ++r) {
        d.x.row(static_cast<Eigen::Index>(r)) = x.row(idx[r]);
        d.y[static_cast<Eigen::Index>(r)] = y[idx[r]];
    }
    d.feature_names = feature_names;
    d.task = task;
    return d;
}

Dataset Dataset::drop_features(const std::vector<std::string>& names) const {
    std::vector<std::string> keep;
    for (const auto& f : feature_names)
        if (std::find(names.begin(), names.end(), f) == names.end()) keep.push_back(f);
    return keep_features(keep);
}

Dataset Dataset::keep_features(const std::vector<std::string>& names) const {
    Dataset d;
    d.task = task;
    d.y = y;
    std::vector<Eigen::Index> cols{0};
    for (const auto& f : names) {
        const int c = column_of(f);
        if (c < 0) throw UsageError("unknown feature '" + f + "'");
        cols.push_back(c);
        d.feature_names.push_back(f);
    }
    d.x.resize(x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) d.x.col(static_cast<Eigen::Index>(j)) = x.col(cols[j]);
    return d;
}

Dataset make_dataset(const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
                     std::vector<std::string> names, ClassificationTask task) {
    if (features.rows() != y.size()) throw UsageError("feature rows and outcome length differ");
    if (static_cast<std::size_t>(features.cols()) != names.size())
        throw UsageError("feature column count and name count differ");
    Dataset d;
    d.x.resize(features.rows(), features.cols() + 1);
    d.x.col(0).setOnes();
    d.x.rightCols(features.cols()) = features;
    d.y = y;
    d.feature_names = std::move(names);
    d.task = task;
    return d;
}

}  // namespace pact
