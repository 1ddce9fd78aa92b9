#pragma once

#include <Eigen/Dense>

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pact {

enum class Stage { Initial, Reclassification };

enum class TaskKind {
    Multinomial,   // custody levels 2..5
    MaxVsRegular,  // 5 vs 2..4
    HighVsLow,     // 4..5 vs 2..3
    OverrideUp,    // override to a higher level vs not
};

struct ClassificationTask {
    TaskKind kind = TaskKind::HighVsLow;
    Stage stage = Stage::Initial;

    // "HighVsLow:initial" style identifier, also accepted by parse().
    [[nodiscard]] std::string id() const;
    // Filesystem-safe variant: "HighVsLow_initial".
    [[nodiscard]] std::string file_stem() const;
    [[nodiscard]] bool binary() const { return kind != TaskKind::Multinomial; }

    static ClassificationTask parse(std::string_view text);
    // The eight (kind, stage) combinations in canonical order.
    static std::vector<ClassificationTask> all();

    friend bool operator==(const ClassificationTask&, const ClassificationTask&) = default;
};

std::string_view to_string(Stage s);
std::string_view to_string(TaskKind k);
Stage parse_stage(std::string_view text);

/// Complete-case design matrix. Column 0 of `x` is the intercept; the
/// remaining columns are named by `feature_names` in order. Outcomes are
/// 0/1 for binary tasks and the custody level for multinomial ones.
struct Dataset {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    std::vector<std::string> feature_names;
    ClassificationTask task;

    [[nodiscard]] Eigen::Index rows() const { return x.rows(); }
    [[nodiscard]] Eigen::Index cols() const { return x.cols(); }

    // "intercept" followed by feature_names.
    [[nodiscard]] std::vector<std::string> column_names() const;

    // Sorted distinct outcome labels.
    [[nodiscard]] std::vector<int> classes() const;
    [[nodiscard]] std::map<int, std::size_t> class_counts() const;

    // Feature column index (into x) by name, or -1.
    [[nodiscard]] int column_of(std::string_view feature) const;

    // True when every value in column j is exactly 0 or 1.
    [[nodiscard]] bool is_binary_column(Eigen::Index j) const;

    [[nodiscard]] Dataset select_rows(const std::vector<Eigen::Index>& idx) const;
    [[nodiscard]] Dataset drop_features(const std::vector<std::string>& names) const;
    [[nodiscard]] Dataset keep_features(const std::vector<std::string>& names) const;
};

// Builds a dataset from feature columns (without intercept); prepends the intercept.
Dataset make_dataset(const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
                     std::vector<std::string> names, ClassificationTask task = {});

}  // namespace pact
