#include "pact/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "pact/error.hpp"
#include "pact/random.hpp"

namespace pact {

Confusion confusion(const std::vector<int>& predicted, const std::vector<int>& truth,
                    const std::vector<int>& classes) {
    if (predicted.size() != truth.size())
        throw UsageError("confusion: " + std::to_string(predicted.size()) + " predictions for " +
                         std::to_string(truth.size()) + " labels");
    if (truth.empty()) throw UsageError("confusion: no rows");
    std::map<int, Eigen::Index> pos;
    for (std::size_t k = 0; k < classes.size(); ++k) pos[classes[k]] = static_cast<Eigen::Index>(k);
    auto lookup = [&](int label) {
        auto it = pos.find(label);
        if (it == pos.end()) throw UsageError("confusion: unknown label " + std::to_string(label));
        return it->second;
    };
    Confusion c;
    c.classes = classes;
    c.counts = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(classes.size()), static_cast<Eigen::Index>(classes.size()));
    for (std::size_t i = 0; i < truth.size(); ++i) ++c.counts(lookup(truth[i]), lookup(predicted[i]));
    return c;
}

MetricsReport precision_recall_f1(const Confusion& matrix) {
    MetricsReport m;
    m.matrix = matrix;
    const long n = matrix.total();
    if (n <= 0) throw UsageError("precision_recall_f1: empty confusion matrix");
    long correct = 0;
    for (std::size_t k = 0; k < matrix.classes.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        ClassMetrics c;
        c.cls = matrix.classes[k];
        const long tp = matrix.counts(kk, kk);
        const long predicted = matrix.counts.col(kk).sum();
        c.support = matrix.counts.row(kk).sum();
        correct += tp;
        if (predicted == 0) {
            m.notes.push_back("class " + std::to_string(c.cls) + " never predicted; precision set to 0");
        } else {
            c.precision = static_cast<double>(tp) / static_cast<double>(predicted);
        }
        if (c.support > 0) c.recall = static_cast<double>(tp) / static_cast<double>(c.support);
        if (c.precision + c.recall > 0.0) c.f1 = 2.0 * c.precision * c.recall / (c.precision + c.recall);
        const double w = static_cast<double>(c.support) / static_cast<double>(n);
        m.weighted_precision += w * c.precision;
        m.weighted_f1 += w * c.f1;
        m.per_class.push_back(c);
    }
    // Support-weighted recall collapses to total TP / N; computing it that way keeps it identical to accuracy.
    m.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    m.weighted_recall = m.accuracy;
    return m;
}

std::vector<int> stratified_folds(const Eigen::VectorXd& y, int folds, std::uint64_t seed) {
    if (folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    std::map<int, std::vector<Eigen::Index>> members;
    for (Eigen::Index i = 0; i < y.size(); ++i) members[static_cast<int>(y[i])].push_back(i);
    for (const auto& [cls, rows] : members)
        if (rows.size() < static_cast<std::size_t>(folds))
            throw ConfigError("class " + std::to_string(cls) + " has " + std::to_string(rows.size()) +
                              " rows, fewer than " + std::to_string(folds) + " folds");
    std::vector<int> out(static_cast<std::size_t>(y.size()), 0);
    int next = 0;
    for (auto& [cls, rows] : members) {
        Rng rng(substream_seed(seed, static_cast<std::uint64_t>(cls), 0xf01d));
        rng.shuffle(rows.begin(), rows.end());
        for (auto r : rows) {
            out[static_cast<std::size_t>(r)] = next;
            next = (next + 1) % folds;
        }
    }
    return out;
}

CvResult repeated_stratified_cv(const Dataset& dataset, const CvConfig& config, const Trainer& trainer) {
    if (config.repeats < 1) throw ConfigError("cv repeats must be at least 1");
    CvResult res;
    res.folds = config.folds;
    res.repeats = config.repeats;
    const auto classes = dataset.classes();
    Eigen::MatrixXi pooled = Eigen::MatrixXi::Zero(static_cast<Eigen::Index>(classes.size()),
                                                    static_cast<Eigen::Index>(classes.size()));
    for (int rep = 0; rep < config.repeats; ++rep) {
        const auto assign = stratified_folds(dataset.y, config.folds, substream_seed(config.seed, 0xc5, static_cast<std::uint64_t>(rep)));
        for (int f = 0; f < config.folds; ++f) {
            std::vector<Eigen::Index> train, test;
            for (std::size_t i = 0; i < assign.size(); ++i)
                (assign[i] == f ? test : train).push_back(static_cast<Eigen::Index>(i));
            const Dataset tr = dataset.select_rows(train);
            const Dataset te = dataset.select_rows(test);
            std::vector<int> truth(test.size());
            for (std::size_t i = 0; i < test.size(); ++i) truth[i] = static_cast<int>(te.y[static_cast<Eigen::Index>(i)]);
            try {
                const auto fold_seed = substream_seed(config.seed, static_cast<std::uint64_t>(rep),
                                                      static_cast<std::uint64_t>(f) + 1);
                const Predictor predict = trainer(tr, fold_seed);
                const auto pred = predict(te.x);
                const auto c = confusion(pred, truth, classes);
                pooled += c.counts;
                res.fold_accuracies.push_back(static_cast<double>(c.counts.trace()) / static_cast<double>(test.size()));
            } catch (const Error& e) {
                res.fold_failures.push_back("repeat " + std::to_string(rep) + " fold " + std::to_string(f) + ": " +
                                            e.what());
            }
        }
    }
    if (res.fold_accuracies.empty()) throw ConvergenceError("every cross-validation fold failed to train");
    const double n = static_cast<double>(res.fold_accuracies.size());
    res.mean_accuracy = std::accumulate(res.fold_accuracies.begin(), res.fold_accuracies.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : res.fold_accuracies) ss += (a - res.mean_accuracy) * (a - res.mean_accuracy);
    res.sd_accuracy = n > 1 ? std::sqrt(ss / (n - 1)) : 0.0;
    res.pooled = precision_recall_f1(Confusion{classes, pooled});
    return res;
}

nlohmann::ordered_json to_json(const MetricsReport& m) {
    nlohmann::ordered_json j;
    j["classes"] = m.matrix.classes;
    auto& cm = j["confusion"] = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < m.matrix.counts.rows(); ++r) {
        std::vector<int> row(static_cast<std::size_t>(m.matrix.counts.cols()));
        for (Eigen::Index c = 0; c < m.matrix.counts.cols(); ++c) row[static_cast<std::size_t>(c)] = m.matrix.counts(r, c);
        cm.push_back(row);
    }
    auto& pc = j["per_class"] = nlohmann::ordered_json::array();
    for (const auto& c : m.per_class)
        pc.push_back({{"class", c.cls}, {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1},
                      {"support", c.support}});
    j["weighted"] = {{"precision", m.weighted_precision}, {"recall", m.weighted_recall}, {"f1", m.weighted_f1}};
    j["accuracy"] = m.accuracy;
    if (!m.notes.empty()) j["notes"] = m.notes;
    return j;
}

nlohmann::ordered_json to_json(const CvResult& cv) {
    nlohmann::ordered_json j;
    j["folds"] = cv.folds;
    j["repeats"] = cv.repeats;
    j["mean_accuracy"] = cv.mean_accuracy;
    j["sd_accuracy"] = cv.sd_accuracy;
    j["evaluated_folds"] = cv.fold_accuracies.size();
    j["pooled"] = to_json(cv.pooled);
    if (!cv.fold_failures.empty()) j["fold_failures"] = cv.fold_failures;
    return j;
}

}  // namespace pact
