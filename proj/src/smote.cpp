#include "pact/smote.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "pact/error.hpp"
#include "pact/random.hpp"

namespace pact {

std::vector<Eigen::Index> knn_minority(Eigen::Index query, const Eigen::MatrixXd& points, int k) {
    const Eigen::Index n = points.rows();
    if (k < 1) throw ConfigError("k_neighbors must be at least 1");
    if (k >= n)
        throw ConfigError("k_neighbors = " + std::to_string(k) + " needs more than " + std::to_string(k) +
                          " minority rows, found " + std::to_string(n));
    if (query < 0 || query >= n) throw UsageError("query row out of range");

    std::vector<std::pair<double, Eigen::Index>> dist;
    dist.reserve(static_cast<std::size_t>(n - 1));
    const auto q = points.row(query);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (i == query) continue;
        dist.emplace_back((points.row(i) - q).squaredNorm(), i);
    }
    const auto kk = static_cast<std::ptrdiff_t>(k);
    std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
    std::vector<Eigen::Index> out;
    out.reserve(static_cast<std::size_t>(k));
    for (std::ptrdiff_t i = 0; i < kk; ++i) out.push_back(dist[static_cast<std::size_t>(i)].second);
    return out;
}

ResampleResult smote(const Dataset& dataset, const ResampleConfig& config) {
    if (config.k_neighbors < 1) throw ConfigError("smote.k must be at least 1");
    const Eigen::Index p = dataset.cols();
    std::vector<bool> mask = config.binary_feature_mask;
    if (mask.empty()) {
        mask.resize(static_cast<std::size_t>(p));
        for (Eigen::Index j = 0; j < p; ++j) mask[static_cast<std::size_t>(j)] = dataset.is_binary_column(j);
    } else if (mask.size() != static_cast<std::size_t>(p)) {
        throw ConfigError("binary feature mask has " + std::to_string(mask.size()) + " entries, dataset has " +
                          std::to_string(p) + " columns");
    }

    ResampleResult res;
    res.counts_before = dataset.class_counts();
    if (res.counts_before.size() < 2) throw ConfigError("SMOTE needs at least two classes");

    std::size_t majority = 0;
    for (const auto& [cls, n] : res.counts_before) majority = std::max(majority, n);

    std::size_t needed = 0;
    for (const auto& [cls, n] : res.counts_before) {
        if (n == majority) continue;
        if (n <= static_cast<std::size_t>(config.k_neighbors))
            throw ConfigError("class " + std::to_string(cls) + " has " + std::to_string(n) +
                              " rows; SMOTE with k = " + std::to_string(config.k_neighbors) + " needs more");
        needed += majority - n;
    }
    if (needed == 0) {
        res.dataset = dataset;
        res.counts_after = res.counts_before;
        res.note = "classes already balanced; SMOTE skipped";
        return res;
    }

    const Eigen::Index n0 = dataset.rows();
    res.dataset.task = dataset.task;
    res.dataset.feature_names = dataset.feature_names;
    res.dataset.x.resize(n0 + static_cast<Eigen::Index>(needed), p);
    res.dataset.y.resize(n0 + static_cast<Eigen::Index>(needed));
    res.dataset.x.topRows(n0) = dataset.x;
    res.dataset.y.head(n0) = dataset.y;
    res.origins.reserve(needed);

    Eigen::Index out_row = n0;
    for (const auto& [cls, count] : res.counts_before) {
        if (count == majority) continue;
        std::vector<Eigen::Index> members;
        for (Eigen::Index i = 0; i < n0; ++i)
            if (static_cast<int>(dataset.y[i]) == cls) members.push_back(i);

        // Neighbor search over feature columns only.
        Eigen::MatrixXd pts(static_cast<Eigen::Index>(members.size()), p - 1);
        for (std::size_t m = 0; m < members.size(); ++m)
            pts.row(static_cast<Eigen::Index>(m)) = dataset.x.row(members[m]).tail(p - 1);

        std::unordered_map<Eigen::Index, std::vector<Eigen::Index>> neighbors;
        const std::size_t to_make = majority - count;
        for (std::size_t s = 0; s < to_make; ++s) {
            Rng rng(substream_seed(config.rng_seed, static_cast<std::uint64_t>(cls), s));
            const auto base = static_cast<Eigen::Index>(rng.index(members.size()));
            auto it = neighbors.find(base);
            if (it == neighbors.end())
                it = neighbors.emplace(base, knn_minority(base, pts, config.k_neighbors)).first;
            const auto nb = it->second[rng.index(it->second.size())];
            const double lambda = rng.uniform_closed();

            const auto a = members[static_cast<std::size_t>(base)];
            const auto b = members[static_cast<std::size_t>(nb)];
            auto row = res.dataset.x.row(out_row);
            for (Eigen::Index j = 0; j < p; ++j) {
                const double xa = dataset.x(a, j);
                const double xb = dataset.x(b, j);
                double v = std::clamp(xa + lambda * (xb - xa), std::min(xa, xb), std::max(xa, xb));
                if (mask[static_cast<std::size_t>(j)]) v = v >= 0.5 ? 1.0 : 0.0;
                row[j] = v;
            }
            res.dataset.y[out_row] = cls;
            res.origins.push_back({a, b, lambda});
            ++out_row;
        }
    }
    res.counts_after = res.dataset.class_counts();
    return res;
}

}  // namespace pact
