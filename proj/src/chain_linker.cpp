#include "evd/chain_linker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <unordered_map>

namespace evd {

std::optional<double> cluster_overlap(const std::vector<Entity>& a, const std::vector<Entity>& b) {
    if (a.empty() || b.empty()) return std::nullopt;
    size_t i = 0, j = 0, shared = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            ++i;
        } else if (b[j] < a[i]) {
            ++j;
        } else {
            ++shared;
            ++i;
            ++j;
        }
    }
    return static_cast<double>(shared) /
           std::sqrt(static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weights) {
    const size_t rows = weights.size();
    size_t cols = 0;
    for (const auto& row : weights) cols = std::max(cols, row.size());
    const size_t n = std::max(rows, cols);
    if (n == 0) return {};

    // Hungarian algorithm with potentials on the zero-padded square matrix,
    // minimizing negated weights. 1-based internals.
    const double kInf = std::numeric_limits<double>::infinity();
    auto cost = [&](size_t i, size_t j) -> double {
        if (i < rows && j < weights[i].size()) return -weights[i][j];
        return 0.0;
    };

    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<size_t> match(n + 1, 0), way(n + 1, 0);
    for (size_t i = 1; i <= n; ++i) {
        match[0] = i;
        size_t j0 = 0;
        std::vector<double> minv(n + 1, kInf);
        std::vector<bool> used(n + 1, false);
        do {
            used[j0] = true;
            size_t i0 = match[j0], j1 = 0;
            double delta = kInf;
            for (size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            size_t j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(rows, -1);
    for (size_t j = 1; j <= n; ++j) {
        size_t i = match[j];
        if (i >= 1 && i <= rows && j - 1 < cols) {
            row_to_col[i - 1] = static_cast<int>(j - 1);
        }
    }
    return row_to_col;
}

std::optional<std::string> LinkResult::id_for(size_t curr_index) const {
    for (const auto& [id, index] : matches) {
        if (index == curr_index) return id;
    }
    auto it = new_ids.find(curr_index);
    if (it != new_ids.end()) return it->second;
    return std::nullopt;
}

std::vector<LinkCandidate> link_candidates(const ClusterSnapshot& prev,
                                           const std::vector<Cluster>& curr, double threshold) {
    std::vector<LinkCandidate> candidates;
    for (size_t i = 0; i < prev.clusters.size(); ++i) {
        for (size_t j = 0; j < curr.size(); ++j) {
            auto w = cluster_overlap(prev.clusters[i].entities, curr[j].entities);
            if (w && *w > 0.0 && *w >= threshold) {
                candidates.push_back({prev.clusters[i].id, j, *w});
            }
        }
    }
    return candidates;
}

LinkResult link(const ClusterSnapshot& prev, const std::vector<Cluster>& curr, double threshold,
                ChainIdGenerator& ids) {
    LinkResult result;
    std::vector<bool> matched(curr.size(), false);

    if (!prev.clusters.empty() && !curr.empty()) {
        std::vector<std::vector<double>> weights(prev.clusters.size(),
                                                 std::vector<double>(curr.size(), 0.0));
        std::unordered_map<std::string, size_t> prev_index;
        for (size_t i = 0; i < prev.clusters.size(); ++i) prev_index[prev.clusters[i].id] = i;
        auto candidates = link_candidates(prev, curr, threshold);
        for (const LinkCandidate& c : candidates) {
            weights[prev_index[c.prev_cluster_id]][c.curr_index] = c.weight;
        }
        if (!candidates.empty()) {
            std::vector<int> assignment = max_weight_assignment(weights);
            for (size_t i = 0; i < assignment.size(); ++i) {
                int j = assignment[i];
                if (j >= 0 && weights[i][static_cast<size_t>(j)] > 0.0) {
                    result.matches.emplace_back(prev.clusters[i].id, static_cast<size_t>(j));
                    matched[static_cast<size_t>(j)] = true;
                }
            }
            std::sort(result.matches.begin(), result.matches.end(),
                      [](const auto& a, const auto& b) { return a.second < b.second; });
        }
    }

    for (size_t j = 0; j < curr.size(); ++j) {
        if (!matched[j]) result.new_ids.emplace(j, ids.fresh());
    }
    return result;
}

void apply_links(const LinkResult& result, std::vector<Cluster>& curr) {
    for (const auto& [id, index] : result.matches) curr[index].id = id;
    for (const auto& [index, id] : result.new_ids) curr[index].id = id;
}

}  // namespace evd
