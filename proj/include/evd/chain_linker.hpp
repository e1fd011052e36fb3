#pragma once
// Minute-to-minute cluster linking: thresholded maximum-weight bipartite
// matching between the previous snapshot's clusters and the current ones,
// with chain id propagation.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evd/core.hpp"

namespace evd {

// Set cosine |a n b| / sqrt(|a|*|b|) over sorted entity vectors.
// nullopt when either set is empty.
std::optional<double> cluster_overlap(const std::vector<Entity>& a, const std::vector<Entity>& b);

// Exact maximum-weight assignment on a (possibly rectangular) non-negative
// weight matrix; missing pairs are zero. Returns row -> column, or -1 for
// rows matched to a padding column.
std::vector<int> max_weight_assignment(const std::vector<std::vector<double>>& weights);

class ChainIdGenerator {
public:
    std::string fresh() {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "c%08llu", static_cast<unsigned long long>(next_++));
        return buf;
    }

private:
    uint64_t next_ = 1;
};

// One qualifying bipartite edge: the clusters share entities and the overlap
// clears the threshold.
struct LinkCandidate {
    std::string prev_cluster_id;
    size_t curr_index = 0;
    double weight = 0.0;
};

std::vector<LinkCandidate> link_candidates(const ClusterSnapshot& prev,
                                           const std::vector<Cluster>& curr, double threshold);

struct LinkResult {
    // (previous chain id, current cluster index); a valid matching.
    std::vector<std::pair<std::string, size_t>> matches;
    std::map<size_t, std::string> new_ids;  // unmatched current clusters

    std::optional<std::string> id_for(size_t curr_index) const;
};

// Builds overlap edges (weight > 0 and >= threshold), finds the
// maximum-total-weight matching, and assigns ids: matched clusters inherit
// the previous id, the rest draw fresh ids from `ids` in index order.
LinkResult link(const ClusterSnapshot& prev, const std::vector<Cluster>& curr, double threshold,
                ChainIdGenerator& ids);

// Writes the result's ids onto the clusters.
void apply_links(const LinkResult& result, std::vector<Cluster>& curr);

}  // namespace evd
