#pragma once
// Graph partitioning: Louvain modularity optimization with a resolution
// parameter, plus the connected-components baseline used for evaluation.

#include <cstdint>
#include <vector>

#include "evd/core.hpp"
#include "evd/similarity_graph.hpp"
#include "evd/tables.hpp"

namespace evd {

struct Partition {
    std::vector<uint32_t> community_of;  // aligned with graph nodes
    uint32_t community_count = 0;
    double modularity = 0.0;
};

// Resolution-parameterized modularity
//   Q_R = (1/2m) * sum_ij [w_ij - R * k_i * k_j / (2m)] * delta(c_i, c_j)
// (Reichardt-Bornholdt null-model scaling). Zero for an edgeless graph.
double modularity(const EntityGraph& g, const std::vector<uint32_t>& community_of,
                  double resolution);

// Multi-level Louvain. Deterministic for a fixed (graph, resolution, seed):
// nodes are visited in a seeded shuffle of the graph's canonical order, local
// moves keep the current community on ties, and passes stop once no move
// improves Q_R by more than 1e-9. Isolated nodes end up as singletons.
Partition louvain(const EntityGraph& g, double resolution, uint64_t seed);

// Communities are exactly the connected components (weights ignored).
Partition connected_components(const EntityGraph& g);

// One Cluster per community with >= 2 members, singletons dropped, window
// frequencies attached as metadata. Ids are left empty for the linker.
std::vector<Cluster> to_clusters(const Partition& p, const EntityGraph& g,
                                 const EntityTable& entities);

}  // namespace evd
