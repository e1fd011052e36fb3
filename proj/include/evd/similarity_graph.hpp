#pragma once
// Per-tick weighted entity graph: trending entities as nodes, in-window
// cosine similarities above the minimum threshold S as edges.

#include <cstdint>
#include <vector>

#include "evd/cooccurrence.hpp"
#include "evd/core.hpp"
#include "evd/tables.hpp"
#include "evd/trend_detector.hpp"

namespace evd {

struct GraphEdge {
    uint32_t a = 0;  // node indices, a < b
    uint32_t b = 0;
    double weight = 0.0;
};

struct EntityGraph {
    std::vector<EntityId> nodes;      // ascending by (text, kind)
    std::vector<uint64_t> node_freq;  // in-window frequency, aligned with nodes
    std::vector<GraphEdge> edges;     // no self-loops, sorted by (a, b)

    size_t node_count() const { return nodes.size(); }
    size_t edge_count() const { return edges.size(); }
    // Adjacency as (neighbor index, weight) lists, built on demand.
    std::vector<std::vector<std::pair<uint32_t, double>>> adjacency() const;
};

// Pure function of (store snapshot, S, trend snapshot). Nodes are currently
// trending entities with in-window frequency > 0; edges keep pairs whose
// cosine is strictly greater than S.
EntityGraph build_graph(const CooccurrenceStore& store, double min_similarity,
                        const TrendSnapshot& trending, const EntityTable& entities);

}  // namespace evd
