#include "evd/similarity_graph.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace evd {

std::vector<std::vector<std::pair<uint32_t, double>>> EntityGraph::adjacency() const {
    std::vector<std::vector<std::pair<uint32_t, double>>> adj(nodes.size());
    for (const GraphEdge& e : edges) {
        adj[e.a].emplace_back(e.b, e.weight);
        adj[e.b].emplace_back(e.a, e.weight);
    }
    return adj;
}

EntityGraph build_graph(const CooccurrenceStore& store, double min_similarity,
                        const TrendSnapshot& trending, const EntityTable& entities) {
    EntityGraph g;
    for (EntityId e : trending.all_trending()) {
        if (store.frequency(e) > 0) g.nodes.push_back(e);
    }
    std::sort(g.nodes.begin(), g.nodes.end(), [&](EntityId a, EntityId b) {
        return entities.entity(a) < entities.entity(b);
    });

    std::unordered_map<EntityId, uint32_t> index;
    index.reserve(g.nodes.size());
    g.node_freq.resize(g.nodes.size());
    for (uint32_t i = 0; i < g.nodes.size(); ++i) {
        index.emplace(g.nodes[i], i);
        g.node_freq[i] = store.frequency(g.nodes[i]);
    }

    store.for_each_pair([&](EntityId a, EntityId b, uint64_t pair) {
        auto ia = index.find(a);
        auto ib = index.find(b);
        if (ia == index.end() || ib == index.end()) return;
        double cosine = static_cast<double>(pair) /
                        std::sqrt(static_cast<double>(g.node_freq[ia->second]) *
                                  static_cast<double>(g.node_freq[ib->second]));
        if (cosine > min_similarity) {
            uint32_t u = ia->second, v = ib->second;
            if (u > v) std::swap(u, v);
            g.edges.push_back({u, v, cosine});
        }
    });
    std::sort(g.edges.begin(), g.edges.end(), [](const GraphEdge& x, const GraphEdge& y) {
        return x.a != y.a ? x.a < y.a : x.b < y.b;
    });
    return g;
}

}  // namespace evd
