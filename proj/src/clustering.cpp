#include "evd/clustering.hpp"

#include <algorithm>
#include <random>
#include <unordered_map>

namespace evd {

namespace {

constexpr double kMoveTolerance = 1e-9;

// Aggregated multigraph carried between Louvain levels. Self-loops hold the
// intra-community weight collapsed at the previous level; degree counts a
// self-loop twice so that sum(degree) == 2m at every level.
struct WorkGraph {
    std::vector<std::vector<std::pair<uint32_t, double>>> adj;
    std::vector<double> selfloop;
    std::vector<double> degree;
    double total_weight = 0.0;  // m

    size_t size() const { return adj.size(); }
};

WorkGraph from_entity_graph(const EntityGraph& g) {
    WorkGraph wg;
    wg.adj.resize(g.node_count());
    wg.selfloop.assign(g.node_count(), 0.0);
    wg.degree.assign(g.node_count(), 0.0);
    for (const GraphEdge& e : g.edges) {
        wg.adj[e.a].emplace_back(e.b, e.weight);
        wg.adj[e.b].emplace_back(e.a, e.weight);
        wg.degree[e.a] += e.weight;
        wg.degree[e.b] += e.weight;
        wg.total_weight += e.weight;
    }
    return wg;
}

std::vector<uint32_t> shuffled_order(size_t n, std::mt19937_64& rng) {
    std::vector<uint32_t> order(n);
    for (size_t i = 0; i < n; ++i) order[i] = static_cast<uint32_t>(i);
    for (size_t i = n; i > 1; --i) {
        size_t j = static_cast<size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    return order;
}

// Local move passes starting from the given assignment, repeated until no
// move improves Q_R beyond the tolerance. Candidate targets are the neighbor
// communities plus an empty one (splitting back out). Returns true if any
// node moved.
bool one_level(const WorkGraph& wg, double resolution, std::mt19937_64& rng,
               std::vector<uint32_t>& community_of) {
    const size_t n = wg.size();
    const double m2 = 2.0 * wg.total_weight;
    std::vector<double> tot(n, 0.0);
    std::vector<uint32_t> size(n, 0);
    for (size_t u = 0; u < n; ++u) {
        tot[community_of[u]] += wg.degree[u];
        ++size[community_of[u]];
    }
    if (m2 <= 0.0) return false;

    std::vector<uint32_t> order = shuffled_order(n, rng);
    std::vector<double> weight_to(n, 0.0);
    std::vector<uint32_t> touched;
    std::vector<uint32_t> free_ids;
    for (uint32_t c = 0; c < n; ++c) {
        if (size[c] == 0) free_ids.push_back(c);
    }
    bool any_move = false;
    bool moved = true;
    while (moved) {
        moved = false;
        for (uint32_t u : order) {
            uint32_t current = community_of[u];
            touched.clear();
            for (const auto& [v, w] : wg.adj[u]) {
                uint32_t c = community_of[v];
                if (weight_to[c] == 0.0) touched.push_back(c);
                weight_to[c] += w;
            }
            std::sort(touched.begin(), touched.end());

            tot[current] -= wg.degree[u];
            double stay_gain = weight_to[current] - resolution * wg.degree[u] * tot[current] / m2;
            uint32_t best = current;
            double best_gain = stay_gain;
            for (uint32_t c : touched) {
                if (c == current) continue;
                double gain = weight_to[c] - resolution * wg.degree[u] * tot[c] / m2;
                if (gain > best_gain) {
                    best_gain = gain;
                    best = c;
                }
            }
            // splitting out into an empty community gains exactly 0
            if (size[current] > 1 && !free_ids.empty() && best_gain < 0.0) {
                best = free_ids.back();
                best_gain = 0.0;
            }

            // Q_R improvement of the best move, in modularity units.
            if (best != current && (best_gain - stay_gain) / wg.total_weight > kMoveTolerance) {
                community_of[u] = best;
                tot[best] += wg.degree[u];
                if (size[best] == 0) free_ids.pop_back();
                ++size[best];
                if (--size[current] == 0) free_ids.push_back(current);
                moved = true;
                any_move = true;
            } else {
                tot[current] += wg.degree[u];
            }
            for (uint32_t c : touched) weight_to[c] = 0.0;
        }
    }
    return any_move;
}

// Renumbers communities contiguously in first-seen node order.
uint32_t compact(std::vector<uint32_t>& community_of) {
    std::unordered_map<uint32_t, uint32_t> remap;
    remap.reserve(community_of.size());
    for (uint32_t& c : community_of) {
        auto [it, fresh] = remap.emplace(c, static_cast<uint32_t>(remap.size()));
        c = it->second;
    }
    return static_cast<uint32_t>(remap.size());
}

WorkGraph aggregate(const WorkGraph& wg, const std::vector<uint32_t>& community_of,
                    uint32_t community_count) {
    WorkGraph out;
    out.adj.resize(community_count);
    out.selfloop.assign(community_count, 0.0);
    out.degree.assign(community_count, 0.0);
    out.total_weight = wg.total_weight;

    std::vector<std::unordered_map<uint32_t, double>> between(community_count);
    for (size_t u = 0; u < wg.size(); ++u) {
        uint32_t cu = community_of[u];
        out.selfloop[cu] += wg.selfloop[u];
        for (const auto& [v, w] : wg.adj[u]) {
            if (v < u) continue;  // each undirected edge once
            uint32_t cv = community_of[v];
            if (cu == cv) {
                out.selfloop[cu] += w;
            } else {
                between[std::min(cu, cv)][std::max(cu, cv)] += w;
            }
        }
    }
    for (uint32_t c = 0; c < community_count; ++c) {
        out.degree[c] += 2.0 * out.selfloop[c];
        std::vector<std::pair<uint32_t, double>> items(between[c].begin(), between[c].end());
        std::sort(items.begin(), items.end());
        for (const auto& [d, w] : items) {
            out.adj[c].emplace_back(d, w);
            out.adj[d].emplace_back(c, w);
            out.degree[c] += w;
            out.degree[d] += w;
        }
    }
    return out;
}

}  // namespace

double modularity(const EntityGraph& g, const std::vector<uint32_t>& community_of,
                  double resolution) {
    double m = 0.0;
    for (const GraphEdge& e : g.edges) m += e.weight;
    if (m <= 0.0) return 0.0;

    uint32_t communities = 0;
    for (uint32_t c : community_of) communities = std::max(communities, c + 1);
    std::vector<double> internal(communities, 0.0);
    std::vector<double> tot(communities, 0.0);
    for (const GraphEdge& e : g.edges) {
        tot[community_of[e.a]] += e.weight;
        tot[community_of[e.b]] += e.weight;
        if (community_of[e.a] == community_of[e.b]) internal[community_of[e.a]] += e.weight;
    }
    double q = 0.0;
    for (uint32_t c = 0; c < communities; ++c) {
        double share = tot[c] / (2.0 * m);
        q += internal[c] / m - resolution * share * share;
    }
    return q;
}

namespace {

// Aggregation rounds on top of the current assignment: communities become
// supernodes which are then moved as wholes, level after level. Returns true
// if anything merged.
bool hierarchical_rounds(const WorkGraph& base, double resolution, std::mt19937_64& rng,
                         std::vector<uint32_t>& assignment, uint32_t count) {
    bool merged = false;
    WorkGraph wg = aggregate(base, assignment, count);
    std::vector<uint32_t> coarse(wg.size());
    for (uint32_t i = 0; i < wg.size(); ++i) coarse[i] = i;

    while (true) {
        std::vector<uint32_t> level(wg.size());
        for (uint32_t i = 0; i < wg.size(); ++i) level[i] = i;
        bool improved = one_level(wg, resolution, rng, level);
        uint32_t next = compact(level);
        if (!improved || next == wg.size()) break;
        for (uint32_t& c : coarse) c = level[c];
        merged = true;
        wg = aggregate(wg, level, next);
    }
    if (merged) {
        for (uint32_t& a : assignment) a = coarse[a];
    }
    return merged;
}

// Splits every community into its connected parts within the community's
// induced subgraph. Single-node moves cannot always reach this state from a
// random initial partition, yet separating parts with no edges between them
// never lowers Q_R (the null-model penalty only shrinks) and keeps every
// community inside one connected component. Returns true if anything split.
bool split_disconnected_communities(const WorkGraph& wg, std::vector<uint32_t>& assignment) {
    const size_t n = wg.size();
    std::vector<uint32_t> part(n, UINT32_MAX);
    uint32_t next = 0;
    std::vector<uint32_t> stack;
    for (uint32_t start = 0; start < n; ++start) {
        if (part[start] != UINT32_MAX) continue;
        uint32_t id = next++;
        part[start] = id;
        stack.push_back(start);
        while (!stack.empty()) {
            uint32_t u = stack.back();
            stack.pop_back();
            for (const auto& [v, w] : wg.adj[u]) {
                if (assignment[v] == assignment[u] && part[v] == UINT32_MAX) {
                    part[v] = id;
                    stack.push_back(v);
                }
            }
        }
    }
    // report a change in the grouping itself, not in the labels
    std::vector<uint32_t> before = assignment;
    compact(before);
    std::vector<uint32_t> after = part;
    compact(after);
    assignment = std::move(part);
    return before != after;
}

Partition louvain_once(const EntityGraph& g, double resolution, std::mt19937_64& rng,
                       std::vector<uint32_t> assignment) {
    Partition p;

    WorkGraph base = from_entity_graph(g);
    // Alternate finest-level move passes, hierarchical merges, and splitting
    // of disconnected communities until none of them changes anything. Every
    // change is Q_R non-decreasing (moves strictly increase it), so this
    // terminates; at exit no single-node move helps.
    while (true) {
        bool fine = one_level(base, resolution, rng, assignment);
        uint32_t count = compact(assignment);
        bool coarse = hierarchical_rounds(base, resolution, rng, assignment, count);
        compact(assignment);
        bool split = split_disconnected_communities(base, assignment);
        compact(assignment);
        if (!fine && !coarse && !split) break;
    }

    p.community_of = std::move(assignment);
    p.community_count = compact(p.community_of);
    p.modularity = modularity(g, p.community_of, resolution);
    return p;
}

// Greedy local moves only ever improve, so the reachable partitions depend
// on where an attempt starts and in what order nodes are visited. The first
// attempt is the canonical all-singletons start; later attempts reshuffle
// and begin from random partitions. Keeping the first best attempt
// preserves determinism per seed.
constexpr int kLouvainRestarts = 32;

}  // namespace

Partition louvain(const EntityGraph& g, double resolution, uint64_t seed) {
    const size_t n = g.node_count();
    if (n == 0) return {};
    std::mt19937_64 rng(seed);

    std::vector<uint32_t> singletons(n);
    for (size_t i = 0; i < n; ++i) singletons[i] = static_cast<uint32_t>(i);
    Partition best = louvain_once(g, resolution, rng, singletons);

    for (int attempt = 1; attempt < kLouvainRestarts; ++attempt) {
        std::vector<uint32_t> init(n);
        for (size_t i = 0; i < n; ++i) init[i] = static_cast<uint32_t>(rng() % n);
        Partition candidate = louvain_once(g, resolution, rng, std::move(init));
        if (candidate.modularity > best.modularity) best = std::move(candidate);
    }
    return best;
}

Partition connected_components(const EntityGraph& g) {
    Partition p;
    const size_t n = g.node_count();
    p.community_of.assign(n, UINT32_MAX);
    auto adj = g.adjacency();

    uint32_t next = 0;
    std::vector<uint32_t> stack;
    for (uint32_t start = 0; start < n; ++start) {
        if (p.community_of[start] != UINT32_MAX) continue;
        uint32_t c = next++;
        p.community_of[start] = c;
        stack.push_back(start);
        while (!stack.empty()) {
            uint32_t u = stack.back();
            stack.pop_back();
            for (const auto& [v, w] : adj[u]) {
                if (p.community_of[v] == UINT32_MAX) {
                    p.community_of[v] = c;
                    stack.push_back(v);
                }
            }
        }
    }
    p.community_count = next;
    p.modularity = modularity(g, p.community_of, 1.0);
    return p;
}

std::vector<Cluster> to_clusters(const Partition& p, const EntityGraph& g,
                                 const EntityTable& entities) {
    std::vector<std::vector<uint32_t>> members(p.community_count);
    for (uint32_t i = 0; i < p.community_of.size(); ++i) {
        members[p.community_of[i]].push_back(i);
    }
    std::vector<Cluster> clusters;
    for (const auto& nodes : members) {
        if (nodes.size() < 2) continue;
        std::vector<Entity> ents;
        std::vector<uint64_t> freqs;
        ents.reserve(nodes.size());
        freqs.reserve(nodes.size());
        for (uint32_t i : nodes) {
            ents.push_back(entities.entity(g.nodes[i]));
            freqs.push_back(g.node_freq[i]);
        }
        // callers may hand over graphs whose node order is not canonical
        std::vector<size_t> idx(ents.size());
        for (size_t k = 0; k < idx.size(); ++k) idx[k] = k;
        std::sort(idx.begin(), idx.end(),
                  [&](size_t x, size_t y) { return ents[x] < ents[y]; });
        std::vector<Entity> sorted_ents;
        std::vector<uint64_t> sorted_freqs;
        for (size_t k : idx) {
            sorted_ents.push_back(std::move(ents[k]));
            sorted_freqs.push_back(freqs[k]);
        }
        auto cluster = Cluster::make(std::move(sorted_ents), std::move(sorted_freqs));
        if (cluster) clusters.push_back(std::move(*cluster));
    }
    return clusters;
}

}  // namespace evd
