#pragma once
// Sliding-window entity frequencies and pairwise co-occurrence counts.
// Stores only scalar counts per entity and per unordered pair: for binary
// document-incidence vectors, cos(a,b) = pair(a,b) / sqrt(freq(a)*freq(b)),
// so the dense incidence encoding is never materialized.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "evd/core.hpp"
#include "evd/tables.hpp"

namespace evd {

class CooccurrenceStore {
public:
    // Documents with more filtered entities than this keep only their most
    // frequent in-window entities, capping the quadratic pair cost.
    static constexpr size_t kMaxEntitiesPerDocument = 64;

    CooccurrenceStore(int64_t window, std::shared_ptr<EntityTable> entities);

    // Counts one document's trend-filtered entity set into the bucket for
    // `tick`: every entity +1, every unordered pair +1.
    void update(int64_t tick, std::span<const EntityId> filtered);

    // Drops buckets older than current_tick - window + 1.
    void evict(int64_t current_tick);

    uint64_t frequency(EntityId e) const;
    uint64_t pair_count(EntityId a, EntityId b) const;

    // In-window cosine; nullopt when either entity has zero frequency.
    std::optional<double> cosine(EntityId a, EntityId b) const;
    std::optional<double> cosine(const Entity& a, const Entity& b) const;

    // Visits every in-window pair with a positive count.
    void for_each_pair(const std::function<void(EntityId, EntityId, uint64_t)>& fn) const;

    size_t pair_entries() const;

private:
    struct Bucket {
        std::unordered_map<EntityId, uint64_t> freq;
        std::unordered_map<uint64_t, uint64_t> pairs;
    };

    int64_t window_;
    std::shared_ptr<EntityTable> entities_;

    mutable std::mutex mu_;
    std::map<int64_t, Bucket> buckets_;
    std::unordered_map<EntityId, uint64_t> freq_agg_;
    std::unordered_map<uint64_t, uint64_t> pair_agg_;
};

}  // namespace evd
