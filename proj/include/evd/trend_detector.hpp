#pragma once
// Long/short window (entity, domain) counting and expected-vs-observed
// anomaly scoring. Emits ranked per-domain trending entities each minute.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "evd/core.hpp"
#include "evd/tables.hpp"

namespace evd {

struct TrendParams {
    int64_t short_window = 5;   // minutes
    int64_t long_window = 60;   // minutes, > short_window
    int64_t top_k = 300;        // trending entities kept per domain
};

// Ranked trending entities per domain at one tick.
class TrendSnapshot {
public:
    TrendSnapshot() = default;
    TrendSnapshot(int64_t tick, std::map<DomainId, std::vector<std::pair<EntityId, double>>> ranked);

    int64_t tick() const { return tick_; }
    const std::map<DomainId, std::vector<std::pair<EntityId, double>>>& per_domain() const {
        return per_domain_;
    }
    bool has_domain(DomainId d) const { return per_domain_.contains(d); }
    bool is_trending(DomainId d, EntityId e) const;
    // Union of trending entities across domains, ascending by id.
    std::vector<EntityId> all_trending() const;
    bool empty() const { return per_domain_.empty(); }

private:
    int64_t tick_ = -1;
    std::map<DomainId, std::vector<std::pair<EntityId, double>>> per_domain_;
    std::unordered_map<DomainId, std::unordered_set<EntityId>> trending_;
};

// Sliding-window counter with per-author throttling. Safe for concurrent
// ingest; trend_tick must be called by a single driver.
class TrendDetector {
public:
    TrendDetector(TrendParams params, std::shared_ptr<EntityTable> entities);

    // Counts one document's entities into the minute bucket for `tick`.
    // A (author, domain, entity) triple contributes at most once per short
    // window; suppressed increments are visible via throttled().
    void ingest(int64_t tick, DomainId domain, AuthorId author, std::span<const EntityId> entities);

    // E(d,e) = N_s(d)/N_l(d) * N_l(d,e); nullopt when the domain has no
    // long-window history.
    std::optional<double> expected_count(DomainId d, EntityId e) const;

    // Smoothed anomaly ratio observed/(expected+1); nullopt when the domain
    // is not scorable.
    std::optional<double> score(DomainId d, EntityId e) const;

    // Advances the windows to `tick`, evicts expired buckets, and returns the
    // ranked per-domain snapshot.
    TrendSnapshot trend_tick(int64_t tick);

    uint64_t throttled() const;

    // Window count accessors (aggregates as of the last eviction boundary).
    uint64_t short_count(DomainId d, EntityId e) const;
    uint64_t long_count(DomainId d, EntityId e) const;
    uint64_t short_total(DomainId d) const;
    uint64_t long_total(DomainId d) const;

private:
    struct Bucket {
        std::unordered_map<uint64_t, uint64_t> counts;  // (domain,entity) -> count
        std::unordered_map<DomainId, uint64_t> totals;
        bool in_short = true;
    };

    static uint64_t de_key(DomainId d, EntityId e) {
        return (static_cast<uint64_t>(d) << 32) | e;
    }

    std::optional<double> expected_locked(DomainId d, EntityId e) const;

    TrendParams params_;
    std::shared_ptr<EntityTable> entities_;

    mutable std::mutex mu_;
    std::map<int64_t, Bucket> buckets_;
    std::unordered_map<uint64_t, uint64_t> short_counts_;
    std::unordered_map<uint64_t, uint64_t> long_counts_;
    std::unordered_map<DomainId, uint64_t> short_totals_;
    std::unordered_map<DomainId, uint64_t> long_totals_;
    // (author,entity) -> last contributing tick, per domain
    std::unordered_map<DomainId, std::unordered_map<uint64_t, int64_t>> throttle_;
    uint64_t throttled_ = 0;
    int64_t last_tick_ = INT64_MIN;
};

}  // namespace evd
