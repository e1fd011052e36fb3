#include "evd/trend_detector.hpp"

#include <algorithm>
#include <cmath>

namespace evd {

TrendSnapshot::TrendSnapshot(int64_t tick,
                             std::map<DomainId, std::vector<std::pair<EntityId, double>>> ranked)
    : tick_(tick), per_domain_(std::move(ranked)) {
    for (const auto& [d, list] : per_domain_) {
        auto& set = trending_[d];
        set.reserve(list.size());
        for (const auto& [e, score] : list) set.insert(e);
    }
}

bool TrendSnapshot::is_trending(DomainId d, EntityId e) const {
    auto it = trending_.find(d);
    return it != trending_.end() && it->second.contains(e);
}

std::vector<EntityId> TrendSnapshot::all_trending() const {
    std::vector<EntityId> out;
    for (const auto& [d, list] : per_domain_) {
        for (const auto& [e, score] : list) out.push_back(e);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

TrendDetector::TrendDetector(TrendParams params, std::shared_ptr<EntityTable> entities)
    : params_(params), entities_(std::move(entities)) {}

void TrendDetector::ingest(int64_t tick, DomainId domain, AuthorId author,
                           std::span<const EntityId> entities) {
    std::lock_guard<std::mutex> lock(mu_);
    if (last_tick_ != INT64_MIN && tick <= last_tick_ - params_.long_window) {
        return;  // beyond the long window, nothing to count
    }

    auto [bucket_it, created] = buckets_.try_emplace(tick);
    Bucket& bucket = bucket_it->second;
    if (created) {
        bucket.in_short = last_tick_ == INT64_MIN || tick > last_tick_ - params_.short_window;
    }

    auto& domain_throttle = throttle_[domain];
    for (EntityId e : entities) {
        uint64_t ae = (static_cast<uint64_t>(author) << 32) | e;
        auto [t_it, fresh] = domain_throttle.try_emplace(ae, tick);
        if (!fresh) {
            if (t_it->second > tick - params_.short_window) {
                ++throttled_;
                continue;
            }
            t_it->second = tick;
        }

        uint64_t key = de_key(domain, e);
        ++bucket.counts[key];
        ++bucket.totals[domain];
        ++long_counts_[key];
        ++long_totals_[domain];
        if (bucket.in_short) {
            ++short_counts_[key];
            ++short_totals_[domain];
        }
    }
}

std::optional<double> TrendDetector::expected_locked(DomainId d, EntityId e) const {
    auto total_it = long_totals_.find(d);
    if (total_it == long_totals_.end() || total_it->second == 0) return std::nullopt;
    double n_l_domain = static_cast<double>(total_it->second);
    double n_s_domain = 0.0;
    if (auto it = short_totals_.find(d); it != short_totals_.end()) {
        n_s_domain = static_cast<double>(it->second);
    }
    double n_l_entity = 0.0;
    if (auto it = long_counts_.find(de_key(d, e)); it != long_counts_.end()) {
        n_l_entity = static_cast<double>(it->second);
    }
    return n_s_domain / n_l_domain * n_l_entity;
}

std::optional<double> TrendDetector::expected_count(DomainId d, EntityId e) const {
    std::lock_guard<std::mutex> lock(mu_);
    return expected_locked(d, e);
}

std::optional<double> TrendDetector::score(DomainId d, EntityId e) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto expected = expected_locked(d, e);
    if (!expected) return std::nullopt;
    double observed = 0.0;
    if (auto it = short_counts_.find(de_key(d, e)); it != short_counts_.end()) {
        observed = static_cast<double>(it->second);
    }
    return observed / (*expected + 1.0);
}

TrendSnapshot TrendDetector::trend_tick(int64_t tick) {
    std::lock_guard<std::mutex> lock(mu_);
    last_tick_ = tick;

    // Evict buckets past the long window; demote those past the short one.
    for (auto it = buckets_.begin(); it != buckets_.end();) {
        Bucket& b = it->second;
        if (it->first <= tick - params_.long_window) {
            for (const auto& [key, count] : b.counts) {
                auto lc = long_counts_.find(key);
                if ((lc->second -= count) == 0) long_counts_.erase(lc);
                if (b.in_short) {
                    auto sc = short_counts_.find(key);
                    if ((sc->second -= count) == 0) short_counts_.erase(sc);
                }
            }
            for (const auto& [d, total] : b.totals) {
                auto lt = long_totals_.find(d);
                if ((lt->second -= total) == 0) long_totals_.erase(lt);
                if (b.in_short) {
                    auto st = short_totals_.find(d);
                    if ((st->second -= total) == 0) short_totals_.erase(st);
                }
            }
            it = buckets_.erase(it);
        } else {
            if (b.in_short && it->first <= tick - params_.short_window) {
                for (const auto& [key, count] : b.counts) {
                    auto sc = short_counts_.find(key);
                    if ((sc->second -= count) == 0) short_counts_.erase(sc);
                }
                for (const auto& [d, total] : b.totals) {
                    auto st = short_totals_.find(d);
                    if ((st->second -= total) == 0) short_totals_.erase(st);
                }
                b.in_short = false;
            }
            ++it;
        }
    }

    // Throttle entries older than the short window can never suppress again.
    for (auto& [d, map] : throttle_) {
        for (auto it = map.begin(); it != map.end();) {
            if (it->second <= tick - params_.short_window) {
                it = map.erase(it);
            } else {
                ++it;
            }
        }
    }

    // Score everything with a nonzero short-window count.
    std::map<DomainId, std::vector<std::pair<EntityId, double>>> ranked;
    for (const auto& [key, observed] : short_counts_) {
        DomainId d = static_cast<DomainId>(key >> 32);
        EntityId e = static_cast<EntityId>(key & 0xffffffffULL);
        auto expected = expected_locked(d, e);
        if (!expected) continue;
        double s = static_cast<double>(observed) / (*expected + 1.0);
        ranked[d].emplace_back(e, s);
    }
    for (auto& [d, list] : ranked) {
        std::sort(list.begin(), list.end(), [&](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return entities_->entity(a.first).text < entities_->entity(b.first).text;
        });
        if (list.size() > static_cast<size_t>(params_.top_k)) {
            list.resize(static_cast<size_t>(params_.top_k));
        }
    }
    return TrendSnapshot(tick, std::move(ranked));
}

uint64_t TrendDetector::throttled() const {
    std::lock_guard<std::mutex> lock(mu_);
    return throttled_;
}

uint64_t TrendDetector::short_count(DomainId d, EntityId e) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = short_counts_.find(de_key(d, e));
    return it == short_counts_.end() ? 0 : it->second;
}

uint64_t TrendDetector::long_count(DomainId d, EntityId e) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = long_counts_.find(de_key(d, e));
    return it == long_counts_.end() ? 0 : it->second;
}

uint64_t TrendDetector::short_total(DomainId d) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = short_totals_.find(d);
    return it == short_totals_.end() ? 0 : it->second;
}

uint64_t TrendDetector::long_total(DomainId d) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = long_totals_.find(d);
    return it == long_totals_.end() ? 0 : it->second;
}

}  // namespace evd
