#include "evd/cooccurrence.hpp"

#include <algorithm>
#include <cmath>

namespace evd {

CooccurrenceStore::CooccurrenceStore(int64_t window, std::shared_ptr<EntityTable> entities)
    : window_(window), entities_(std::move(entities)) {}

void CooccurrenceStore::update(int64_t tick, std::span<const EntityId> filtered) {
    if (filtered.empty()) return;
    std::lock_guard<std::mutex> lock(mu_);

    std::vector<EntityId> kept(filtered.begin(), filtered.end());
    if (kept.size() > kMaxEntitiesPerDocument) {
        std::sort(kept.begin(), kept.end(), [&](EntityId a, EntityId b) {
            uint64_t fa = 0, fb = 0;
            if (auto it = freq_agg_.find(a); it != freq_agg_.end()) fa = it->second;
            if (auto it = freq_agg_.find(b); it != freq_agg_.end()) fb = it->second;
            if (fa != fb) return fa > fb;
            return entities_->entity(a).text < entities_->entity(b).text;
        });
        kept.resize(kMaxEntitiesPerDocument);
    }

    Bucket& bucket = buckets_[tick];
    for (size_t i = 0; i < kept.size(); ++i) {
        ++bucket.freq[kept[i]];
        ++freq_agg_[kept[i]];
        for (size_t j = i + 1; j < kept.size(); ++j) {
            uint64_t key = pair_key(kept[i], kept[j]);
            ++bucket.pairs[key];
            ++pair_agg_[key];
        }
    }
}

void CooccurrenceStore::evict(int64_t current_tick) {
    std::lock_guard<std::mutex> lock(mu_);
    while (!buckets_.empty() && buckets_.begin()->first < current_tick - window_ + 1) {
        const Bucket& bucket = buckets_.begin()->second;
        for (const auto& [e, count] : bucket.freq) {
            auto it = freq_agg_.find(e);
            if ((it->second -= count) == 0) freq_agg_.erase(it);
        }
        for (const auto& [key, count] : bucket.pairs) {
            auto it = pair_agg_.find(key);
            if ((it->second -= count) == 0) pair_agg_.erase(it);
        }
        buckets_.erase(buckets_.begin());
    }
}

uint64_t CooccurrenceStore::frequency(EntityId e) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = freq_agg_.find(e);
    return it == freq_agg_.end() ? 0 : it->second;
}

uint64_t CooccurrenceStore::pair_count(EntityId a, EntityId b) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = pair_agg_.find(pair_key(a, b));
    return it == pair_agg_.end() ? 0 : it->second;
}

std::optional<double> CooccurrenceStore::cosine(EntityId a, EntityId b) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto fa = freq_agg_.find(a);
    auto fb = freq_agg_.find(b);
    if (fa == freq_agg_.end() || fb == freq_agg_.end()) return std::nullopt;
    if (a == b) return 1.0;
    uint64_t pair = 0;
    if (auto it = pair_agg_.find(pair_key(a, b)); it != pair_agg_.end()) pair = it->second;
    return static_cast<double>(pair) /
           std::sqrt(static_cast<double>(fa->second) * static_cast<double>(fb->second));
}

std::optional<double> CooccurrenceStore::cosine(const Entity& a, const Entity& b) const {
    auto ia = entities_->find(a);
    auto ib = entities_->find(b);
    if (!ia || !ib) return std::nullopt;
    return cosine(*ia, *ib);
}

void CooccurrenceStore::for_each_pair(
    const std::function<void(EntityId, EntityId, uint64_t)>& fn) const {
    std::lock_guard<std::mutex> lock(mu_);
    for (const auto& [key, count] : pair_agg_) {
        auto [a, b] = unpack_pair(key);
        fn(a, b, count);
    }
}

size_t CooccurrenceStore::pair_entries() const {
    std::lock_guard<std::mutex> lock(mu_);
    return pair_agg_.size();
}

}  // namespace evd
