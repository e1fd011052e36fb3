#include "evd/core.hpp"

#include <algorithm>
#include <cctype>

namespace evd {

std::string_view to_string(EntityKind kind) {
    switch (kind) {
        case EntityKind::hashtag: return "hashtag";
        case EntityKind::named_entity: return "named_entity";
        case EntityKind::custom: return "custom";
    }
    return "named_entity";
}

std::optional<EntityKind> entity_kind_from_string(std::string_view s) {
    if (s == "hashtag") return EntityKind::hashtag;
    if (s == "named_entity") return EntityKind::named_entity;
    if (s == "custom") return EntityKind::custom;
    return std::nullopt;
}

std::optional<Entity> normalize_entity(EntityKind kind, std::string_view raw) {
    size_t begin = 0;
    size_t end = raw.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(raw[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(raw[end - 1]))) --end;
    if (begin == end) return std::nullopt;

    std::string text;
    text.reserve(end - begin);
    for (size_t i = begin; i < end; ++i) {
        text.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i]))));
    }
    return Entity{kind, std::move(text)};
}

void Document::canonicalize_entities() {
    std::sort(entities.begin(), entities.end());
    entities.erase(std::unique(entities.begin(), entities.end()), entities.end());
}

std::optional<Cluster> Cluster::make(std::vector<Entity> entities, std::vector<uint64_t> freqs,
                                     std::string id) {
    if (entities.size() < 2 || entities.size() != freqs.size()) return std::nullopt;
    Cluster c;
    c.id = std::move(id);
    c.entities = std::move(entities);
    c.freqs = std::move(freqs);
    for (uint64_t f : c.freqs) c.rank_score += static_cast<double>(f);
    return c;
}

uint64_t Cluster::total_frequency() const {
    uint64_t total = 0;
    for (uint64_t f : freqs) total += f;
    return total;
}

bool Cluster::contains(const Entity& e) const {
    return std::binary_search(entities.begin(), entities.end(), e);
}

std::string_view to_string(ClusteringBackend b) {
    return b == ClusteringBackend::louvain ? "louvain" : "connected_components";
}

std::optional<ClusteringBackend> backend_from_string(std::string_view s) {
    if (s == "louvain") return ClusteringBackend::louvain;
    if (s == "connected_components" || s == "cc") return ClusteringBackend::connected_components;
    return std::nullopt;
}

std::optional<std::string> EngineConfig::validate() const {
    if (min_similarity < 0.0 || min_similarity > 1.0) return "min_similarity must be in [0,1]";
    if (resolution <= 0.0) return "resolution must be > 0";
    if (window < 1) return "window must be >= 1 minute";
    if (link_threshold < 0.0 || link_threshold > 1.0) return "link_threshold must be in [0,1]";
    if (short_window < 1) return "short_window must be >= 1 minute";
    if (long_window <= short_window) return "long_window must be > short_window";
    if (trends_top_k < 1) return "trends_top_k must be positive";
    if (shed_queue_limit < 1) return "shed_queue_limit must be positive";
    return std::nullopt;
}

}  // namespace evd
