#pragma once
// Core domain vocabulary shared by every pipeline stage.
// All types here are immutable value types once constructed.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace evd {

enum class EntityKind : uint8_t { hashtag, named_entity, custom };

std::string_view to_string(EntityKind kind);
std::optional<EntityKind> entity_kind_from_string(std::string_view s);

// A normalized tag extracted from a document: (kind, case-folded trimmed text).
struct Entity {
    EntityKind kind = EntityKind::named_entity;
    std::string text;

    bool operator==(const Entity&) const = default;
    // Ordered by text first so listings read alphabetically.
    bool operator<(const Entity& other) const {
        if (text != other.text) return text < other.text;
        return kind < other.kind;
    }
};

struct EntityHash {
    size_t operator()(const Entity& e) const noexcept {
        size_t h = std::hash<std::string>{}(e.text);
        return h ^ (static_cast<size_t>(e.kind) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    }
};

// Case-fold (ASCII) and trim; returns nullopt when nothing is left.
std::optional<Entity> normalize_entity(EntityKind kind, std::string_view raw);

// Minute bucket index for an epoch-millisecond timestamp.
constexpr int64_t kMillisPerTick = 60000;
constexpr int64_t tick_of(int64_t ts_ms, int64_t millis_per_tick = kMillisPerTick) {
    return ts_ms / millis_per_tick;
}

// One stream unit: a timestamped bag of entities with attribution.
struct Document {
    std::string id;
    int64_t ts_ms = 0;
    std::string author_id;
    std::string domain;
    std::vector<Entity> entities;  // sorted, deduplicated

    // Sorts and deduplicates the entity set in place.
    void canonicalize_entities();
};

// A community of >= 2 entities representing one event at one minute.
struct Cluster {
    std::string id;                    // chain identifier, assigned by the linker
    std::vector<Entity> entities;      // sorted
    std::vector<uint64_t> freqs;       // window frequency per entity, aligned
    double rank_score = 0.0;           // aggregate popularity

    // Rejects singleton (or empty) entity sets and mismatched metadata.
    static std::optional<Cluster> make(std::vector<Entity> entities, std::vector<uint64_t> freqs,
                                       std::string id = {});

    uint64_t total_frequency() const;
    bool contains(const Entity& e) const;
};

// The ranked cluster list for one minute.
struct ClusterSnapshot {
    int64_t tick = 0;
    std::vector<Cluster> clusters;     // rank_score desc, ties by id asc
    uint64_t dropped_documents = 0;
};

// Time-ordered clusters sharing one chain id: an evolving event.
struct ClusterChain {
    std::string id;
    std::vector<std::pair<int64_t, Cluster>> members;  // ticks strictly increasing

    int64_t first_tick() const { return members.empty() ? 0 : members.front().first; }
    int64_t last_tick() const { return members.empty() ? 0 : members.back().first; }
    int64_t duration() const { return last_tick() - first_tick(); }
};

enum class ClusteringBackend { louvain, connected_components };

std::string_view to_string(ClusteringBackend b);
std::optional<ClusteringBackend> backend_from_string(std::string_view s);

// Key system parameters (similarity threshold S, Louvain resolution R,
// co-occurrence window W, plus the trend and ingest knobs).
struct EngineConfig {
    double min_similarity = 0.1;       // S: edges with cosine <= S are dropped
    double resolution = 1.0;           // R: Louvain resolution
    int64_t window = 10;               // W: co-occurrence window, minutes
    double link_threshold = 0.3;       // cluster-link edges below this are dropped
    int64_t short_window = 5;          // trend short window, minutes
    int64_t long_window = 60;          // trend long window, minutes
    int64_t trends_top_k = 300;        // trending entities kept per domain
    int64_t shed_queue_limit = 100000; // ingest queue capacity

    // Returns a description of the first violated constraint, if any.
    std::optional<std::string> validate() const;
};

}  // namespace evd
