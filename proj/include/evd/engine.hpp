#pragma once
// End-to-end pipeline: ingestion with trend filtering, the per-minute tick
// (evict -> trends -> graph -> cluster -> link -> rank -> persist), bounded
// ingest queue with load shedding, and chain bookkeeping.

#include <atomic>
#include <cstdint>
#include <deque>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "evd/chain_linker.hpp"
#include "evd/clustering.hpp"
#include "evd/cooccurrence.hpp"
#include "evd/core.hpp"
#include "evd/similarity_graph.hpp"
#include "evd/tables.hpp"
#include "evd/trend_detector.hpp"

namespace evd {

enum class SubmitResult { accepted, shed, stopped };

// Bounded document queue. Producers are never blocked: a full queue sheds.
class IngestQueue {
public:
    explicit IngestQueue(size_t capacity) : capacity_(capacity) {}

    bool try_push(Document doc) {
        std::lock_guard<std::mutex> lock(mu_);
        if (queue_.size() >= capacity_) return false;
        queue_.push_back(std::move(doc));
        return true;
    }

    std::optional<Document> try_pop() {
        std::lock_guard<std::mutex> lock(mu_);
        if (queue_.empty()) return std::nullopt;
        Document doc = std::move(queue_.front());
        queue_.pop_front();
        return doc;
    }

    size_t size() const {
        std::lock_guard<std::mutex> lock(mu_);
        return queue_.size();
    }
    size_t capacity() const { return capacity_; }

private:
    mutable std::mutex mu_;
    std::deque<Document> queue_;
    size_t capacity_;
};

class SnapshotSink {
public:
    virtual ~SnapshotSink() = default;
    virtual bool append(const ClusterSnapshot& snapshot) = 0;
};

class JsonlFileSink : public SnapshotSink {
public:
    // Throws std::runtime_error when the file cannot be opened.
    explicit JsonlFileSink(const std::string& path);
    ~JsonlFileSink() override;
    bool append(const ClusterSnapshot& snapshot) override;

private:
    FILE* file_ = nullptr;
};

class MemorySink : public SnapshotSink {
public:
    bool append(const ClusterSnapshot& snapshot) override {
        snapshots.push_back(snapshot);
        return true;
    }
    std::vector<ClusterSnapshot> snapshots;
};

// Retry-safe persistence: a tick already appended is never appended again.
class SnapshotWriter {
public:
    explicit SnapshotWriter(SnapshotSink& sink) : sink_(sink) {}

    bool persist(const ClusterSnapshot& snapshot) {
        if (snapshot.tick <= last_tick_) return true;
        if (!sink_.append(snapshot)) return false;
        last_tick_ = snapshot.tick;
        return true;
    }

private:
    SnapshotSink& sink_;
    int64_t last_tick_ = INT64_MIN;
};

// Sorted by aggregate member frequency descending, ties by id ascending.
std::vector<Cluster> rank_clusters(std::vector<Cluster> clusters);

struct StageTimings {
    int64_t evict_ns = 0;
    int64_t trend_ns = 0;
    int64_t graph_ns = 0;
    int64_t cluster_ns = 0;
    int64_t link_ns = 0;
    int64_t persist_ns = 0;
    size_t ticks = 0;
};

struct EngineOptions {
    ClusteringBackend backend = ClusteringBackend::louvain;
    uint64_t seed = 42;
    // Documents rejected here never reach the counters (stand-in for the
    // quality/sensitive-content filters).
    std::function<bool(const Document&)> pre_filter;
    // Minute length used for bucketing; shrink it to compress time in
    // live-mode harnesses.
    int64_t millis_per_tick = kMillisPerTick;
};

// Document with all strings resolved against the engine's tables.
struct InternedDocument {
    int64_t ts_ms = 0;
    DomainId domain = 0;
    AuthorId author = 0;
    std::vector<EntityId> entities;
};

class Engine {
public:
    // Throws std::invalid_argument on an invalid config.
    explicit Engine(EngineConfig config, EngineOptions options = {});

    // Non-blocking producer entry: enqueue, or shed when full.
    SubmitResult submit(Document doc);
    // Dequeues and processes up to `max_documents`; returns how many ran.
    size_t drain(size_t max_documents);
    void stop();

    InternedDocument intern(const Document& doc);
    bool passes_pre_filter(const Document& doc) const {
        return !options_.pre_filter || options_.pre_filter(doc);
    }
    // Counts one document: trend ingestion, then co-occurrence counting of
    // the entities trending in the document's domain. A domain with no
    // cached trend list yet passes everything through (cold start).
    void process(const InternedDocument& doc);
    bool process(const Document& doc);  // false if the pre-filter rejected it

    // Runs one pipeline minute and returns (and persists) the snapshot.
    ClusterSnapshot tick(int64_t t);

    void attach_sink(SnapshotSink* sink);  // not owned

    const std::optional<ClusterSnapshot>& previous_snapshot() const { return prev_; }
    const std::map<std::string, ClusterChain>& chains() const { return chains_; }
    const EngineConfig& config() const { return config_; }
    const StageTimings& timings() const { return timings_; }
    int64_t millis_per_tick() const { return options_.millis_per_tick; }

    uint64_t processed() const { return processed_.load(); }
    uint64_t shed_total() const { return shed_total_.load(); }
    uint64_t throttled() const { return trends_.throttled(); }
    uint64_t persist_failures() const { return persist_failures_.load(); }
    size_t queue_size() const { return queue_.size(); }

    EntityTable& entities() { return *entities_; }
    StringTable& domains() { return domains_; }
    const CooccurrenceStore& store() const { return store_; }
    TrendDetector& trends() { return trends_; }

    // Chains with no cluster for this long are dropped from memory.
    static constexpr int64_t kChainRetentionTicks = 24 * 60;

private:
    EngineConfig config_;
    EngineOptions options_;
    std::shared_ptr<EntityTable> entities_;
    StringTable domains_;
    StringTable authors_;
    TrendDetector trends_;
    CooccurrenceStore store_;
    IngestQueue queue_;

    // Serializes document processing against the tick pipeline so the graph
    // build sees one consistent store state (the brief global quiesce).
    std::mutex pipeline_mu_;
    std::mutex trend_cache_mu_;
    std::shared_ptr<const TrendSnapshot> cached_trends_;

    // Owned by the single tick driver.
    std::optional<ClusterSnapshot> prev_;
    std::map<std::string, ClusterChain> chains_;
    ChainIdGenerator ids_;
    SnapshotSink* sink_ = nullptr;
    std::optional<SnapshotWriter> writer_;
    StageTimings timings_;

    std::atomic<bool> stopped_{false};
    std::atomic<uint64_t> processed_{0};
    std::atomic<uint64_t> shed_total_{0};
    std::atomic<uint64_t> shed_this_minute_{0};
    std::atomic<uint64_t> persist_failures_{0};
};

// --- Offline drivers ----------------------------------------------------

struct ReplayStats {
    uint64_t documents = 0;
    uint64_t parse_errors = 0;
    uint64_t filtered = 0;
    size_t ticks = 0;
    size_t clusters = 0;
    size_t chains = 0;
    uint64_t shed = 0;
    int64_t parse_ns = 0;
    int64_t pipeline_ns = 0;
};

// Virtual-clock replay: parses JSONL documents, sorts by timestamp, drains
// each minute fully, then ticks it. Exactly one snapshot per minute of the
// input's span. Deterministic for fixed (input, config, seed).
ReplayStats replay(std::istream& input, Engine& engine,
                   std::vector<ClusterSnapshot>* collect = nullptr);

// --- Chain export --------------------------------------------------------

struct ChainExportRow {
    int64_t tick = 0;
    std::string chain_id;
    size_t size = 0;
    uint64_t agg_freq = 0;
    std::vector<Entity> entities;
};

std::vector<ClusterChain> chains_from_snapshots(const std::vector<ClusterSnapshot>& snapshots);

// '*' matches any (possibly empty) run of characters.
bool glob_match(const std::string& pattern, const std::string& text);

// Rows for every (tick, chain) in [from, to]; when entity_pattern is
// non-empty, only chains that ever contain a matching entity are kept.
std::vector<ChainExportRow> export_chains(const std::vector<ClusterSnapshot>& snapshots,
                                          int64_t from, int64_t to,
                                          const std::string& entity_pattern = {});

// CSV with header tick,chain_id,size,agg_freq,entities (pipe-delimited).
std::string chain_rows_to_csv(const std::vector<ChainExportRow>& rows);

}  // namespace evd
