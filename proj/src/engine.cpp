#include "evd/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <stdexcept>

#include "evd/io.hpp"

namespace evd {

namespace {

int64_t now_ns() {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

EngineConfig validated(EngineConfig config) {
    if (auto problem = config.validate()) {
        throw std::invalid_argument("invalid engine config: " + *problem);
    }
    return config;
}

}  // namespace

JsonlFileSink::JsonlFileSink(const std::string& path) {
    file_ = std::fopen(path.c_str(), "wb");
    if (!file_) throw std::runtime_error("cannot open snapshot output: " + path);
}

JsonlFileSink::~JsonlFileSink() {
    if (file_) std::fclose(file_);
}

bool JsonlFileSink::append(const ClusterSnapshot& snapshot) {
    std::string line = snapshot_to_json(snapshot);
    line.push_back('\n');
    if (std::fwrite(line.data(), 1, line.size(), file_) != line.size()) return false;
    return std::fflush(file_) == 0;
}

std::vector<Cluster> rank_clusters(std::vector<Cluster> clusters) {
    std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) {
        if (a.rank_score != b.rank_score) return a.rank_score > b.rank_score;
        return a.id < b.id;
    });
    return clusters;
}

Engine::Engine(EngineConfig config, EngineOptions options)
    : config_(validated(config)),
      options_(std::move(options)),
      entities_(std::make_shared<EntityTable>()),
      trends_(TrendParams{config_.short_window, config_.long_window, config_.trends_top_k},
              entities_),
      store_(config_.window, entities_),
      queue_(static_cast<size_t>(config_.shed_queue_limit)) {}

SubmitResult Engine::submit(Document doc) {
    if (stopped_.load(std::memory_order_relaxed)) return SubmitResult::stopped;
    if (queue_.try_push(std::move(doc))) return SubmitResult::accepted;
    shed_total_.fetch_add(1, std::memory_order_relaxed);
    shed_this_minute_.fetch_add(1, std::memory_order_relaxed);
    return SubmitResult::shed;
}

size_t Engine::drain(size_t max_documents) {
    size_t ran = 0;
    while (ran < max_documents) {
        auto doc = queue_.try_pop();
        if (!doc) break;
        process(*doc);
        ++ran;
    }
    return ran;
}

void Engine::stop() { stopped_.store(true); }

InternedDocument Engine::intern(const Document& doc) {
    InternedDocument out;
    out.ts_ms = doc.ts_ms;
    out.domain = domains_.intern(doc.domain);
    out.author = authors_.intern(doc.author_id);
    out.entities.reserve(doc.entities.size());
    for (const Entity& e : doc.entities) out.entities.push_back(entities_->intern(e));
    return out;
}

void Engine::process(const InternedDocument& doc) {
    std::lock_guard<std::mutex> gate(pipeline_mu_);
    int64_t t = tick_of(doc.ts_ms, options_.millis_per_tick);
    trends_.ingest(t, doc.domain, doc.author, doc.entities);

    std::shared_ptr<const TrendSnapshot> trending;
    {
        std::lock_guard<std::mutex> lock(trend_cache_mu_);
        trending = cached_trends_;
    }

    if (trending && trending->has_domain(doc.domain)) {
        std::vector<EntityId> survivors;
        survivors.reserve(doc.entities.size());
        for (EntityId e : doc.entities) {
            if (trending->is_trending(doc.domain, e)) survivors.push_back(e);
        }
        store_.update(t, survivors);
    } else {
        // No trend list for this domain yet: let everything through so the
        // window can warm up.
        store_.update(t, doc.entities);
    }
    processed_.fetch_add(1, std::memory_order_relaxed);
}

bool Engine::process(const Document& doc) {
    if (!passes_pre_filter(doc)) return false;
    process(intern(doc));
    return true;
}

ClusterSnapshot Engine::tick(int64_t t) {
    std::lock_guard<std::mutex> gate(pipeline_mu_);
    int64_t t0 = now_ns();
    store_.evict(t);
    int64_t t1 = now_ns();

    TrendSnapshot trending = trends_.trend_tick(t);
    {
        std::lock_guard<std::mutex> lock(trend_cache_mu_);
        cached_trends_ = std::make_shared<const TrendSnapshot>(trending);
    }
    int64_t t2 = now_ns();

    EntityGraph graph = build_graph(store_, config_.min_similarity, trending, *entities_);
    int64_t t3 = now_ns();

    Partition partition = options_.backend == ClusteringBackend::louvain
                              ? louvain(graph, config_.resolution, options_.seed)
                              : connected_components(graph);
    std::vector<Cluster> clusters = to_clusters(partition, graph, *entities_);
    int64_t t4 = now_ns();

    ClusterSnapshot empty_prev;
    const ClusterSnapshot& prev = prev_ ? *prev_ : empty_prev;
    LinkResult links = link(prev, clusters, config_.link_threshold, ids_);
    apply_links(links, clusters);
    int64_t t5 = now_ns();

    ClusterSnapshot snapshot;
    snapshot.tick = t;
    snapshot.clusters = rank_clusters(std::move(clusters));
    snapshot.dropped_documents = shed_this_minute_.exchange(0);

    for (const Cluster& c : snapshot.clusters) {
        ClusterChain& chain = chains_[c.id];
        chain.id = c.id;
        chain.members.emplace_back(t, c);
    }
    for (auto it = chains_.begin(); it != chains_.end();) {
        if (it->second.last_tick() < t - kChainRetentionTicks) {
            it = chains_.erase(it);
        } else {
            ++it;
        }
    }
    prev_ = snapshot;

    if (writer_) {
        if (!writer_->persist(snapshot)) {
            persist_failures_.fetch_add(1, std::memory_order_relaxed);
        }
    }
    int64_t t6 = now_ns();

    timings_.evict_ns += t1 - t0;
    timings_.trend_ns += t2 - t1;
    timings_.graph_ns += t3 - t2;
    timings_.cluster_ns += t4 - t3;
    timings_.link_ns += t5 - t4;
    timings_.persist_ns += t6 - t5;
    ++timings_.ticks;
    return snapshot;
}

void Engine::attach_sink(SnapshotSink* sink) {
    sink_ = sink;
    writer_.reset();
    if (sink_) writer_.emplace(*sink_);
}

ReplayStats replay(std::istream& input, Engine& engine, std::vector<ClusterSnapshot>* collect) {
    ReplayStats stats;

    int64_t parse_start = now_ns();
    std::vector<InternedDocument> docs;
    std::string line;
    while (std::getline(input, line)) {
        if (line.empty()) continue;
        auto doc = parse_document_line(line);
        if (!doc) {
            ++stats.parse_errors;
            continue;
        }
        if (!engine.passes_pre_filter(*doc)) {
            ++stats.filtered;
            continue;
        }
        ++stats.documents;
        docs.push_back(engine.intern(*doc));
    }
    std::stable_sort(docs.begin(), docs.end(),
                     [](const InternedDocument& a, const InternedDocument& b) {
                         return a.ts_ms < b.ts_ms;
                     });
    stats.parse_ns = now_ns() - parse_start;

    if (docs.empty()) return stats;

    int64_t pipeline_start = now_ns();
    int64_t mpt = engine.millis_per_tick();
    int64_t first = tick_of(docs.front().ts_ms, mpt);
    int64_t last = tick_of(docs.back().ts_ms, mpt);
    size_t next = 0;
    for (int64_t t = first; t <= last; ++t) {
        while (next < docs.size() && tick_of(docs[next].ts_ms, mpt) == t) {
            engine.process(docs[next]);
            ++next;
        }
        ClusterSnapshot snapshot = engine.tick(t);
        stats.clusters += snapshot.clusters.size();
        if (collect) collect->push_back(std::move(snapshot));
        ++stats.ticks;
    }
    stats.pipeline_ns = now_ns() - pipeline_start;
    stats.chains = engine.chains().size();
    stats.shed = engine.shed_total();
    return stats;
}

std::vector<ClusterChain> chains_from_snapshots(const std::vector<ClusterSnapshot>& snapshots) {
    std::map<std::string, ClusterChain> by_id;
    for (const ClusterSnapshot& s : snapshots) {
        for (const Cluster& c : s.clusters) {
            ClusterChain& chain = by_id[c.id];
            chain.id = c.id;
            chain.members.emplace_back(s.tick, c);
        }
    }
    std::vector<ClusterChain> chains;
    chains.reserve(by_id.size());
    for (auto& [id, chain] : by_id) {
        std::sort(chain.members.begin(), chain.members.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        chains.push_back(std::move(chain));
    }
    return chains;
}

bool glob_match(const std::string& pattern, const std::string& text) {
    size_t p = 0, t = 0;
    size_t star = std::string::npos, star_t = 0;
    while (t < text.size()) {
        if (p < pattern.size() && (pattern[p] == text[t])) {
            ++p;
            ++t;
        } else if (p < pattern.size() && pattern[p] == '*') {
            star = p++;
            star_t = t;
        } else if (star != std::string::npos) {
            p = star + 1;
            t = ++star_t;
        } else {
            return false;
        }
    }
    while (p < pattern.size() && pattern[p] == '*') ++p;
    return p == pattern.size();
}

std::vector<ChainExportRow> export_chains(const std::vector<ClusterSnapshot>& snapshots,
                                          int64_t from, int64_t to,
                                          const std::string& entity_pattern) {
    std::vector<ChainExportRow> rows;
    auto chains = chains_from_snapshots(snapshots);
    for (const ClusterChain& chain : chains) {
        if (!entity_pattern.empty()) {
            bool matched = false;
            for (const auto& [tick, cluster] : chain.members) {
                for (const Entity& e : cluster.entities) {
                    if (glob_match(entity_pattern, e.text)) {
                        matched = true;
                        break;
                    }
                }
                if (matched) break;
            }
            if (!matched) continue;
        }
        for (const auto& [tick, cluster] : chain.members) {
            if (tick < from || tick > to) continue;
            ChainExportRow row;
            row.tick = tick;
            row.chain_id = chain.id;
            row.size = cluster.entities.size();
            row.agg_freq = cluster.total_frequency();
            row.entities = cluster.entities;
            rows.push_back(std::move(row));
        }
    }
    std::sort(rows.begin(), rows.end(), [](const ChainExportRow& a, const ChainExportRow& b) {
        if (a.tick != b.tick) return a.tick < b.tick;
        return a.chain_id < b.chain_id;
    });
    return rows;
}

std::string chain_rows_to_csv(const std::vector<ChainExportRow>& rows) {
    std::string out = "tick,chain_id,size,agg_freq,entities\n";
    for (const ChainExportRow& row : rows) {
        std::string entities;
        for (size_t i = 0; i < row.entities.size(); ++i) {
            if (i > 0) entities.push_back('|');
            entities += row.entities[i].text;
        }
        out += std::to_string(row.tick);
        out.push_back(',');
        out += csv_escape(row.chain_id);
        out.push_back(',');
        out += std::to_string(row.size);
        out.push_back(',');
        out += std::to_string(row.agg_freq);
        out.push_back(',');
        out += csv_escape(entities);
        out.push_back('\n');
    }
    return out;
}

}  // namespace evd
