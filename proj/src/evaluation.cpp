#include "evd/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <stdexcept>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "evd/io.hpp"

namespace evd {

namespace {

std::pair<Entity, Entity> ordered(const Entity& a, const Entity& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

std::string format_metric(const std::optional<double>& value) {
    if (!value) return "NA";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9g", *value);
    return buf;
}

// Per-snapshot entity membership: which clusters each entity sits in.
struct TickIndex {
    std::map<Entity, std::vector<size_t>> clusters_of;

    explicit TickIndex(const ClusterSnapshot& s) {
        for (size_t i = 0; i < s.clusters.size(); ++i) {
            for (const Entity& e : s.clusters[i].entities) {
                clusters_of[e].push_back(i);
            }
        }
    }

    bool present(const Entity& e) const { return clusters_of.contains(e); }

    bool share_cluster(const Entity& a, const Entity& b) const {
        auto ia = clusters_of.find(a);
        auto ib = clusters_of.find(b);
        if (ia == clusters_of.end() || ib == clusters_of.end()) return false;
        for (size_t x : ia->second) {
            for (size_t y : ib->second) {
                if (x == y) return true;
            }
        }
        return false;
    }
};

}  // namespace

std::set<int64_t> GroundTruthCorpus::event_ids() const {
    std::set<int64_t> ids;
    for (const auto& r : records) ids.insert(r.event_id);
    return ids;
}

std::map<Entity, int64_t> GroundTruthCorpus::unique_entities() const {
    std::map<Entity, std::set<int64_t>> events_of;
    for (const auto& r : records) events_of[r.entity].insert(r.event_id);
    std::map<Entity, int64_t> unique;
    for (const auto& [entity, events] : events_of) {
        if (events.size() == 1) unique.emplace(entity, *events.begin());
    }
    return unique;
}

GroundTruthCorpus load_ground_truth_csv(std::istream& in) {
    GroundTruthCorpus gt;
    std::string line;
    size_t line_no = 0;
    if (!std::getline(in, line)) throw std::runtime_error("ground truth: empty file");
    ++line_no;
    auto header = split_csv_line(line);
    const std::vector<std::string> expected = {"entity_kind", "entity_text", "event_id", "title",
                                               "relevant"};
    if (header != expected) {
        throw std::runtime_error("ground truth line 1: expected header "
                                 "entity_kind,entity_text,event_id,title,relevant");
    }

    std::set<std::pair<Entity, int64_t>> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        std::string where = "ground truth line " + std::to_string(line_no);
        if (fields.size() != 5) throw std::runtime_error(where + ": expected 5 columns");
        auto kind = entity_kind_from_string(fields[0]);
        if (!kind) throw std::runtime_error(where + ": column entity_kind: unknown kind");
        auto entity = normalize_entity(*kind, fields[1]);
        if (!entity) throw std::runtime_error(where + ": column entity_text: empty entity");
        int64_t event_id = 0;
        auto [p, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(),
                                       event_id);
        if (ec != std::errc() || p != fields[2].data() + fields[2].size()) {
            throw std::runtime_error(where + ": column event_id: not an integer");
        }
        bool relevant;
        if (fields[4] == "Y" || fields[4] == "y") relevant = true;
        else if (fields[4] == "N" || fields[4] == "n") relevant = false;
        else throw std::runtime_error(where + ": column relevant: expected Y or N");

        if (!seen.emplace(*entity, event_id).second) {
            throw std::runtime_error(where + ": duplicate (entity, event_id) pair");
        }
        gt.records.push_back({std::move(*entity), event_id, fields[3], relevant});
    }

    std::set<int64_t> with_relevant;
    for (const auto& r : gt.records) {
        if (r.relevant) with_relevant.insert(r.event_id);
    }
    for (const auto& r : gt.records) {
        if (!with_relevant.contains(r.event_id)) {
            throw std::runtime_error("ground truth: event " + std::to_string(r.event_id) +
                                     " has no relevant entity");
        }
    }
    return gt;
}

std::string ground_truth_to_csv(const GroundTruthCorpus& gt) {
    std::string out = "entity_kind,entity_text,event_id,title,relevant\n";
    for (const auto& r : gt.records) {
        out += std::string(to_string(r.entity.kind));
        out.push_back(',');
        out += csv_escape(r.entity.text);
        out.push_back(',');
        out += std::to_string(r.event_id);
        out.push_back(',');
        out += csv_escape(r.title);
        out.push_back(',');
        out += r.relevant ? "Y" : "N";
        out.push_back('\n');
    }
    return out;
}

PairSets build_pair_sets(const GroundTruthCorpus& gt) {
    std::map<int64_t, std::vector<const GroundTruthRecord*>> by_event;
    for (const auto& r : gt.records) by_event[r.event_id].push_back(&r);

    PairSets sets;
    for (const auto& [event, records] : by_event) {
        for (size_t i = 0; i < records.size(); ++i) {
            for (size_t j = i + 1; j < records.size(); ++j) {
                if (records[i]->entity == records[j]->entity) continue;
                auto pair = ordered(records[i]->entity, records[j]->entity);
                if (records[i]->relevant && records[j]->relevant) {
                    sets.related.insert(pair);
                } else if (records[i]->relevant != records[j]->relevant) {
                    sets.unrelated.insert(pair);
                }
            }
        }
    }
    for (const auto& pair : sets.related) sets.unrelated.erase(pair);
    return sets;
}

std::optional<double> events_detected_fraction(const std::vector<ClusterSnapshot>& snapshots,
                                               const GroundTruthCorpus& gt) {
    if (gt.empty()) return std::nullopt;
    auto unique = gt.unique_entities();
    std::set<int64_t> detected;
    for (const ClusterSnapshot& s : snapshots) {
        for (const Cluster& c : s.clusters) {
            if (c.entities.size() < 2) continue;
            for (const Entity& e : c.entities) {
                auto it = unique.find(e);
                if (it != unique.end()) detected.insert(it->second);
            }
        }
    }
    auto events = gt.event_ids();
    return static_cast<double>(detected.size()) / static_cast<double>(events.size());
}

std::optional<double> consolidation(const std::vector<ClusterSnapshot>& snapshots,
                                    const GroundTruthCorpus& gt) {
    PairSets sets = build_pair_sets(gt);
    uint64_t present = 0, together = 0;
    for (const ClusterSnapshot& s : snapshots) {
        TickIndex index(s);
        for (const auto& [a, b] : sets.related) {
            if (!index.present(a) || !index.present(b)) continue;
            ++present;
            if (index.share_cluster(a, b)) ++together;
        }
    }
    if (present == 0) return std::nullopt;
    return static_cast<double>(together) / static_cast<double>(present);
}

std::optional<double> discrimination(const std::vector<ClusterSnapshot>& snapshots,
                                     const GroundTruthCorpus& gt) {
    PairSets sets = build_pair_sets(gt);
    uint64_t present = 0, separated = 0;
    for (const ClusterSnapshot& s : snapshots) {
        TickIndex index(s);
        for (const auto& [a, b] : sets.unrelated) {
            if (!index.present(a) || !index.present(b)) continue;
            ++present;
            if (!index.share_cluster(a, b)) ++separated;
        }
    }
    if (present == 0) return std::nullopt;
    return static_cast<double>(separated) / static_cast<double>(present);
}

double clustering_score(double c, double d) {
    if (c + d <= 0.0) return 0.0;
    return 2.0 * c * d / (c + d);
}

std::optional<double> merged_event_fraction(const std::vector<ClusterChain>& chains,
                                            const GroundTruthCorpus& gt) {
    // unique entities that are marked relevant for their single event
    auto unique = gt.unique_entities();
    std::map<Entity, int64_t> relevant_unique;
    for (const auto& r : gt.records) {
        auto it = unique.find(r.entity);
        if (it != unique.end() && it->second == r.event_id && r.relevant) {
            relevant_unique.emplace(r.entity, r.event_id);
        }
    }

    uint64_t qualifying = 0, merged = 0;
    for (const ClusterChain& chain : chains) {
        if (chain.duration() <= 30) continue;
        ++qualifying;
        std::set<int64_t> events;
        for (const auto& [tick, cluster] : chain.members) {
            for (const Entity& e : cluster.entities) {
                auto it = relevant_unique.find(e);
                if (it != relevant_unique.end()) events.insert(it->second);
            }
        }
        if (events.size() >= 2) ++merged;
    }
    if (qualifying == 0) return std::nullopt;
    return static_cast<double>(merged) / static_cast<double>(qualifying);
}

std::optional<double> duplicate_event_fraction(const std::vector<ClusterChain>& chains,
                                               const GroundTruthCorpus& gt) {
    if (gt.empty()) return std::nullopt;
    std::map<Entity, std::vector<int64_t>> events_of_relevant;
    for (const auto& r : gt.records) {
        if (r.relevant) events_of_relevant[r.entity].push_back(r.event_id);
    }

    std::map<int64_t, std::set<std::string>> chains_of_event;
    for (const ClusterChain& chain : chains) {
        for (const auto& [tick, cluster] : chain.members) {
            for (const Entity& e : cluster.entities) {
                auto it = events_of_relevant.find(e);
                if (it == events_of_relevant.end()) continue;
                for (int64_t event : it->second) chains_of_event[event].insert(chain.id);
            }
        }
    }

    auto events = gt.event_ids();
    uint64_t duplicated = 0;
    for (int64_t event : events) {
        auto it = chains_of_event.find(event);
        if (it != chains_of_event.end() && it->second.size() >= 2) ++duplicated;
    }
    return static_cast<double>(duplicated) / static_cast<double>(events.size());
}

MetricReport evaluate_run(const std::vector<ClusterSnapshot>& snapshots,
                          const GroundTruthCorpus& gt) {
    MetricReport report;
    report.detected = events_detected_fraction(snapshots, gt);
    report.consolidation = consolidation(snapshots, gt);
    report.discrimination = discrimination(snapshots, gt);
    if (report.consolidation && report.discrimination) {
        report.clustering = clustering_score(*report.consolidation, *report.discrimination);
    }
    auto chains = chains_from_snapshots(snapshots);
    report.merged = merged_event_fraction(chains, gt);
    report.duplicate = duplicate_event_fraction(chains, gt);
    return report;
}

std::string metric_reports_to_csv(const std::vector<MetricReport>& reports) {
    std::string out =
        "S,R,backend,events_detected_fraction,consolidation,discrimination,"
        "clustering_score,merged_event_fraction,duplicate_event_fraction\n";
    for (const MetricReport& r : reports) {
        out += format_metric(r.min_similarity);
        out.push_back(',');
        out += format_metric(r.resolution);
        out.push_back(',');
        out += r.backend.empty() ? "NA" : r.backend;
        out.push_back(',');
        out += format_metric(r.detected);
        out.push_back(',');
        out += format_metric(r.consolidation);
        out.push_back(',');
        out += format_metric(r.discrimination);
        out.push_back(',');
        out += format_metric(r.clustering);
        out.push_back(',');
        out += format_metric(r.merged);
        out.push_back(',');
        out += format_metric(r.duplicate);
        out.push_back('\n');
    }
    return out;
}

std::vector<ClusterSnapshot> run_engine_over(const std::vector<Document>& documents,
                                             const EngineConfig& config,
                                             const EngineOptions& options) {
    Engine engine(config, options);
    std::vector<InternedDocument> docs;
    docs.reserve(documents.size());
    for (const Document& d : documents) {
        if (engine.passes_pre_filter(d)) docs.push_back(engine.intern(d));
    }
    std::stable_sort(docs.begin(), docs.end(),
                     [](const InternedDocument& a, const InternedDocument& b) {
                         return a.ts_ms < b.ts_ms;
                     });

    std::vector<ClusterSnapshot> snapshots;
    if (docs.empty()) return snapshots;
    int64_t first = tick_of(docs.front().ts_ms);
    int64_t last = tick_of(docs.back().ts_ms);
    size_t next = 0;
    for (int64_t t = first; t <= last; ++t) {
        while (next < docs.size() && tick_of(docs[next].ts_ms) == t) {
            engine.process(docs[next]);
            ++next;
        }
        snapshots.push_back(engine.tick(t));
    }
    return snapshots;
}

std::vector<MetricReport> sweep(const std::vector<Document>& documents,
                                const GroundTruthCorpus& gt, const SweepSpec& spec) {
    struct Point {
        double s;
        double r;
        ClusteringBackend backend;
    };
    std::vector<Point> points;
    for (double s : spec.similarity_grid) {
        for (double r : spec.resolution_grid) {
            for (ClusteringBackend b : spec.backends) points.push_back({s, r, b});
        }
    }

    std::vector<MetricReport> reports(points.size());
    std::atomic<size_t> cursor{0};
    auto worker = [&]() {
        while (true) {
            size_t i = cursor.fetch_add(1);
            if (i >= points.size()) break;
            EngineConfig config = spec.base;
            config.min_similarity = points[i].s;
            config.resolution = points[i].r;
            EngineOptions options;
            options.backend = points[i].backend;
            options.seed = spec.seed;
            auto snapshots = run_engine_over(documents, config, options);
            MetricReport report = evaluate_run(snapshots, gt);
            report.min_similarity = points[i].s;
            report.resolution = points[i].r;
            report.backend = std::string(to_string(points[i].backend));
            reports[i] = std::move(report);
        }
    };

    unsigned jobs = std::max(1u, spec.jobs);
    if (jobs == 1 || points.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        for (unsigned i = 0; i < std::min<size_t>(jobs, points.size()); ++i) {
            threads.emplace_back(worker);
        }
        for (auto& t : threads) t.join();
    }
    return reports;
}

}  // namespace evd
