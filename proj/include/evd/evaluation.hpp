#pragma once
// Offline metric suite over a labeled ground-truth corpus: events-detected
// fraction, consolidation/discrimination/clustering score, merged and
// duplicate event fractions, plus (S, R, backend) parameter sweeps.

#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "evd/core.hpp"
#include "evd/engine.hpp"

namespace evd {

struct GroundTruthRecord {
    Entity entity;
    int64_t event_id = 0;
    std::string title;
    bool relevant = true;
};

struct GroundTruthCorpus {
    std::vector<GroundTruthRecord> records;

    bool empty() const { return records.empty(); }
    std::set<int64_t> event_ids() const;
    // Entities related to exactly one event, mapped to it.
    std::map<Entity, int64_t> unique_entities() const;
};

// Header: entity_kind,entity_text,event_id,title,relevant. Throws
// std::runtime_error naming the offending line/column. Entity text is
// normalized the same way document entities are.
GroundTruthCorpus load_ground_truth_csv(std::istream& in);
std::string ground_truth_to_csv(const GroundTruthCorpus& gt);

// Pairs within one event: related when both sides are relevant, unrelated
// when exactly one is irrelevant. A pair qualifying both ways (via two
// events) counts as related only, keeping the sets disjoint.
struct PairSets {
    std::set<std::pair<Entity, Entity>> related;
    std::set<std::pair<Entity, Entity>> unrelated;
};
PairSets build_pair_sets(const GroundTruthCorpus& gt);

// An event is detected when any snapshot has a cluster of size >= 2 holding
// one of its unique entities. nullopt on empty ground truth.
std::optional<double> events_detected_fraction(const std::vector<ClusterSnapshot>& snapshots,
                                               const GroundTruthCorpus& gt);

// sum_t a_t / sum_t A_t over related pairs present in the output at t;
// nullopt when no related pair ever appears.
std::optional<double> consolidation(const std::vector<ClusterSnapshot>& snapshots,
                                    const GroundTruthCorpus& gt);

// Mirror over unrelated pairs kept in different clusters.
std::optional<double> discrimination(const std::vector<ClusterSnapshot>& snapshots,
                                     const GroundTruthCorpus& gt);

// Harmonic mean 2CD/(C+D); 0 when C+D == 0.
double clustering_score(double c, double d);

// Over chains lasting more than 30 ticks: fraction whose lifetime entity
// union covers relevant unique entities of at least two events.
std::optional<double> merged_event_fraction(const std::vector<ClusterChain>& chains,
                                            const GroundTruthCorpus& gt);

// Fraction of events whose relevant entities show up in >= 2 distinct chains.
std::optional<double> duplicate_event_fraction(const std::vector<ClusterChain>& chains,
                                               const GroundTruthCorpus& gt);

struct MetricReport {
    std::optional<double> min_similarity;  // context columns, set by sweep
    std::optional<double> resolution;
    std::string backend;

    std::optional<double> detected;
    std::optional<double> consolidation;
    std::optional<double> discrimination;
    std::optional<double> clustering;
    std::optional<double> merged;
    std::optional<double> duplicate;
};

MetricReport evaluate_run(const std::vector<ClusterSnapshot>& snapshots,
                          const GroundTruthCorpus& gt);

// One row per report; undefined metrics emitted as NA.
std::string metric_reports_to_csv(const std::vector<MetricReport>& reports);

struct SweepSpec {
    std::vector<double> similarity_grid;
    std::vector<double> resolution_grid;
    std::vector<ClusteringBackend> backends;
    EngineConfig base;
    uint64_t seed = 42;
    unsigned jobs = 1;
};

// One deterministic virtual-clock engine run per (S, R, backend) grid point.
// Documents must be pre-parsed; rows come back in grid order regardless of
// how runs are scheduled.
std::vector<MetricReport> sweep(const std::vector<Document>& documents,
                                const GroundTruthCorpus& gt, const SweepSpec& spec);

// Shared by sweep and the replay-free paths in tests/tools.
std::vector<ClusterSnapshot> run_engine_over(const std::vector<Document>& documents,
                                             const EngineConfig& config,
                                             const EngineOptions& options);

}  // namespace evd
