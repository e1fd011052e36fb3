#pragma once
// Deterministic synthetic corpora with labeled ground truth. Each event is a
// four-entity clique split into two halves plus two attached irrelevant
// entities; per-minute document schedules are exact integer counts, so every
// pairwise cosine is a fixed ratio that lands in a designed band between
// sweep grid points.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evd/core.hpp"
#include "evd/evaluation.hpp"

namespace evd {

// Per-minute schedule for one event. With bridge docs br added to every
// labeled entity, a relevant entity's frequency is z+y+s+t+br and an
// irrelevant one's is u+2t+v+br, giving
//   half cosine   (z+y)/f_rel        cross cosine  z/f_rel
//   attach cosine t/sqrt(f_rel*f_x)  x-pair cosine u/f_x
struct EventSpec {
    int full_docs = 0;    // z: {a,b,c,d}
    int half_docs = 0;    // y: {a,b} and {c,d}, each
    int solo_docs = 0;    // s: per relevant entity
    int attach_docs = 0;  // t: {a,x1},{b,x1},{c,x2},{d,x2}, each
    int xpair_docs = 0;   // u: {x1,x2}
    int xsolo_docs = 0;   // v: per irrelevant entity
    int64_t start_tick = 0;   // active range [start_tick, end_tick), engine-relative
    int64_t end_tick = -1;    // -1 = active for the whole corpus
};

struct Scenario {
    int64_t minutes = 40;
    std::string domain = "all";
    std::vector<EventSpec> events;
    // One extra event with a heavy six-entity irrelevant clique attached by
    // barely-alive edges; listed after `events` in the ground truth.
    bool satellite_event = false;
    int bridge_docs_per_entity = 4;  // 0 disables the weak global bridge
    int noise_entities = 100;
    int noise_docs_per_minute = 50;
    int noise_entities_per_doc_min = 1;
    int noise_entities_per_doc_max = 3;

    std::optional<std::string> validate() const;
};

// The shipped ten-event evaluation corpus: detection tiers die off as S
// grows, cross-half edges die before halves, attachments die before crosses.
Scenario tiered_scenario(int64_t minutes = 40);

// `count` events cycling through the tiered templates.
Scenario uniform_scenario(int count, int64_t minutes);

// Noise-dominated corpus sized for throughput runs (~docs_target documents,
// ~3 entity mentions per document).
Scenario load_scenario(uint64_t docs_target, int64_t minutes);

// Builds a scenario from key=value entries (preset, minutes, events,
// noise_entities, noise_docs_per_minute, bridge_docs_per_entity,
// noise_entities_per_doc_max, docs_target). Throws on unknown keys.
Scenario scenario_from_entries(const std::map<std::string, std::string>& entries);

GroundTruthCorpus ground_truth_for(const Scenario& scenario);

// Emits documents in timestamp order. Deterministic for a fixed
// (scenario, seed); randomness only shuffles intra-minute order and noise.
void generate_corpus(const Scenario& scenario, uint64_t seed,
                     const std::function<void(Document&&)>& emit);

struct GeneratedCorpus {
    std::vector<Document> documents;
    GroundTruthCorpus ground_truth;
};
GeneratedCorpus generate_to_memory(const Scenario& scenario, uint64_t seed);

}  // namespace evd
