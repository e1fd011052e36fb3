#include "evd/corpus_gen.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace evd {

namespace {

struct EventEntities {
    std::vector<Entity> relevant;    // a, b | c, d (two halves)
    std::vector<Entity> irrelevant;  // x1 (attached to a,b), x2 (attached to c,d)
};

EventEntities entities_for_event(size_t index) {
    std::string base = "event" + std::to_string(index);
    EventEntities out;
    out.relevant = {
        Entity{EntityKind::named_entity, base + " alpha"},
        Entity{EntityKind::hashtag, "#" + base + "alpha"},
        Entity{EntityKind::named_entity, base + " delta"},
        Entity{EntityKind::hashtag, "#" + base + "delta"},
    };
    out.irrelevant = {
        Entity{EntityKind::named_entity, base + " offtopic one"},
        Entity{EntityKind::named_entity, base + " offtopic two"},
    };
    return out;
}

// The satellite event: a solid quad with a heavy six-clique of irrelevant
// entities hanging off one node by barely-alive edges (cos 1/sqrt(375) just
// over 0.05). A components backend keeps the clique attached at S <= 0.05;
// modularity optimization pays to cut it loose, which is what separates the
// two backends' scores at the low end of the sweep.
EventEntities satellite_entities(size_t index) {
    EventEntities out = entities_for_event(index);
    std::string base = "event" + std::to_string(index);
    out.irrelevant.clear();
    const char* tags[] = {"one", "two", "three", "four", "five", "six"};
    for (const char* tag : tags) {
        out.irrelevant.push_back(Entity{EntityKind::named_entity, base + " offtopic " + tag});
    }
    return out;
}

// The ten per-minute schedules behind the tiered corpus. Bands relative to
// the sweep grid {0, 0.05, 0.1, 0.2, 0.3, 0.4}:
//   half:   .60 .60 .60 .60 .60 .36 .28 .28 .16 .08   (detection tier)
//   cross:  .44 .36 .24 .16 .08 .16 .08 .08 .08 .08   (consolidation tier)
//   attach: .22 .22 .15 .15 .10 .13 .06 .06 .06 .06   (discrimination tier)
const EventSpec kTieredTemplates[] = {
    {11, 4, 0, 6, 18, 0},   {9, 6, 0, 6, 18, 0},  {6, 9, 3, 3, 10, 0},  {4, 11, 3, 3, 10, 0},
    {2, 13, 4, 2, 9, 4},    {4, 5, 9, 3, 7, 7},   {2, 5, 13, 1, 3, 5},  {2, 5, 13, 1, 3, 5},
    {2, 2, 16, 1, 2, 6},    {2, 0, 18, 1, 1, 7},
};
constexpr size_t kTieredTemplateCount = sizeof(kTieredTemplates) / sizeof(kTieredTemplates[0]);

}  // namespace

std::optional<std::string> Scenario::validate() const {
    if (minutes < 1) return "minutes must be >= 1";
    if (domain.empty()) return "domain must be non-empty";
    if (bridge_docs_per_entity < 0) return "bridge_docs_per_entity must be >= 0";
    if (noise_entities < 0) return "noise_entities must be >= 0";
    if (noise_docs_per_minute < 0) return "noise_docs_per_minute must be >= 0";
    if (noise_docs_per_minute > 0 && noise_entities == 0) {
        return "noise docs require noise entities";
    }
    if (noise_entities_per_doc_min < 1) return "noise_entities_per_doc_min must be >= 1";
    if (noise_entities_per_doc_max < noise_entities_per_doc_min) {
        return "noise_entities_per_doc_max must be >= noise_entities_per_doc_min";
    }
    for (const EventSpec& e : events) {
        if (e.full_docs < 0 || e.half_docs < 0 || e.solo_docs < 0 || e.attach_docs < 0 ||
            e.xpair_docs < 0 || e.xsolo_docs < 0) {
            return "event document counts must be >= 0";
        }
        if (e.start_tick < 0) return "event start_tick must be >= 0";
        if (e.end_tick != -1 && e.end_tick <= e.start_tick) {
            return "event end_tick must be > start_tick";
        }
    }
    return std::nullopt;
}

Scenario tiered_scenario(int64_t minutes) {
    Scenario s;
    s.minutes = minutes;
    s.events.assign(kTieredTemplates, kTieredTemplates + kTieredTemplateCount);
    s.satellite_event = true;
    return s;
}

Scenario uniform_scenario(int count, int64_t minutes) {
    Scenario s;
    s.minutes = minutes;
    for (int i = 0; i < count; ++i) {
        s.events.push_back(kTieredTemplates[static_cast<size_t>(i) % kTieredTemplateCount]);
    }
    return s;
}

Scenario load_scenario(uint64_t docs_target, int64_t minutes) {
    Scenario s = tiered_scenario(minutes);
    s.noise_entities = 30000;
    s.noise_entities_per_doc_min = 2;
    s.noise_entities_per_doc_max = 4;

    // structured docs per minute for the tiered events plus the bridge
    uint64_t structured = 0;
    for (const EventSpec& e : s.events) {
        structured += static_cast<uint64_t>(e.full_docs) + 2 * e.half_docs + 4 * e.solo_docs +
                      4 * e.attach_docs + e.xpair_docs + 2 * e.xsolo_docs;
    }
    structured += static_cast<uint64_t>(s.bridge_docs_per_entity) * s.events.size() * 6;
    uint64_t per_minute = docs_target / static_cast<uint64_t>(minutes);
    s.noise_docs_per_minute =
        per_minute > structured ? static_cast<int>(per_minute - structured) : 0;
    return s;
}

Scenario scenario_from_entries(const std::map<std::string, std::string>& entries) {
    std::string preset = "tiered";
    if (auto it = entries.find("preset"); it != entries.end()) preset = it->second;

    int64_t minutes = 40;
    if (auto it = entries.find("minutes"); it != entries.end()) minutes = std::stoll(it->second);

    Scenario s;
    if (preset == "tiered") {
        s = tiered_scenario(minutes);
    } else if (preset == "uniform") {
        int events = 10;
        if (auto it = entries.find("events"); it != entries.end()) events = std::stoi(it->second);
        s = uniform_scenario(events, minutes);
    } else if (preset == "load") {
        uint64_t docs_target = 1000000;
        if (auto it = entries.find("docs_target"); it != entries.end()) {
            docs_target = std::stoull(it->second);
        }
        s = load_scenario(docs_target, minutes);
    } else {
        throw std::runtime_error("unknown scenario preset: " + preset);
    }

    for (const auto& [key, value] : entries) {
        if (key == "preset" || key == "minutes" || key == "events" || key == "docs_target") {
            continue;
        }
        if (key == "noise_entities") s.noise_entities = std::stoi(value);
        else if (key == "noise_docs_per_minute") s.noise_docs_per_minute = std::stoi(value);
        else if (key == "bridge_docs_per_entity") s.bridge_docs_per_entity = std::stoi(value);
        else if (key == "noise_entities_per_doc_max") s.noise_entities_per_doc_max = std::stoi(value);
        else if (key == "domain") s.domain = value;
        else throw std::runtime_error("unknown scenario key: " + key);
    }
    return s;
}

GroundTruthCorpus ground_truth_for(const Scenario& scenario) {
    GroundTruthCorpus gt;
    auto add = [&](const EventEntities& names, size_t index) {
        std::string title = "synthetic event " + std::to_string(index);
        int64_t event_id = static_cast<int64_t>(index) + 1;
        for (const Entity& e : names.relevant) gt.records.push_back({e, event_id, title, true});
        for (const Entity& e : names.irrelevant) gt.records.push_back({e, event_id, title, false});
    };
    for (size_t i = 0; i < scenario.events.size(); ++i) add(entities_for_event(i), i);
    if (scenario.satellite_event) {
        add(satellite_entities(scenario.events.size()), scenario.events.size());
    }
    return gt;
}

void generate_corpus(const Scenario& scenario, uint64_t seed,
                     const std::function<void(Document&&)>& emit) {
    if (auto problem = scenario.validate()) {
        throw std::invalid_argument("invalid scenario: " + *problem);
    }

    std::mt19937_64 rng(seed);
    std::vector<EventEntities> events;
    events.reserve(scenario.events.size());
    for (size_t i = 0; i < scenario.events.size(); ++i) events.push_back(entities_for_event(i));
    EventEntities satellite = satellite_entities(scenario.events.size());

    std::vector<Entity> noise;
    noise.reserve(static_cast<size_t>(scenario.noise_entities));
    for (int i = 0; i < scenario.noise_entities; ++i) {
        noise.push_back(Entity{EntityKind::hashtag, "#noise" + std::to_string(i)});
    }

    Entity bridge{EntityKind::named_entity, "ambient chatter"};
    uint64_t doc_counter = 0;

    for (int64_t minute = 0; minute < scenario.minutes; ++minute) {
        std::vector<std::vector<Entity>> minute_docs;

        auto add_doc = [&](std::initializer_list<const Entity*> members) {
            std::vector<Entity> doc;
            doc.reserve(members.size());
            for (const Entity* e : members) doc.push_back(*e);
            minute_docs.push_back(std::move(doc));
        };

        for (size_t i = 0; i < scenario.events.size(); ++i) {
            const EventSpec& spec = scenario.events[i];
            if (minute < spec.start_tick) continue;
            if (spec.end_tick != -1 && minute >= spec.end_tick) continue;
            const auto& [rel, irr] = events[i];
            const Entity &a = rel[0], &b = rel[1], &c = rel[2], &d = rel[3];
            const Entity &x1 = irr[0], &x2 = irr[1];

            for (int k = 0; k < spec.full_docs; ++k) add_doc({&a, &b, &c, &d});
            for (int k = 0; k < spec.half_docs; ++k) {
                add_doc({&a, &b});
                add_doc({&c, &d});
            }
            for (int k = 0; k < spec.solo_docs; ++k) {
                add_doc({&a});
                add_doc({&b});
                add_doc({&c});
                add_doc({&d});
            }
            for (int k = 0; k < spec.attach_docs; ++k) {
                add_doc({&a, &x1});
                add_doc({&b, &x1});
                add_doc({&c, &x2});
                add_doc({&d, &x2});
            }
            for (int k = 0; k < spec.xpair_docs; ++k) add_doc({&x1, &x2});
            for (int k = 0; k < spec.xsolo_docs; ++k) {
                add_doc({&x1});
                add_doc({&x2});
            }
            // the bridge touches relevant entities only; irrelevant ones hang
            // off the graph solely through their attach edges
            for (int k = 0; k < scenario.bridge_docs_per_entity; ++k) {
                for (const Entity& e : rel) add_doc({&bridge, &e});
            }
        }

        if (scenario.satellite_event) {
            const EventEntities& sat = satellite;
            const Entity &a = sat.relevant[0], &b = sat.relevant[1];
            const Entity &c = sat.relevant[2], &d = sat.relevant[3];
            // quad: half 0.6, cross 0.44, relevant frequency 25/min
            for (int k = 0; k < 11; ++k) add_doc({&a, &b, &c, &d});
            for (int k = 0; k < 4; ++k) {
                add_doc({&a, &b});
                add_doc({&c, &d});
            }
            for (int k = 0; k < 6; ++k) {
                add_doc({&b});
                add_doc({&c});
                add_doc({&d});
            }
            // six-clique of irrelevant entities (pairwise 0.6), each hanging
            // off `a` with cosine 1/sqrt(375) ~ 0.0516
            for (int k = 0; k < 9; ++k) {
                std::vector<Entity> doc(sat.irrelevant.begin(), sat.irrelevant.end());
                minute_docs.push_back(std::move(doc));
            }
            for (const Entity& x : sat.irrelevant) {
                add_doc({&a, &x});
                for (int k = 0; k < 5; ++k) add_doc({&x});
            }
            for (int k = 0; k < scenario.bridge_docs_per_entity; ++k) {
                for (const Entity& e : sat.relevant) add_doc({&bridge, &e});
            }
        }

        for (int k = 0; k < scenario.noise_docs_per_minute; ++k) {
            size_t span = static_cast<size_t>(scenario.noise_entities_per_doc_max -
                                              scenario.noise_entities_per_doc_min + 1);
            size_t count = static_cast<size_t>(scenario.noise_entities_per_doc_min) + rng() % span;
            std::vector<Entity> doc;
            for (size_t j = 0; j < count; ++j) {
                doc.push_back(noise[rng() % noise.size()]);
            }
            minute_docs.push_back(std::move(doc));
        }

        // arrival order within the minute is irrelevant to the pipeline;
        // shuffle it anyway so nothing accidentally depends on it
        for (size_t i = minute_docs.size(); i > 1; --i) {
            std::swap(minute_docs[i - 1], minute_docs[rng() % i]);
        }

        int64_t minute_start = minute * kMillisPerTick;
        size_t n = minute_docs.size();
        for (size_t i = 0; i < n; ++i) {
            Document doc;
            doc.id = "d" + std::to_string(doc_counter);
            doc.author_id = "u" + std::to_string(doc_counter);
            ++doc_counter;
            doc.domain = scenario.domain;
            doc.ts_ms = minute_start + static_cast<int64_t>((i * static_cast<size_t>(kMillisPerTick)) / n);
            doc.entities = std::move(minute_docs[i]);
            doc.canonicalize_entities();
            emit(std::move(doc));
        }
    }
}

GeneratedCorpus generate_to_memory(const Scenario& scenario, uint64_t seed) {
    GeneratedCorpus out;
    generate_corpus(scenario, seed,
                    [&](Document&& doc) { out.documents.push_back(std::move(doc)); });
    out.ground_truth = ground_truth_for(scenario);
    return out;
}

}  // namespace evd
