#include "evd/io.hpp"

#include <charconv>
#include <stdexcept>

#include "json.hpp"

namespace evd {

namespace {

using Json = nlohmann::ordered_json;

std::optional<Document> document_from_json(const Json& j, std::string* error) {
    Document doc;
    doc.id = j.at("id").get<std::string>();
    doc.ts_ms = j.at("ts_ms").get<int64_t>();
    doc.author_id = j.at("author").get<std::string>();
    doc.domain = j.at("domain").get<std::string>();
    if (doc.ts_ms < 0) {
        if (error) *error = "negative ts_ms";
        return std::nullopt;
    }
    for (const auto& je : j.at("entities")) {
        auto kind = entity_kind_from_string(je.at("kind").get<std::string>());
        if (!kind) {
            if (error) *error = "unknown entity kind";
            return std::nullopt;
        }
        auto entity = normalize_entity(*kind, je.at("text").get<std::string>());
        if (!entity) {
            if (error) *error = "entity text empty after normalization";
            return std::nullopt;
        }
        doc.entities.push_back(std::move(*entity));
    }
    doc.canonicalize_entities();
    return doc;
}

}  // namespace

std::optional<Document> parse_document_line(const std::string& line, std::string* error) {
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) {
        if (error) *error = "invalid JSON";
        return std::nullopt;
    }
    try {
        return document_from_json(j, error);
    } catch (const Json::exception& e) {
        if (error) *error = e.what();
        return std::nullopt;
    }
}

std::string document_to_json(const Document& doc) {
    Json j;
    j["id"] = doc.id;
    j["ts_ms"] = doc.ts_ms;
    j["author"] = doc.author_id;
    j["domain"] = doc.domain;
    Json entities = Json::array();
    for (const Entity& e : doc.entities) {
        entities.push_back({{"kind", to_string(e.kind)}, {"text", e.text}});
    }
    j["entities"] = std::move(entities);
    return j.dump();
}

std::string snapshot_to_json(const ClusterSnapshot& snapshot) {
    Json j;
    j["tick"] = snapshot.tick;
    j["dropped"] = snapshot.dropped_documents;
    Json clusters = Json::array();
    for (const Cluster& c : snapshot.clusters) {
        Json jc;
        jc["chain_id"] = c.id;
        jc["score"] = c.rank_score;
        Json entities = Json::array();
        for (size_t i = 0; i < c.entities.size(); ++i) {
            entities.push_back({{"kind", to_string(c.entities[i].kind)},
                                {"text", c.entities[i].text},
                                {"freq", c.freqs[i]}});
        }
        jc["entities"] = std::move(entities);
        clusters.push_back(std::move(jc));
    }
    j["clusters"] = std::move(clusters);
    return j.dump();
}

std::optional<ClusterSnapshot> parse_snapshot_line(const std::string& line, std::string* error) {
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) {
        if (error) *error = "invalid JSON";
        return std::nullopt;
    }
    try {
        ClusterSnapshot snapshot;
        snapshot.tick = j.at("tick").get<int64_t>();
        snapshot.dropped_documents = j.at("dropped").get<uint64_t>();
        for (const auto& jc : j.at("clusters")) {
            // Built field-by-field: evaluation inputs may carry clusters of
            // any size, unlike engine output.
            Cluster c;
            c.id = jc.at("chain_id").get<std::string>();
            c.rank_score = jc.at("score").get<double>();
            for (const auto& je : jc.at("entities")) {
                auto kind = entity_kind_from_string(je.at("kind").get<std::string>());
                if (!kind) {
                    if (error) *error = "unknown entity kind";
                    return std::nullopt;
                }
                auto entity = normalize_entity(*kind, je.at("text").get<std::string>());
                if (!entity) {
                    if (error) *error = "entity text empty after normalization";
                    return std::nullopt;
                }
                c.entities.push_back(std::move(*entity));
                c.freqs.push_back(je.at("freq").get<uint64_t>());
            }
            snapshot.clusters.push_back(std::move(c));
        }
        return snapshot;
    } catch (const Json::exception& e) {
        if (error) *error = e.what();
        return std::nullopt;
    }
}

std::vector<ClusterSnapshot> load_snapshots(std::istream& in) {
    std::vector<ClusterSnapshot> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::string error;
        auto snapshot = parse_snapshot_line(line, &error);
        if (!snapshot) {
            throw std::runtime_error("snapshot line " + std::to_string(line_no) + ": " + error);
        }
        out.push_back(std::move(*snapshot));
    }
    return out;
}

std::map<std::string, std::string> parse_key_values(std::istream& in) {
    std::map<std::string, std::string> entries;
    std::string line;
    auto trim = [](std::string s) {
        size_t b = s.find_first_not_of(" \t\r");
        size_t e = s.find_last_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::string trimmed = trim(line);
        if (trimmed.empty()) continue;
        auto eq = trimmed.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("config line missing '=': " + trimmed);
        }
        entries[trim(trimmed.substr(0, eq))] = trim(trimmed.substr(eq + 1));
    }
    return entries;
}

std::optional<std::string> apply_config_entries(
    EngineConfig& config, const std::map<std::string, std::string>& entries) {
    auto parse_double = [](const std::string& v, double& out) {
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        return ec == std::errc() && p == v.data() + v.size();
    };
    auto parse_int = [](const std::string& v, int64_t& out) {
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        return ec == std::errc() && p == v.data() + v.size();
    };

    for (const auto& [key, value] : entries) {
        bool ok = true;
        if (key == "min_similarity") {
            ok = parse_double(value, config.min_similarity);
        } else if (key == "resolution") {
            ok = parse_double(value, config.resolution);
        } else if (key == "window") {
            ok = parse_int(value, config.window);
        } else if (key == "link_threshold") {
            ok = parse_double(value, config.link_threshold);
        } else if (key == "short_window") {
            ok = parse_int(value, config.short_window);
        } else if (key == "long_window") {
            ok = parse_int(value, config.long_window);
        } else if (key == "trends_top_k") {
            ok = parse_int(value, config.trends_top_k);
        } else if (key == "shed_queue_limit") {
            ok = parse_int(value, config.shed_queue_limit);
        } else {
            return "unknown config key: " + key;
        }
        if (!ok) return "bad value for " + key + ": " + value;
    }
    return std::nullopt;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    current.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                current.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(current));
            current.clear();
        } else if (c != '\r') {
            current.push_back(c);
        }
    }
    fields.push_back(std::move(current));
    return fields;
}

}  // namespace evd
