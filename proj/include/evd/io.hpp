#pragma once
// Wire formats: JSONL documents and snapshots, CSV helpers, key=value config.

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evd/core.hpp"

namespace evd {

// One document per line:
//   {"id","ts_ms","author","domain","entities":[{"kind","text"}]}
// Entity text is normalized on parse; duplicates collapse.
std::optional<Document> parse_document_line(const std::string& line, std::string* error = nullptr);
std::string document_to_json(const Document& doc);

// One snapshot per line, clusters in rank order:
//   {"tick","dropped","clusters":[{"chain_id","score","entities":[{"kind","text","freq"}]}]}
std::string snapshot_to_json(const ClusterSnapshot& snapshot);
std::optional<ClusterSnapshot> parse_snapshot_line(const std::string& line,
                                                   std::string* error = nullptr);
// Loads a whole snapshot stream; throws std::runtime_error naming the line
// on malformed input.
std::vector<ClusterSnapshot> load_snapshots(std::istream& in);

// key=value configuration, '#' comments, blank lines ignored.
std::map<std::string, std::string> parse_key_values(std::istream& in);
// Applies recognized keys onto the config; returns an error message for an
// unknown key or an unparsable value.
std::optional<std::string> apply_config_entries(EngineConfig& config,
                                                const std::map<std::string, std::string>& entries);

// Minimal CSV with RFC-style double-quote escaping.
std::string csv_escape(const std::string& field);
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace evd
