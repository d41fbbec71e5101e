#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "lloom/core/types.hpp"

namespace lloom {

// Per-type JSON codecs. Decoders take the JSON-pointer path of the value so
// errors can name the failing field.
json to_json(const Document& d);
json to_json(const Quote& q);
json to_json(const Bullet& b);
json to_json(const ClusterRun& r);
json to_json(const Concept& c);
json to_json(const ScoreEntry& e);
json to_json(const ScoreMatrix& m);
json to_json(const Slice& s);
json to_json(const SessionConfig& c);
json to_json(const UsageRecord& u);
json to_json(const TraceEntry& t);
json to_json(const Session& s);

json scalar_to_json(const Scalar& s);

Document document_from_json(const json& j, const std::string& path = "");
Quote quote_from_json(const json& j, const std::string& path = "");
Bullet bullet_from_json(const json& j, const std::string& path = "");
ClusterRun cluster_run_from_json(const json& j, const std::string& path = "");
Concept concept_from_json(const json& j, const std::string& path = "");
ScoreEntry score_entry_from_json(const json& j, const std::string& path = "");
ScoreMatrix score_matrix_from_json(const json& j, const std::string& path = "");
Slice slice_from_json(const json& j, const std::string& path = "");
SessionConfig session_config_from_json(const json& j, const std::string& path = "");
UsageRecord usage_record_from_json(const json& j, const std::string& path = "");
TraceEntry trace_entry_from_json(const json& j, const std::string& path = "");
Session session_from_json(const json& j);

/// Serializes to the schema-versioned UTF-8 JSON session format.
std::string save_session(const Session& s);
void save_session(const Session& s, const std::filesystem::path& destination);

/// Throws DecodeError (with byte offset and field) on corrupt input and
/// VersionError when the schema version is not understood.
Session load_session(std::string_view bytes);
Session load_session_file(const std::filesystem::path& source);

} // namespace lloom
