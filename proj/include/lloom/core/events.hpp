#pragma once

#include <span>
#include <string>
#include <vector>

#include "lloom/core/types.hpp"
#include "lloom/core/util.hpp"

namespace lloom {

/// A trace record not yet stamped with sequence number and time. Operators
/// return these so concurrent work can be committed in a stable order.
struct Event {
    std::string kind;
    json data;
};

using EventLog = std::vector<Event>;

// State-changing event kinds. Everything else in the trace is audit-only.
namespace event_kind {
inline constexpr const char* kSessionCreated = "session_created";
inline constexpr const char* kConfigSet = "config_set";
inline constexpr const char* kQuotesAdded = "quotes_added";
inline constexpr const char* kBulletsAdded = "bullets_added";
inline constexpr const char* kClustersAssigned = "clusters_assigned";
inline constexpr const char* kConceptAdded = "concept_added";
inline constexpr const char* kConceptUpdated = "concept_updated";
inline constexpr const char* kColumnScored = "column_scored";
inline constexpr const char* kSliceDefined = "slice_defined";
inline constexpr const char* kLlmCall = "llm_call";
inline constexpr const char* kEmbedCall = "embed_call";
} // namespace event_kind

/// Appends a trace entry and applies its state effect.
void commit(Session& s, const Clock& clock, Event event);
void commit(Session& s, const Clock& clock, EventLog events);

/// Applies the state effect of one entry (no-op for audit-only kinds).
void apply_event(Session& s, const TraceEntry& entry);

/// The state a session had before its first trace entry: id, documents and
/// column types only.
Session initial_state(const Session& s);

/// Rebuilds a session by applying `entries` to `initial`. The rebuilt trace
/// equals `entries`.
Session replay(Session initial, std::span<const TraceEntry> entries);

} // namespace lloom
