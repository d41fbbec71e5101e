#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lloom/core/types.hpp"
#include "lloom/pipeline/engine.hpp"

namespace lloom {

// Analyst actions. Each one commits its events to the session only after all
// LLM work succeeded, so a failure leaves the session untouched.

/// User-authored concept, scored immediately. A duplicate name is allowed
/// (distinct id) and noted with a warning event.
std::string add_concept(EngineContext& ctx, Session& s, const std::string& name, const std::string& criteria);

/// Archives the prior version; rescoring happens only when the criteria change.
Concept edit_concept(EngineContext& ctx, Session& s, const std::string& concept_id,
                     const std::optional<std::string>& name, const std::optional<std::string>& criteria);

/// Combines >= 2 active concepts into one scored concept; sources are deactivated.
Concept merge_concepts(EngineContext& ctx, Session& s, std::span<const std::string> concept_ids);

/// Replaces one concept with >= 2 scored subconcepts; the parent is deactivated.
std::vector<Concept> split_concept(EngineContext& ctx, Session& s, const std::string& concept_id);

/// Parses and type-checks the predicate; redefining a name replaces it.
Slice define_slice(const Clock& clock, Session& s, const std::string& name, const std::string& predicate);

/// Next free id of the form <prefix><n>.
std::string next_concept_id(const Session& s, const std::string& prefix);

} // namespace lloom
