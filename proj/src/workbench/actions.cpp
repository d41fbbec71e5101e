#include "lloom/workbench/actions.hpp"

#include <algorithm>
#include <set>

#include "lloom/core/session_io.hpp"
#include "lloom/core/slice_predicate.hpp"
#include "lloom/error.hpp"
#include "lloom/llm/parse.hpp"
#include "lloom/scoring/scoring.hpp"

namespace lloom {

namespace {

// Scoring events for `c`, ending with column_scored.
EventLog score_events(EngineContext& ctx, const Session& s, const Concept& c) {
    EventLog log;
    const auto entries = score_concept(ctx, c, s.documents, s.config.score_batch_size, s.config.score_threshold, log);
    json arr = json::array();
    for (const auto& e : entries) arr.push_back(to_json(e));
    log.push_back({event_kind::kColumnScored, {{"concept_id", c.id}, {"entries", std::move(arr)}}});
    return log;
}

void append(EventLog& to, EventLog&& from) {
    for (auto& e : from) to.push_back(std::move(e));
}

const Concept& require_active(const Session& s, const std::string& id) {
    const auto* c = s.find_concept(id);
    if (!c) throw NotFoundError("unknown concept '" + id + "'");
    if (!c->active) throw PreconditionError("concept inactive: " + id);
    return *c;
}

json name_prompt(const Concept& c) { return {{"name", c.name}, {"prompt", c.criteria_prompt}}; }

TemplateParams seeded(const SessionConfig& config) {
    TemplateParams p;
    if (config.seed_term) p["seed_term"] = *config.seed_term;
    return p;
}

} // namespace

std::string next_concept_id(const Session& s, const std::string& prefix) {
    for (std::size_t n = 1;; ++n) {
        auto id = prefix + std::to_string(n);
        if (!s.find_concept(id)) return id;
    }
}

std::string add_concept(EngineContext& ctx, Session& s, const std::string& name, const std::string& criteria) {
    const auto n = std::string(trim(name));
    const auto q = std::string(trim(criteria));
    if (n.empty()) throw ValidationError("concept name must not be empty");
    if (q.empty()) throw ValidationError("concept criteria must not be empty");

    Concept c;
    c.id = next_concept_id(s, "u");
    c.name = n;
    c.criteria_prompt = q;
    c.origin = ConceptOrigin::UserAuthored;

    EventLog log;
    log.push_back({"user_action", {{"action", "add_concept"}, {"name", n}, {"criteria", q}}});
    for (const auto& other : s.concepts)
        if (other.active && other.name == n)
            log.push_back({"duplicate_name", {{"concept_id", c.id}, {"existing_id", other.id}, {"name", n}}});
    log.push_back({event_kind::kConceptAdded, {{"concept", to_json(c)}}});
    append(log, score_events(ctx, s, c));
    commit(s, ctx.clock, std::move(log));
    return c.id;
}

Concept edit_concept(EngineContext& ctx, Session& s, const std::string& concept_id,
                     const std::optional<std::string>& name, const std::optional<std::string>& criteria) {
    const auto& old = require_active(s, concept_id);
    auto c = old;
    if (name) {
        if (trim(*name).empty()) throw ValidationError("concept name must not be empty");
        c.name = std::string(trim(*name));
    }
    bool rescore = false;
    if (criteria) {
        if (trim(*criteria).empty()) throw ValidationError("concept criteria must not be empty");
        const auto q = std::string(trim(*criteria));
        rescore = q != old.criteria_prompt;
        c.criteria_prompt = q;
    }

    EventLog log;
    log.push_back({"user_action",
                   {{"action", "edit_concept"},
                    {"concept_id", concept_id},
                    {"name", name ? json(*name) : json()},
                    {"criteria", criteria ? json(*criteria) : json()}}});
    log.push_back({"concept_archived", {{"concept", to_json(old)}}});
    log.push_back({event_kind::kConceptUpdated, {{"concept", to_json(c)}}});
    if (rescore) {
        if (const auto* col = s.matrix.column(concept_id)) {
            json arr = json::array();
            for (const auto& e : *col) arr.push_back(to_json(e));
            log.push_back({"column_archived", {{"concept_id", concept_id}, {"entries", std::move(arr)}}});
        }
        append(log, score_events(ctx, s, c));
    }
    commit(s, ctx.clock, std::move(log));
    return c;
}

Concept merge_concepts(EngineContext& ctx, Session& s, std::span<const std::string> concept_ids) {
    std::vector<std::string> ids;
    for (const auto& id : concept_ids)
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    if (ids.size() < 2) throw PreconditionError("merge needs at least two distinct concepts");
    std::vector<const Concept*> sources;
    for (const auto& id : ids) sources.push_back(&require_active(s, id));

    EventLog log;
    log.push_back({"user_action", {{"action", "merge_concepts"}, {"concept_ids", ids}}});
    json items = json::array();
    for (const auto* c : sources) items.push_back(name_prompt(*c));
    auto params = seeded(s.config);
    params["concepts_json"] = items.dump();
    params["n_name_words"] = s.config.n_name_words;
    const auto resp = call_llm(ctx, TemplateId::Merge, ModelTier::Synthesize, Stage::Generation, params,
                               s.config.temperature, {{"concept_ids", ids}}, log);
    const auto patterns = parse_patterns(resp.text);
    if (patterns.empty() || trim(patterns.front().name).empty() || trim(patterns.front().prompt).empty())
        throw ParseError("merge response contained no usable pattern", resp.text);

    Concept merged;
    merged.id = next_concept_id(s, "m");
    merged.name = std::string(trim(patterns.front().name));
    merged.criteria_prompt = std::string(trim(patterns.front().prompt));
    merged.origin = ConceptOrigin::Merged;
    merged.subconcept_ids = ids;
    for (const auto* c : sources) {
        merged.generation = std::max(merged.generation, c->generation);
        for (const auto& e : c->representative_example_ids)
            if (std::find(merged.representative_example_ids.begin(), merged.representative_example_ids.end(), e) ==
                merged.representative_example_ids.end())
                merged.representative_example_ids.push_back(e);
        for (const auto& d : c->representative_doc_ids)
            if (std::find(merged.representative_doc_ids.begin(), merged.representative_doc_ids.end(), d) ==
                merged.representative_doc_ids.end())
                merged.representative_doc_ids.push_back(d);
    }
    log.push_back({event_kind::kConceptAdded, {{"concept", to_json(merged)}}});
    for (const auto* c : sources) {
        auto off = *c;
        off.active = false;
        log.push_back({event_kind::kConceptUpdated, {{"concept", to_json(off)}, {"reason", "merged into " + merged.id}}});
    }
    append(log, score_events(ctx, s, merged));
    commit(s, ctx.clock, std::move(log));
    return merged;
}

std::vector<Concept> split_concept(EngineContext& ctx, Session& s, const std::string& concept_id) {
    const auto& parent = require_active(s, concept_id);

    EventLog log;
    log.push_back({"user_action", {{"action", "split_concept"}, {"concept_id", concept_id}}});
    auto params = seeded(s.config);
    params["concept_json"] = name_prompt(parent).dump();
    params["n_concepts"] = "2-3";
    params["n_name_words"] = s.config.n_name_words;
    const auto resp = call_llm(ctx, TemplateId::Split, ModelTier::Synthesize, Stage::Generation, params,
                               s.config.temperature, {{"concept_id", concept_id}}, log);

    std::vector<Concept> subs;
    std::set<std::string> taken;
    for (const auto& p : parse_patterns(resp.text)) {
        if (trim(p.name).empty() || trim(p.prompt).empty()) continue;
        Concept c;
        for (std::size_t n = 1;; ++n) {
            c.id = "s" + std::to_string(n);
            if (!s.find_concept(c.id) && !taken.count(c.id)) break;
        }
        taken.insert(c.id);
        c.name = std::string(trim(p.name));
        c.criteria_prompt = std::string(trim(p.prompt));
        c.origin = ConceptOrigin::Split;
        c.subconcept_ids = {concept_id};
        c.generation = parent.generation;
        subs.push_back(std::move(c));
    }
    if (subs.size() < 2)
        throw PipelineError("split of '" + concept_id + "' produced " + std::to_string(subs.size()) +
                            " subconcept(s); at least 2 are required");

    for (const auto& c : subs) log.push_back({event_kind::kConceptAdded, {{"concept", to_json(c)}}});
    auto off = parent;
    off.active = false;
    log.push_back({event_kind::kConceptUpdated, {{"concept", to_json(off)}, {"reason", "split"}}});
    for (const auto& c : subs) append(log, score_events(ctx, s, c));
    commit(s, ctx.clock, std::move(log));
    return subs;
}

Slice define_slice(const Clock& clock, Session& s, const std::string& name, const std::string& predicate) {
    const auto n = std::string(trim(name));
    if (n.empty()) throw ValidationError("slice name must not be empty");
    if (n == "All") throw ValidationError("slice name 'All' is reserved");
    const auto expr = slice::parse(predicate);
    slice::check(expr, s);
    Slice slice{n, predicate};
    commit(s, clock, Event{event_kind::kSliceDefined, {{"slice", to_json(slice)}}});
    return slice;
}

} // namespace lloom
