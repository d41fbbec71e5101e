#include "lloom/core/events.hpp"

#include <algorithm>

#include "lloom/core/session_io.hpp"
#include "lloom/error.hpp"

namespace lloom {

void commit(Session& s, const Clock& clock, Event event) {
    TraceEntry entry;
    entry.seq = s.trace.empty() ? 1 : s.trace.back().seq + 1;
    entry.timestamp = iso8601(clock());
    entry.kind = std::move(event.kind);
    entry.data = std::move(event.data);
    apply_event(s, entry);
    s.trace.push_back(std::move(entry));
}

void commit(Session& s, const Clock& clock, EventLog events) {
    for (auto& e : events) commit(s, clock, std::move(e));
}

void apply_event(Session& s, const TraceEntry& entry) {
    namespace k = event_kind;
    const auto& d = entry.data;
    const auto& kind = entry.kind;
    if (kind == k::kSessionCreated || kind == k::kConfigSet) {
        s.config = session_config_from_json(d.at("config"), "/config");
        if (kind == k::kSessionCreated && s.matrix.doc_ids.empty())
            for (const auto& doc : s.documents) s.matrix.doc_ids.push_back(doc.id);
    } else if (kind == k::kQuotesAdded) {
        for (const auto& q : d.at("quotes")) s.quotes.push_back(quote_from_json(q));
    } else if (kind == k::kBulletsAdded) {
        for (const auto& b : d.at("bullets")) s.bullets.push_back(bullet_from_json(b));
    } else if (kind == k::kClustersAssigned) {
        s.clusterings.push_back(cluster_run_from_json(d.at("run")));
    } else if (kind == k::kConceptAdded) {
        auto c = concept_from_json(d.at("concept"));
        if (s.find_concept(c.id)) throw Error("duplicate concept id in trace: " + c.id);
        s.concepts.push_back(std::move(c));
    } else if (kind == k::kConceptUpdated) {
        auto c = concept_from_json(d.at("concept"));
        auto* existing = s.find_concept(c.id);
        if (!existing) throw Error("trace updates unknown concept " + c.id);
        *existing = std::move(c);
    } else if (kind == k::kColumnScored) {
        std::vector<ScoreEntry> entries;
        for (const auto& e : d.at("entries")) entries.push_back(score_entry_from_json(e));
        s.matrix.set_column(d.at("concept_id").get<std::string>(), std::move(entries));
    } else if (kind == k::kSliceDefined) {
        auto slice = slice_from_json(d.at("slice"));
        const auto it = std::find_if(s.slices.begin(), s.slices.end(),
                                     [&](const Slice& x) { return x.name == slice.name; });
        if (it != s.slices.end()) *it = std::move(slice);
        else s.slices.push_back(std::move(slice));
    } else if (kind == k::kLlmCall) {
        s.usage.push_back(usage_record_from_json(d.at("usage")));
    } else if (kind == k::kEmbedCall) {
        for (const auto& u : d.at("usage")) s.usage.push_back(usage_record_from_json(u));
    }
}

Session initial_state(const Session& s) {
    Session base;
    base.schema_version = s.schema_version;
    base.id = s.id;
    base.documents = s.documents;
    base.columns = s.columns;
    return base;
}

Session replay(Session initial, std::span<const TraceEntry> entries) {
    for (const auto& e : entries) {
        apply_event(initial, e);
        initial.trace.push_back(e);
    }
    return initial;
}

} // namespace lloom
