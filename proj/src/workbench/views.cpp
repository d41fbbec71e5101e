#include "lloom/workbench/views.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lloom/core/session_io.hpp"
#include "lloom/core/slice_predicate.hpp"
#include "lloom/error.hpp"

namespace lloom {

namespace {

struct NamedSlice {
    std::string name;
    std::string predicate;
    std::vector<std::string> doc_ids;
};

std::vector<NamedSlice> all_slices(const Session& s) {
    std::vector<NamedSlice> out;
    out.push_back({"All", "", slice::slice_documents(s, Slice{"All", ""})});
    for (const auto& sl : s.slices) {
        NamedSlice ns{sl.name, sl.predicate, {}};
        try {
            ns.doc_ids = slice::slice_documents(s, sl);
        } catch (const ValidationError&) {
            // A slice can go stale when a concept it names is merged away.
        }
        out.push_back(std::move(ns));
    }
    return out;
}

json cell_json(const PrevalenceCell& c) {
    return {{"concept_id", c.concept_id},
            {"slice", c.slice_name},
            {"count", c.count},
            {"denominator", c.denominator},
            {"prevalence", c.prevalence},
            {"normalization", to_string(c.normalization)},
            {"empty_denominator", c.empty_denominator}};
}

json concept_row(const Concept& c) {
    return {{"id", c.id},
            {"name", c.name},
            {"criteria", c.criteria_prompt},
            {"origin", to_string(c.origin)},
            {"generation", c.generation},
            {"active", c.active},
            {"generic", c.generic},
            {"subconcept_ids", c.subconcept_ids}};
}

double quantile(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

json histograms(const Session& s, const std::vector<ScoreEntry>* col) {
    json out = json::array();
    for (const auto& [name, type] : s.columns) {
        if (type != ColumnType::Number) continue;
        std::vector<std::pair<double, bool>> points;
        for (std::size_t d = 0; d < s.documents.size(); ++d) {
            const auto it = s.documents[d].metadata.find(name);
            if (it == s.documents[d].metadata.end()) continue;
            const bool match = col && d < col->size() && (*col)[d].label;
            points.emplace_back(std::get<double>(it->second), match);
        }
        if (points.empty()) continue;
        std::vector<double> values;
        for (const auto& p : points) values.push_back(p.first);
        std::sort(values.begin(), values.end());
        std::vector<double> edges;
        for (const double q : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const double e = quantile(values, q);
            if (edges.empty() || e > edges.back()) edges.push_back(e);
        }
        if (edges.size() == 1) edges.push_back(edges.front());
        json bins = json::array();
        for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
            const bool last = b + 2 == edges.size();
            std::size_t n = 0, matches = 0;
            for (const auto& [v, m] : points) {
                if (v < edges[b] || (last ? v > edges[b + 1] : v >= edges[b + 1])) continue;
                ++n;
                if (m) ++matches;
            }
            bins.push_back({{"lo", edges[b]},
                            {"hi", edges[b + 1]},
                            {"inclusive_hi", last},
                            {"count", n},
                            {"matches", matches},
                            {"prevalence", n ? static_cast<double>(matches) / static_cast<double>(n) : 0.0}});
        }
        out.push_back({{"column", name}, {"binning", "quartile"}, {"bins", bins}});
    }
    return out;
}

json metadata_json(const Document& d) {
    json m = json::object();
    for (const auto& [k, v] : d.metadata) m[k] = scalar_to_json(v);
    return m;
}

} // namespace

json highlights(const Session& s, const std::string& doc_id) {
    json out = json::array();
    const auto* doc = s.find_document(doc_id);
    if (!doc) return out;
    for (const auto& q : s.quotes) {
        if (q.doc_id != doc_id) continue;
        const auto pos = doc->text.find(q.text);
        if (pos == std::string::npos) continue;
        out.push_back({{"start", pos}, {"end", pos + q.text.size()}, {"quote", q.text}});
    }
    return out;
}

json matrix_view(const Session& s, Normalization normalization) {
    const auto slices = all_slices(s);
    json concepts = json::array(), columns = json::array(), cells = json::array();
    for (const auto& sl : slices)
        columns.push_back({{"name", sl.name}, {"predicate", sl.predicate}, {"size", sl.doc_ids.size()}});
    for (const auto* c : s.active_concepts()) {
        concepts.push_back(concept_row(*c));
        for (const auto& sl : slices)
            cells.push_back(cell_json(prevalence(s.matrix, c->id, sl.name, sl.doc_ids, normalization)));
    }
    return {{"session_id", s.id},
            {"normalization", to_string(normalization)},
            {"n_documents", s.documents.size()},
            {"concepts", concepts},
            {"slices", columns},
            {"cells", cells}};
}

json concept_detail(const Session& s, const std::string& concept_id) {
    const auto* c = s.find_concept(concept_id);
    if (!c) throw NotFoundError("unknown concept '" + concept_id + "'");
    json out = concept_row(*c);

    json subs = json::array();
    for (const auto& id : c->subconcept_ids) {
        if (const auto* sc = s.find_concept(id)) subs.push_back(concept_row(*sc));
        else subs.push_back({{"id", id}, {"missing", true}});
    }
    out["subconcepts"] = subs;

    json examples = json::array();
    for (const auto& bid : c->representative_example_ids) {
        const auto* b = s.find_bullet(bid);
        if (!b) continue;
        const auto* d = s.find_document(b->doc_id);
        examples.push_back({{"bullet_id", b->id},
                            {"bullet_text", b->text},
                            {"doc_id", b->doc_id},
                            {"doc_text", d ? d->text : ""}});
    }
    out["representative_examples"] = examples;
    out["representative_doc_ids"] = c->representative_doc_ids;

    json per_slice = json::array();
    for (const auto& sl : all_slices(s)) {
        per_slice.push_back({{"slice", sl.name},
                             {"by_slice", cell_json(prevalence(s.matrix, c->id, sl.name, sl.doc_ids, Normalization::BySlice))},
                             {"by_concept",
                              cell_json(prevalence(s.matrix, c->id, sl.name, sl.doc_ids, Normalization::ByConcept))}});
    }
    out["slice_prevalence"] = per_slice;

    const auto* col = s.matrix.column(c->id);
    out["scored"] = col != nullptr;
    out["histograms"] = histograms(s, col);

    json matches = json::array();
    if (col) {
        std::vector<const ScoreEntry*> rows;
        for (const auto& e : *col)
            if (e.label) rows.push_back(&e);
        std::stable_sort(rows.begin(), rows.end(), [](const ScoreEntry* a, const ScoreEntry* b) { return a->score > b->score; });
        for (const auto* e : rows) {
            const auto* d = s.find_document(e->doc_id);
            matches.push_back({{"doc_id", e->doc_id},
                               {"text", d ? d->text : ""},
                               {"answer", to_string(e->answer)},
                               {"score", e->score},
                               {"rationale", e->rationale},
                               {"highlights", highlights(s, e->doc_id)},
                               {"metadata", d ? metadata_json(*d) : json::object()}});
        }
    }
    out["matches"] = matches;
    return out;
}

json slice_detail(const Session& s, const std::string& slice_name) {
    NamedSlice target;
    bool found = false;
    for (auto& sl : all_slices(s))
        if (sl.name == slice_name) {
            target = std::move(sl);
            found = true;
        }
    if (!found) throw NotFoundError("unknown slice '" + slice_name + "'");

    const auto active = s.active_concepts();
    json concepts = json::array();
    for (const auto* c : active) {
        concepts.push_back({{"concept_id", c->id},
                            {"name", c->name},
                            {"by_slice", cell_json(prevalence(s.matrix, c->id, target.name, target.doc_ids, Normalization::BySlice))},
                            {"by_concept",
                             cell_json(prevalence(s.matrix, c->id, target.name, target.doc_ids, Normalization::ByConcept))}});
    }
    json docs = json::array();
    for (const auto& id : target.doc_ids) {
        const auto* d = s.find_document(id);
        json matched = json::array();
        const auto idx = static_cast<std::size_t>(d - s.documents.data());
        for (const auto* c : active) {
            const auto* col = s.matrix.column(c->id);
            if (col && idx < col->size() && (*col)[idx].label) matched.push_back(c->id);
        }
        docs.push_back({{"doc_id", id},
                        {"text", d->text},
                        {"metadata", metadata_json(*d)},
                        {"highlights", highlights(s, id)},
                        {"concepts", matched}});
    }
    return {{"name", target.name},
            {"predicate", target.predicate},
            {"size", target.doc_ids.size()},
            {"concepts", concepts},
            {"documents", docs}};
}

json trace_view(const Session& s, bool debug) {
    json out = json::array();
    for (const auto& t : s.trace) {
        auto j = to_json(t);
        if (!debug && j["data"].is_object()) {
            j["data"].erase("prompt");
            j["data"].erase("response");
        }
        out.push_back(std::move(j));
    }
    return out;
}

json session_summary(const Session& s) {
    json columns = json::object();
    for (const auto& [k, t] : s.columns) columns[k] = to_string(t);
    std::size_t active = 0;
    for (const auto& c : s.concepts) active += c.active ? 1 : 0;
    return {{"id", s.id},
            {"schema_version", s.schema_version},
            {"n_documents", s.documents.size()},
            {"columns", columns},
            {"n_concepts", s.concepts.size()},
            {"n_active_concepts", active},
            {"n_bullets", s.bullets.size()},
            {"slices", json(s.slices.size())},
            {"trace_length", s.trace.size()},
            {"config", to_json(s.config)}};
}

} // namespace lloom
