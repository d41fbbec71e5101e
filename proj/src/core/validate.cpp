#include "lloom/core/validate.hpp"

#include <cctype>
#include <map>
#include <set>

#include "lloom/core/answer_scale.hpp"
#include "lloom/core/slice_predicate.hpp"
#include "lloom/core/util.hpp"

namespace lloom {

std::optional<Answer> parse_answer(std::string_view text) {
    const auto t = trim(text);
    if (t.empty()) return std::nullopt;
    const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(t[0])));
    if (c < 'A' || c > 'E') return std::nullopt;
    if (t.size() > 1 && std::isalpha(static_cast<unsigned char>(t[1]))) return std::nullopt;
    return static_cast<Answer>(c - 'A');
}

std::vector<Violation> validate_session(const Session& s) {
    std::vector<Violation> out;
    auto add = [&](std::string code, std::string detail) { out.push_back({std::move(code), std::move(detail)}); };

    const auto& cfg = s.config;
    if (!(cfg.score_threshold > 0.0 && cfg.score_threshold <= 1.0))
        add("config-score-threshold", "score_threshold must be in (0, 1]");
    if (!(cfg.generic_fraction > 0.0 && cfg.generic_fraction <= 1.0))
        add("config-generic-fraction", "generic_fraction must be in (0, 1]");
    if (cfg.sample_size < 1) add("config-sample-size", "sample_size must be >= 1");

    std::map<std::string, const Document*> docs;
    for (const auto& d : s.documents) {
        if (!docs.emplace(d.id, &d).second) add("duplicate-document-id", d.id);
        if (trim(d.text).empty()) add("empty-document-text", d.id);
    }

    for (const auto& q : s.quotes) {
        const auto it = docs.find(q.doc_id);
        if (it == docs.end()) add("quote-unknown-document", q.doc_id);
        else if (q.text.empty() || it->second->text.find(q.text) == std::string::npos)
            add("quote-not-verbatim", q.doc_id + ": " + q.text);
    }

    std::set<std::string> bullet_ids;
    for (const auto& b : s.bullets) {
        if (!bullet_ids.insert(b.id).second) add("duplicate-bullet-id", b.id);
        if (!docs.count(b.doc_id)) add("bullet-unknown-document", b.id + " -> " + b.doc_id);
    }

    for (const auto& run : s.clusterings) {
        std::map<int, std::size_t> sizes;
        for (const auto& a : run.assignments) {
            if (!bullet_ids.count(a.bullet_id)) add("cluster-unknown-bullet", a.bullet_id);
            if (a.cluster_id != kNoise) {
                if (a.cluster_id < 0) add("cluster-invalid-id", a.bullet_id);
                ++sizes[a.cluster_id];
            }
        }
        for (const auto& [id, n] : sizes)
            if (n < run.min_cluster_size)
                add("cluster-too-small", "iteration " + std::to_string(run.iteration) + " cluster " +
                                             std::to_string(id) + " has " + std::to_string(n) + " members");
    }

    std::set<std::string> concept_ids;
    for (const auto& c : s.concepts)
        if (!concept_ids.insert(c.id).second) add("duplicate-concept-id", c.id);

    std::set<std::string> traced;
    for (const auto& t : s.trace) {
        if (t.kind == "concept_added" && t.data.contains("concept") && t.data["concept"].contains("id") &&
            t.data["concept"]["id"].is_string())
            traced.insert(t.data["concept"]["id"].get<std::string>());
    }

    for (const auto& c : s.concepts) {
        if (trim(c.criteria_prompt).empty()) add("concept-empty-criteria", c.id);
        if (trim(c.name).empty()) add("concept-empty-name", c.id);
        if (c.generation < 0) add("concept-negative-generation", c.id);
        for (const auto& ex : c.representative_example_ids)
            if (!bullet_ids.count(ex) && !docs.count(ex)) add("concept-unresolved-example", c.id + " -> " + ex);
        for (const auto& d : c.representative_doc_ids)
            if (!docs.count(d)) add("concept-unresolved-example", c.id + " -> " + d);
        if ((c.origin == ConceptOrigin::Merged || c.origin == ConceptOrigin::Split) && c.subconcept_ids.empty())
            add("concept-missing-parents", c.id);
        for (const auto& p : c.subconcept_ids)
            if (!concept_ids.count(p)) add("concept-unknown-subconcept", c.id + " -> " + p);
        if (!traced.count(c.id)) add("concept-untraced", c.id);
    }

    // Matrix.
    const auto& m = s.matrix;
    if (m.columns.size() != m.concept_ids.size()) add("matrix-shape", "columns/concept_ids length mismatch");
    for (const auto& id : m.doc_ids)
        if (!docs.count(id)) add("matrix-unknown-document", id);
    for (std::size_t c = 0; c < m.concept_ids.size() && c < m.columns.size(); ++c) {
        const auto& cid = m.concept_ids[c];
        if (!concept_ids.count(cid)) add("matrix-unknown-concept", cid);
        const auto& col = m.columns[c];
        if (col.size() != m.doc_ids.size()) add("matrix-missing-entry", cid);
        for (std::size_t r = 0; r < col.size(); ++r) {
            const auto& e = col[r];
            if (r < m.doc_ids.size() && e.doc_id != m.doc_ids[r]) add("matrix-order", cid + " row " + std::to_string(r));
            if (e.concept_id != cid) add("matrix-order", cid + " entry names " + e.concept_id);
            if (e.score != answer_to_score(e.answer)) add("score-answer-mismatch", cid + "/" + e.doc_id);
            if (e.label != apply_threshold(e.score, cfg.score_threshold))
                add("label-threshold-mismatch", cid + "/" + e.doc_id);
        }
    }
    // A scored session has a column for every active concept.
    if (!m.columns.empty())
        for (const auto& c : s.concepts)
            if (c.active && !m.column_index(c.id)) add("matrix-missing-column", c.id);

    std::set<std::string> slice_names;
    for (const auto& sl : s.slices) {
        if (!slice_names.insert(sl.name).second) add("duplicate-slice", sl.name);
        try {
            slice::check(slice::parse(sl.predicate), s);
        } catch (const slice::PredicateError& e) {
            add("slice-parse-error", sl.name + ": " + e.what());
        } catch (const ValidationError& e) {
            add("slice-unknown-reference", sl.name + ": " + e.what());
        }
    }

    for (std::size_t i = 1; i < s.trace.size(); ++i)
        if (s.trace[i].seq <= s.trace[i - 1].seq) add("trace-order", std::to_string(s.trace[i].seq));

    return out;
}

} // namespace lloom
