#include "lloom/scoring/scoring.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "lloom/core/session_io.hpp"
#include "lloom/error.hpp"
#include "lloom/llm/parse.hpp"

namespace lloom {

namespace {

struct Verdict {
    Answer answer;
    std::string rationale;
};

ScoreEntry make_entry(const std::string& doc_id, const std::string& concept_id, Answer a, std::string rationale,
                      double threshold) {
    ScoreEntry e;
    e.doc_id = doc_id;
    e.concept_id = concept_id;
    e.answer = a;
    e.score = answer_to_score(a);
    e.rationale = std::move(rationale);
    e.label = apply_threshold(e.score, threshold);
    return e;
}

ScoreEntry neutral_entry(const std::string& doc_id, const std::string& concept_id, const std::string& why,
                         double threshold) {
    auto e = make_entry(doc_id, concept_id, Answer::C, why, threshold);
    e.error = why;
    return e;
}

// One scoring call over `docs`; returns the valid verdicts it contained.
std::map<std::string, Verdict> ask(EngineContext& ctx, const Concept& cpt,
                                   const std::vector<const Document*>& docs, EventLog& log) {
    json examples = json::array();
    std::set<std::string> wanted;
    json ids = json::array();
    for (const auto* d : docs) {
        examples.push_back(example_record(d->id, d->text));
        wanted.insert(d->id);
        ids.push_back(d->id);
    }
    TemplateParams params{{"examples_json", examples.dump()},
                          {"concept_name", cpt.name},
                          {"concept_prompt", cpt.criteria_prompt}};
    const auto resp = call_llm(ctx, TemplateId::Score, ModelTier::Score, Stage::Scoring, params, 0.0,
                               {{"concept_id", cpt.id}, {"doc_ids", ids}}, log);
    std::map<std::string, Verdict> out;
    for (const auto& r : parse_pattern_results(resp.text)) {
        if (!wanted.count(r.example_id) || out.count(r.example_id)) continue;
        const auto a = parse_answer(r.answer);
        if (!a) {
            log.push_back({"score_invalid_answer",
                           {{"concept_id", cpt.id}, {"doc_id", r.example_id}, {"answer", r.answer}}});
            continue;
        }
        out[r.example_id] = {*a, r.rationale};
    }
    return out;
}

} // namespace

std::vector<ScoreEntry> score_concept(EngineContext& ctx, const Concept& cpt, std::span<const Document> docs,
                                      std::size_t batch_size, double threshold, EventLog& log) {
    if (!cpt.active) throw PreconditionError("concept inactive: " + cpt.id);
    if (batch_size < 1) throw PreconditionError("score batch size must be >= 1");
    const auto n_batches = (docs.size() + batch_size - 1) / batch_size;

    struct BatchOut {
        EventLog log;
        std::vector<ScoreEntry> entries;
    };
    std::atomic<std::size_t> done{0};
    auto batches = parallel_map(n_batches, ctx.workers, [&](std::size_t b) {
        BatchOut out;
        std::vector<const Document*> batch;
        for (std::size_t i = b * batch_size; i < std::min(docs.size(), (b + 1) * batch_size); ++i)
            batch.push_back(&docs[i]);

        std::map<std::string, Verdict> verdicts;
        try {
            verdicts = ask(ctx, cpt, batch, out.log);
        } catch (const ParseError& e) {
            out.log.push_back({"score_parse_failed", {{"concept_id", cpt.id}, {"error", e.what()}}});
        } catch (const Error& e) {
            for (const auto* d : batch) out.entries.push_back(neutral_entry(d->id, cpt.id, e.what(), threshold));
            ctx.report("score", ++done, n_batches);
            return out;
        }

        for (const auto* d : batch) {
            auto it = verdicts.find(d->id);
            if (it == verdicts.end()) {
                out.log.push_back({"score_retry", {{"concept_id", cpt.id}, {"doc_id", d->id}}});
                try {
                    auto single = ask(ctx, cpt, {d}, out.log);
                    it = single.find(d->id);
                    if (it != single.end()) {
                        out.entries.push_back(
                            make_entry(d->id, cpt.id, it->second.answer, it->second.rationale, threshold));
                        continue;
                    }
                } catch (const ParseError&) {
                } catch (const Error& e) {
                    out.entries.push_back(neutral_entry(d->id, cpt.id, e.what(), threshold));
                    continue;
                }
                out.log.push_back({"score_fallback", {{"concept_id", cpt.id}, {"doc_id", d->id}, {"answer", "C"}}});
                out.entries.push_back(neutral_entry(d->id, cpt.id, "no valid answer after retry", threshold));
                continue;
            }
            out.entries.push_back(make_entry(d->id, cpt.id, it->second.answer, it->second.rationale, threshold));
        }
        ctx.report("score", ++done, n_batches);
        return out;
    });

    std::vector<ScoreEntry> entries;
    entries.reserve(docs.size());
    for (auto& b : batches) {
        for (auto& e : b.log) log.push_back(std::move(e));
        for (auto& e : b.entries) entries.push_back(std::move(e));
    }
    return entries;
}

void score_concepts(EngineContext& ctx, Session& session, std::span<const std::string> concept_ids) {
    for (const auto& id : concept_ids) {
        const auto* c = session.find_concept(id);
        if (!c) throw NotFoundError("unknown concept '" + id + "'");
        EventLog log;
        auto entries = score_concept(ctx, *c, session.documents, session.config.score_batch_size,
                                     session.config.score_threshold, log);
        json arr = json::array();
        for (const auto& e : entries) arr.push_back(to_json(e));
        log.push_back({event_kind::kColumnScored, {{"concept_id", id}, {"entries", std::move(arr)}}});
        commit(session, ctx.clock, std::move(log));
    }
}

std::vector<std::string> unscored_concepts(const Session& session) {
    std::vector<std::string> out;
    for (const auto* c : session.active_concepts())
        if (!session.matrix.column(c->id)) out.push_back(c->id);
    return out;
}

std::vector<ScoreEntry> rescore_concept(EngineContext& ctx, Session& session, const std::string& concept_id) {
    if (!session.find_concept(concept_id)) throw NotFoundError("unknown concept '" + concept_id + "'");
    if (const auto* old = session.matrix.column(concept_id)) {
        json arr = json::array();
        for (const auto& e : *old) arr.push_back(to_json(e));
        commit(session, ctx.clock, Event{"column_archived", {{"concept_id", concept_id}, {"entries", std::move(arr)}}});
    }
    const std::string ids[] = {concept_id};
    score_concepts(ctx, session, ids);
    return *session.matrix.column(concept_id);
}

std::string_view to_string(Normalization n) { return n == Normalization::BySlice ? "by_slice" : "by_concept"; }

Normalization normalization_from_string(std::string_view s) {
    if (s == "by_slice") return Normalization::BySlice;
    if (s == "by_concept") return Normalization::ByConcept;
    throw ValidationError("unknown normalization '" + std::string(s) + "' (expected by_slice or by_concept)");
}

PrevalenceCell prevalence(const ScoreMatrix& matrix, const std::string& concept_id, const std::string& slice_name,
                          std::span<const std::string> slice_doc_ids, Normalization normalization) {
    PrevalenceCell cell;
    cell.concept_id = concept_id;
    cell.slice_name = slice_name;
    cell.normalization = normalization;
    const std::set<std::string> in_slice(slice_doc_ids.begin(), slice_doc_ids.end());
    std::size_t total = 0;
    if (const auto* col = matrix.column(concept_id)) {
        for (const auto& e : *col) {
            if (!e.label) continue;
            ++total;
            if (in_slice.count(e.doc_id)) ++cell.count;
        }
    }
    cell.denominator = normalization == Normalization::BySlice ? in_slice.size() : total;
    if (cell.denominator == 0) cell.empty_denominator = true;
    else cell.prevalence = static_cast<double>(cell.count) / static_cast<double>(cell.denominator);
    return cell;
}

double outlier_fraction(const ScoreMatrix& matrix, std::span<const std::string> concept_ids) {
    if (concept_ids.empty()) return 1.0;
    const auto n = matrix.doc_ids.size();
    if (n == 0) return 0.0;
    std::vector<bool> covered(n, false);
    for (const auto& id : concept_ids) {
        const auto* col = matrix.column(id);
        if (!col || col->size() != n) throw PreconditionError("concept '" + id + "' has no complete score column");
        for (std::size_t d = 0; d < n; ++d)
            if ((*col)[d].label) covered[d] = true;
    }
    const auto uncovered = static_cast<std::size_t>(std::count(covered.begin(), covered.end(), false));
    return static_cast<double>(uncovered) / static_cast<double>(n);
}

std::vector<std::string> active_concept_ids(const Session& session) {
    std::vector<std::string> out;
    for (const auto* c : session.active_concepts()) out.push_back(c->id);
    return out;
}

double outlier_fraction(const Session& session) {
    return outlier_fraction(session.matrix, active_concept_ids(session));
}

std::string matrix_csv(const Session& session) {
    std::vector<std::pair<const Concept*, const std::vector<ScoreEntry>*>> cols;
    for (const auto* c : session.active_concepts())
        if (const auto* col = session.matrix.column(c->id)) cols.emplace_back(c, col);
    std::ostringstream out;
    out << "doc_id";
    for (const auto& [c, col] : cols) {
        const auto head = c->name + " [" + c->id + "]";
        out << ',' << csv_escape(head + " score") << ',' << csv_escape(head + " label");
    }
    out << "\r\n";
    for (std::size_t d = 0; d < session.matrix.doc_ids.size(); ++d) {
        out << csv_escape(session.matrix.doc_ids[d]);
        for (const auto& [c, col] : cols) {
            const auto& e = (*col)[d];
            out << ',' << format_number(e.score) << ',' << (e.label ? '1' : '0');
        }
        out << "\r\n";
    }
    return out.str();
}

} // namespace lloom
