#include "lloom/pipeline/induction.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include "lloom/cluster/hdbscan.hpp"
#include "lloom/core/session_io.hpp"
#include "lloom/error.hpp"
#include "lloom/llm/parse.hpp"
#include "lloom/scoring/scoring.hpp"

namespace lloom {

namespace {

// Unbiased draw in [0, n); std distributions are not portable across
// standard libraries.
std::uint64_t bounded(std::mt19937_64& g, std::uint64_t n) {
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    const auto limit = kMax - kMax % n;
    std::uint64_t x;
    do {
        x = g();
    } while (x >= limit);
    return x % n;
}

TemplateParams base_params(const SessionConfig& config) {
    TemplateParams p;
    if (config.seed_term) p["seed_term"] = *config.seed_term;
    return p;
}

} // namespace

std::vector<std::string> sample_documents(std::span<const Document> docs, std::size_t cap, std::uint64_t rng_seed) {
    if (cap < 1) throw PreconditionError("sample cap must be >= 1");
    const auto n = docs.size();
    const auto k = std::min(cap, n);
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::mt19937_64 gen(rng_seed);
    for (std::size_t i = 0; i < k && k < n; ++i) std::swap(idx[i], idx[i + bounded(gen, n - i)]);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    std::vector<std::string> out;
    out.reserve(k);
    for (const auto i : idx) out.push_back(docs[i].id);
    return out;
}

bool filter_applies(const Document& doc, const SessionConfig& config) {
    return doc.text.size() > config.filter_min_chars;
}

std::vector<Quote> distill_filter(EngineContext& ctx, const Document& doc, const SessionConfig& config,
                                  EventLog& log) {
    if (!filter_applies(doc, config)) {
        log.push_back({"filter_skipped", {{"doc_id", doc.id}, {"chars", doc.text.size()}}});
        return {};
    }
    auto params = base_params(config);
    params["text_example_json"] = example_record(doc.id, doc.text).dump();
    if (config.n_quotes) params["n_quotes"] = *config.n_quotes;
    const auto resp = call_llm(ctx, TemplateId::Filter, ModelTier::Distill, Stage::Generation, params,
                               config.temperature, {{"doc_id", doc.id}}, log);

    std::vector<Quote> quotes;
    std::set<std::string> seen;
    for (auto& q : parse_quotes(resp.text)) {
        if (trim(q).empty() || seen.count(q)) continue;
        if (doc.text.find(q) == std::string::npos) {
            log.push_back({"quote_dropped", {{"doc_id", doc.id}, {"quote", q}, {"reason", "not-verbatim"}}});
            continue;
        }
        seen.insert(q);
        quotes.push_back({doc.id, std::move(q)});
    }
    if (!quotes.empty()) {
        json arr = json::array();
        for (const auto& q : quotes) arr.push_back(to_json(q));
        log.push_back({event_kind::kQuotesAdded, {{"doc_id", doc.id}, {"quotes", std::move(arr)}}});
    }
    return quotes;
}

std::vector<Bullet> distill_summarize(EngineContext& ctx, const std::string& doc_id, const std::string& source_text,
                                      const SessionConfig& config, int iteration, EventLog& log) {
    if (trim(source_text).empty()) throw PreconditionError("summarize source text is empty for " + doc_id);
    auto params = base_params(config);
    params["text_example_json"] = example_record(doc_id, source_text).dump();
    params["n_bullets"] = config.n_bullets;
    params["n_words"] = config.n_words;
    const auto resp = call_llm(ctx, TemplateId::Summarize, ModelTier::Distill, Stage::Generation, params,
                               config.temperature, {{"doc_id", doc_id}}, log);

    std::vector<Bullet> bullets;
    for (const auto& raw : parse_bullets(resp.text)) {
        const auto text = std::string(trim(raw));
        if (text.empty()) {
            log.push_back({"bullet_dropped", {{"doc_id", doc_id}, {"reason", "empty"}}});
            continue;
        }
        Bullet b;
        b.id = "i" + std::to_string(iteration) + "-" + doc_id + "-" + std::to_string(bullets.size() + 1);
        b.doc_id = doc_id;
        b.text = text;
        b.iteration = iteration;
        bullets.push_back(std::move(b));
    }
    if (!bullets.empty()) {
        json arr = json::array();
        for (const auto& b : bullets) arr.push_back(to_json(b));
        log.push_back({event_kind::kBulletsAdded, {{"doc_id", doc_id}, {"bullets", std::move(arr)}}});
    }
    return bullets;
}

std::size_t concepts_per_cluster(std::size_t max_concepts, std::size_t n_clusters) {
    if (n_clusters == 0) return 1;
    const auto per = (max_concepts + n_clusters - 1) / n_clusters;
    return std::clamp<std::size_t>(per, 1, 5);
}

std::vector<Concept> synthesize_cluster(EngineContext& ctx, int cluster_id,
                                        std::span<const Bullet> bullets, std::size_t n_concepts,
                                        const SessionConfig& config, int iteration, EventLog& log) {
    if (bullets.empty()) throw PreconditionError("cannot synthesize an empty cluster");
    json items = json::array();
    std::map<std::string, std::string> doc_of;
    for (const auto& b : bullets) {
        items.push_back(example_record(b.id, b.text));
        doc_of[b.id] = b.doc_id;
    }
    auto params = base_params(config);
    params["bullets_json"] = items.dump();
    params["n_concepts"] = std::to_string(n_concepts);
    params["n_name_words"] = config.n_name_words;
    params["n_example_ids"] = config.n_example_ids;
    const json item{{"iteration", iteration}, {"cluster", cluster_id}};
    const auto resp = call_llm(ctx, TemplateId::Synthesize, ModelTier::Synthesize, Stage::Generation, params,
                               config.temperature, item, log);

    const auto patterns = parse_patterns(resp.text);
    std::vector<Concept> out;
    for (const auto& p : patterns) {
        const auto name = std::string(trim(p.name));
        const auto prompt = std::string(trim(p.prompt));
        if (name.empty() || prompt.empty()) {
            log.push_back({"pattern_dropped", {{"cluster", cluster_id}, {"name", p.name}, {"reason", "empty"}}});
            continue;
        }
        Concept c;
        c.id = "g" + std::to_string(iteration) + "-k" + std::to_string(cluster_id) + "-" +
               std::to_string(out.size() + 1);
        c.name = name;
        c.criteria_prompt = prompt;
        c.generation = iteration;
        c.origin = ConceptOrigin::Synthesized;
        c.source_cluster = cluster_id;
        for (const auto& ex : p.example_ids) {
            const auto it = doc_of.find(ex);
            if (it == doc_of.end()) {
                log.push_back({"example_id_dropped",
                               {{"concept_id", c.id}, {"cluster", cluster_id}, {"example_id", ex}}});
                continue;
            }
            if (std::find(c.representative_example_ids.begin(), c.representative_example_ids.end(), ex) !=
                c.representative_example_ids.end())
                continue;
            c.representative_example_ids.push_back(ex);
            if (std::find(c.representative_doc_ids.begin(), c.representative_doc_ids.end(), it->second) ==
                c.representative_doc_ids.end())
                c.representative_doc_ids.push_back(it->second);
        }
        out.push_back(std::move(c));
    }
    if (out.empty()) log.push_back({"barren_cluster", item});
    return out;
}

GenerationResult run_generation(EngineContext& ctx, Session& session, std::span<const std::string> inputs,
                                int iteration) {
    if (inputs.empty()) throw PreconditionError("run_generation requires at least one input document");
    const auto config = session.config;
    GenerationResult result;
    auto& trace = result.trace;
    trace.iteration = iteration;

    std::vector<const Document*> docs;
    std::set<std::string> seen;
    for (const auto& id : inputs) {
        if (!seen.insert(id).second) continue;
        const auto* d = session.find_document(id);
        if (!d) throw NotFoundError("unknown document '" + id + "'");
        docs.push_back(d);
        trace.input_doc_ids.push_back(id);
    }
    commit(session, ctx.clock, Event{"generation_started", {{"iteration", iteration}, {"doc_ids", trace.input_doc_ids}}});

    // Distill.
    struct DocOut {
        EventLog log;
        std::vector<Bullet> bullets;
        bool failed = false;
    };
    std::atomic<std::size_t> done{0};
    auto distilled = parallel_map(docs.size(), ctx.workers, [&](std::size_t i) {
        DocOut out;
        const auto& doc = *docs[i];
        try {
            const auto quotes = distill_filter(ctx, doc, config, out.log);
            std::string source = doc.text;
            if (!quotes.empty()) {
                std::vector<std::string> parts;
                for (const auto& q : quotes) parts.push_back(q.text);
                source = join(parts, "\n");
            } else if (filter_applies(doc, config)) {
                out.log.push_back({"filter_empty", {{"doc_id", doc.id}}});
            }
            out.bullets = distill_summarize(ctx, doc.id, source, config, iteration, out.log);
        } catch (const std::exception& e) {
            out.failed = true;
            out.log.push_back({"distill_failed", {{"doc_id", doc.id}, {"error", e.what()}}});
        }
        ctx.report("distill", ++done, docs.size());
        return out;
    });

    std::vector<Bullet> bullets;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        commit(session, ctx.clock, std::move(distilled[i].log));
        if (distilled[i].failed) trace.failed_doc_ids.push_back(docs[i]->id);
        for (auto& b : distilled[i].bullets) {
            trace.bullet_ids.push_back(b.id);
            bullets.push_back(std::move(b));
        }
    }
    if (trace.failed_doc_ids.size() == docs.size())
        throw PipelineError("every document failed distillation in iteration " + std::to_string(iteration));

    auto finish_without_clusters = [&](const std::string& reason) {
        trace.no_clusters = true;
        commit(session, ctx.clock, Event{"no_clusters", {{"iteration", iteration}, {"reason", reason}}});
        return result;
    };
    if (bullets.empty()) return finish_without_clusters("no bullets");

    // Cluster.
    std::vector<std::string> texts, ids;
    for (const auto& b : bullets) {
        texts.push_back(b.text);
        ids.push_back(b.id);
    }
    ctx.report("embed", 0, 1);
    auto embedded = ctx.gateway.embed(texts, ids, Stage::Generation);
    {
        json usage = json::array();
        for (const auto& u : embedded.usage) usage.push_back(to_json(u));
        commit(session, ctx.clock,
               Event{event_kind::kEmbedCall,
                     {{"iteration", iteration},
                      {"model", ctx.gateway.model_for(ModelTier::Embed)},
                      {"count", embedded.vectors.size()},
                      {"dimension", embedded.vectors.front().values.size()},
                      {"usage", std::move(usage)}}});
    }
    ctx.report("embed", 1, 1);

    ClusterRun run;
    run.iteration = iteration;
    run.min_cluster_size = config.min_cluster_size.value_or(cluster::default_min_cluster_size(bullets.size()));
    if (bullets.size() < run.min_cluster_size || run.min_cluster_size < 2) {
        for (const auto& b : bullets) run.assignments.push_back({b.id, kNoise, 0.0});
    } else {
        run.assignments = cluster::hdbscan(embedded.vectors, run.min_cluster_size, config.min_samples);
    }
    commit(session, ctx.clock, Event{event_kind::kClustersAssigned, {{"run", to_json(run)}}});

    std::map<int, std::vector<Bullet>> clusters;
    for (std::size_t i = 0; i < bullets.size(); ++i)
        if (run.assignments[i].cluster_id != kNoise) clusters[run.assignments[i].cluster_id].push_back(bullets[i]);
    if (clusters.empty()) return finish_without_clusters("all bullets are noise");

    // Synthesize.
    const auto n_concepts =
        config.n_concepts_per_cluster.value_or(concepts_per_cluster(config.max_concepts, clusters.size()));
    std::vector<std::pair<int, const std::vector<Bullet>*>> order;
    for (const auto& [cid, members] : clusters) order.emplace_back(cid, &members);
    struct ClusterOut {
        EventLog log;
        std::vector<Concept> concepts;
    };
    done = 0;
    auto synthesized = parallel_map(order.size(), ctx.workers, [&](std::size_t i) {
        ClusterOut out;
        const auto [cid, members] = order[i];
        try {
            out.concepts = synthesize_cluster(ctx, cid, *members, n_concepts, config, iteration, out.log);
        } catch (const std::exception& e) {
            out.log.push_back({"synthesize_failed", {{"iteration", iteration}, {"cluster", cid}, {"error", e.what()}}});
        }
        ctx.report("synthesize", ++done, order.size());
        return out;
    });
    for (auto& s : synthesized) commit(session, ctx.clock, std::move(s.log));

    // Cap: bigger clusters first, then lower cluster id.
    std::size_t total = 0;
    for (const auto& s : synthesized) total += s.concepts.size();
    std::set<std::string> keep;
    if (total > config.max_concepts) {
        std::vector<std::size_t> rank(order.size());
        for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
        std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
            const auto sa = order[a].second->size(), sb = order[b].second->size();
            if (sa != sb) return sa > sb;
            return order[a].first < order[b].first;
        });
        for (const auto r : rank)
            for (const auto& c : synthesized[r].concepts)
                if (keep.size() < config.max_concepts) keep.insert(c.id);
        json kept = json::array(), dropped = json::array();
        for (const auto& s : synthesized)
            for (const auto& c : s.concepts) {
                (keep.count(c.id) ? kept : dropped).push_back(c.id);
                if (!keep.count(c.id)) trace.capped_concept_ids.push_back(c.id);
            }
        commit(session, ctx.clock,
               Event{"concepts_capped",
                     {{"iteration", iteration}, {"max_concepts", config.max_concepts}, {"kept", kept}, {"dropped", dropped}}});
    } else {
        for (const auto& s : synthesized)
            for (const auto& c : s.concepts) keep.insert(c.id);
    }

    EventLog added;
    for (std::size_t i = 0; i < order.size(); ++i) {
        ClusterSummary summary;
        summary.cluster_id = order[i].first;
        for (const auto& b : *order[i].second) summary.bullet_ids.push_back(b.id);
        for (auto& c : synthesized[i].concepts) {
            if (!keep.count(c.id)) continue;
            summary.concept_ids.push_back(c.id);
            added.push_back({event_kind::kConceptAdded, {{"concept", to_json(c)}}});
            result.concepts.push_back(std::move(c));
        }
        trace.clusters.push_back(std::move(summary));
    }
    commit(session, ctx.clock, std::move(added));
    json emitted = json::array();
    for (const auto& c : result.concepts) emitted.push_back(c.id);
    commit(session, ctx.clock, Event{"generation_finished", {{"iteration", iteration}, {"concept_ids", emitted}}});
    return result;
}

LoopSelection loop_select_inputs(const ScoreMatrix& matrix, std::span<const std::string> concept_ids,
                                 double generic_fraction) {
    const auto n = matrix.doc_ids.size();
    std::vector<const std::vector<ScoreEntry>*> cols;
    std::vector<bool> generic;
    LoopSelection sel;
    for (const auto& id : concept_ids) {
        const auto* col = matrix.column(id);
        if (!col) throw PreconditionError("concept '" + id + "' has not been scored");
        if (col->size() != n) throw PreconditionError("column for '" + id + "' is incomplete");
        const auto matches = static_cast<std::size_t>(
            std::count_if(col->begin(), col->end(), [](const ScoreEntry& e) { return e.label; }));
        const bool g = n > 0 && static_cast<double>(matches) / static_cast<double>(n) >= generic_fraction;
        cols.push_back(col);
        generic.push_back(g);
        if (g) sel.generic_concept_ids.push_back(id);
    }
    for (std::size_t d = 0; d < n; ++d) {
        bool specific_match = false;
        for (std::size_t c = 0; c < cols.size() && !specific_match; ++c)
            specific_match = (*cols[c])[d].label && !generic[c];
        if (!specific_match) sel.doc_ids.push_back(matrix.doc_ids[d]);
    }
    return sel;
}

IterationsResult run_iterations(EngineContext& ctx, Session& session, std::size_t n_loops) {
    if (n_loops < 1) throw PreconditionError("n_loops must be >= 1");
    IterationsResult result;
    auto inputs = sample_documents(session.documents, session.config.sample_size, session.config.rng_seed);
    commit(session, ctx.clock,
           Event{"documents_sampled", {{"rng_seed", session.config.rng_seed}, {"doc_ids", inputs}}});

    for (std::size_t k = 0; k < n_loops; ++k) {
        const auto iteration = static_cast<int>(k);
        auto gen = run_generation(ctx, session, inputs, iteration);
        for (const auto& c : gen.concepts) result.concept_ids.push_back(c.id);
        result.traces.push_back(std::move(gen.trace));

        const auto todo = unscored_concepts(session);
        score_concepts(ctx, session, todo);
        ++result.iterations_run;
        if (k + 1 == n_loops) break;

        const auto active = active_concept_ids(session);
        auto sel = loop_select_inputs(session.matrix, active, session.config.generic_fraction);
        EventLog flags;
        for (const auto& id : sel.generic_concept_ids) {
            auto c = *session.find_concept(id);
            if (c.generic) continue;
            c.generic = true;
            flags.push_back({event_kind::kConceptUpdated, {{"concept", to_json(c)}, {"reason", "generic"}}});
        }
        commit(session, ctx.clock, std::move(flags));
        commit(session, ctx.clock,
               Event{"loop_selection",
                     {{"iteration", iteration}, {"doc_ids", sel.doc_ids}, {"generic_concept_ids", sel.generic_concept_ids}}});
        if (sel.doc_ids.empty()) {
            commit(session, ctx.clock, Event{"loop_stopped", {{"iteration", iteration}, {"reason", "empty selection"}}});
            break;
        }
        inputs = std::move(sel.doc_ids);
        if (inputs.size() > session.config.sample_size) {
            std::vector<Document> pool;
            for (const auto& id : inputs) pool.push_back(*session.find_document(id));
            inputs = sample_documents(pool, session.config.sample_size, session.config.rng_seed + k + 1);
        }
    }
    return result;
}

} // namespace lloom
