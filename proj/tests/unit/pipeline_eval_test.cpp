#include <gtest/gtest.h>

#include <mutex>
#include <numeric>
#include <random>
#include <set>

#include "lloom/core/answer_scale.hpp"
#include "lloom/core/validate.hpp"
#include "lloom/error.hpp"
#include "lloom/eval/harness.hpp"
#include "lloom/eval/metrics.hpp"
#include "lloom/eval/synthetic.hpp"
#include "lloom/scoring/scoring.hpp"
#include "support.hpp"

using namespace lloom;
using namespace lloom::test_support;

namespace {

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

std::size_t count_kind(const EventLog& log, const std::string& kind) {
    return static_cast<std::size_t>(std::count_if(log.begin(), log.end(), [&](const Event& e) { return e.kind == kind; }));
}

std::size_t count_kind(const Session& s, const std::string& kind) {
    return static_cast<std::size_t>(
        std::count_if(s.trace.begin(), s.trace.end(), [&](const TraceEntry& e) { return e.kind == kind; }));
}

int topic_in(const std::string& text) {
    const auto p = text.find("topic ");
    return p == std::string::npos ? -1 : text[p + 6] - '0';
}

// A world where document i talks about topic i % 3. Bullets inherit the
// topic, embeddings are one-hot per topic, each cluster yields
// `patterns_per_cluster` concepts and a concept "Topic t" matches exactly the
// documents on topic t.
std::shared_ptr<FunctionBackend> topic_world(std::size_t patterns_per_cluster = 1) {
    return std::make_shared<FunctionBackend>(
        [=](const CompletionRequest& r) -> std::string {
            if (r.template_id == "summarize") {
                const auto t = std::to_string(topic_in(r.prompt));
                return json{{"bullets", {"topic " + t + " main point", "topic " + t + " side point"}}}.dump();
            }
            if (r.template_id == "synthesize") {
                const auto t = std::to_string(topic_in(r.prompt));
                const auto ids = example_ids_in(r.prompt);
                json patterns = json::array();
                for (std::size_t k = 0; k < patterns_per_cluster; ++k)
                    patterns.push_back({{"name", "Topic " + t + (k ? " v" + std::to_string(k) : "")},
                                        {"prompt", "Is it about topic " + t + "?"},
                                        {"example_ids", {ids.front()}}});
                return json{{"patterns", patterns}}.dump();
            }
            if (r.template_id == "score") {
                return score_reply(r, [&](const std::string& name, const std::string& doc_id) {
                    const auto i = std::stoi(doc_id.substr(1));
                    return std::to_string(i % 3) == name.substr(6, 1) ? "A" : "E";
                });
            }
            return "{}";
        },
        [](const std::string& text) {
            std::vector<double> v(3, 0.0);
            v[static_cast<std::size_t>(topic_in(text))] = 1.0;
            return v;
        });
}

Document long_doc(const std::string& id) {
    std::string text = "The council met on Tuesday. Rents keep going up and nobody is listening.";
    while (text.size() <= 400) text += " Filler sentence about the weather and the park.";
    return {id, text, {}};
}

} // namespace

TEST(Sampling, CapAndDeterminism) {
    std::vector<Document> docs;
    for (int i = 0; i < 500; ++i) docs.push_back({"d" + std::to_string(i), "t", {}});
    const auto a = sample_documents(docs, 200, 42);
    EXPECT_EQ(a.size(), 200u);
    EXPECT_EQ(std::set<std::string>(a.begin(), a.end()).size(), 200u);
    EXPECT_EQ(sample_documents(docs, 200, 42), a);
    EXPECT_NE(sample_documents(docs, 200, 43), a);
    const std::vector<Document> few(docs.begin(), docs.begin() + 50);
    EXPECT_EQ(sample_documents(few, 200, 1).size(), 50u);
}

TEST(Distill, FilterKeepsVerbatimQuotes) {
    Rig rig(std::make_shared<FunctionBackend>([](const CompletionRequest&) {
        return json{{"relevant_quotes", {"Rents keep going up", "The council met on Tuesday."}}}.dump();
    }));
    EventLog log;
    const auto q = distill_filter(rig.ctx, long_doc("x"), SessionConfig{}, log);
    ASSERT_EQ(q.size(), 2u);
    EXPECT_EQ(q[0].doc_id, "x");
    EXPECT_EQ(count_kind(log, "quote_dropped"), 0u);
}

TEST(Distill, FilterDropsFabricatedQuote) {
    Rig rig(std::make_shared<FunctionBackend>([](const CompletionRequest&) {
        return json{{"relevant_quotes", {"Rents keep going up", "Rents are falling fast"}}}.dump();
    }));
    EventLog log;
    const auto q = distill_filter(rig.ctx, long_doc("x"), SessionConfig{}, log);
    ASSERT_EQ(q.size(), 1u);
    EXPECT_EQ(count_kind(log, "quote_dropped"), 1u);
}

TEST(Distill, ShortDocSkipsFilter) {
    auto b = std::make_shared<FunctionBackend>([](const CompletionRequest&) { return std::string("{}"); });
    Rig rig(b);
    EventLog log;
    EXPECT_TRUE(distill_filter(rig.ctx, {"s", "Short text.", {}}, SessionConfig{}, log).empty());
    EXPECT_EQ(count_kind(log, "filter_skipped"), 1u);
    EXPECT_EQ(b->calls.load(), 0u);
}

TEST(Distill, SummarizeBullets) {
    Rig rig(std::make_shared<FunctionBackend>(
        [](const CompletionRequest&) { return json{{"bullets", {"one", "", "two", "three"}}}.dump(); }));
    EventLog log;
    const auto b = distill_summarize(rig.ctx, "d9", "text", SessionConfig{}, 1, log);
    ASSERT_EQ(b.size(), 3u);
    EXPECT_EQ(b[0].id, "i1-d9-1");
    EXPECT_EQ(b[2].text, "three");
    for (const auto& x : b) EXPECT_EQ(x.doc_id, "d9");
    EXPECT_EQ(count_kind(log, "bullet_dropped"), 1u);
}

TEST(Distill, MalformedSummaryMarksDocFailed) {
    Rig rig(std::make_shared<FunctionBackend>([](const CompletionRequest& r) -> std::string {
        if (r.prompt.find("document number 1 ") != std::string::npos) return "not json";
        return json{{"bullets", {"fine"}}}.dump();
    }, [](const std::string&) { return std::vector<double>{1, 0}; }));
    auto s = small_session(3);
    EventLog log;
    EXPECT_THROW(distill_summarize(rig.ctx, "d1", "document number 1 talks", s.config, 0, log), ParseError);
    const std::vector<std::string> inputs{"d0", "d1", "d2"};
    const auto r = run_generation(rig.ctx, s, inputs, 0);
    EXPECT_EQ(r.trace.failed_doc_ids, (std::vector<std::string>{"d1"}));
    EXPECT_EQ(count_kind(s, "distill_failed"), 1u);
}

TEST(Synthesize, PatternsAndForeignIds) {
    const std::vector<Bullet> members{{"i0-a-1", "a", "x", 0}, {"i0-b-1", "b", "y", 0}};
    Rig rig(std::make_shared<FunctionBackend>([](const CompletionRequest&) {
        return json{{"patterns",
                     {{{"name", "First"}, {"prompt", "Q1?"}, {"example_ids", {"i0-a-1", "i0-zz-1"}}},
                      {{"name", "Second"}, {"prompt", "Q2?"}, {"example_ids", {"i0-b-1"}}}}}}
            .dump();
    }));
    EventLog log;
    const auto c = synthesize_cluster(rig.ctx, 3, members, 2, SessionConfig{}, 0, log);
    ASSERT_EQ(c.size(), 2u);
    EXPECT_EQ(c[0].id, "g0-k3-1");
    EXPECT_EQ(c[0].representative_example_ids, (std::vector<std::string>{"i0-a-1"}));
    EXPECT_EQ(c[0].representative_doc_ids, (std::vector<std::string>{"a"}));
    EXPECT_EQ(c[1].source_cluster, 3);
    EXPECT_EQ(count_kind(log, "example_id_dropped"), 1u);
}

TEST(Synthesize, EmptyPatternsIsBarren) {
    const std::vector<Bullet> members{{"i0-a-1", "a", "x", 0}};
    Rig rig(std::make_shared<FunctionBackend>([](const CompletionRequest&) { return std::string(R"({"patterns": []})"); }));
    EventLog log;
    EXPECT_TRUE(synthesize_cluster(rig.ctx, 0, members, 2, SessionConfig{}, 0, log).empty());
    EXPECT_EQ(count_kind(log, "barren_cluster"), 1u);
}

TEST(Synthesize, ConceptsPerCluster) {
    EXPECT_EQ(concepts_per_cluster(20, 3), 5u);
    EXPECT_EQ(concepts_per_cluster(20, 10), 2u);
    EXPECT_EQ(concepts_per_cluster(2, 5), 1u);
    EXPECT_EQ(concepts_per_cluster(100, 1), 5u);
}

TEST(Generation, TopicWorld) {
    Rig rig(topic_world());
    auto s = small_session(30);
    std::vector<std::string> inputs;
    for (const auto& d : s.documents) inputs.push_back(d.id);
    inputs.push_back("d0");
    const auto r = run_generation(rig.ctx, s, inputs, 0);
    EXPECT_EQ(r.trace.input_doc_ids.size(), 30u);
    ASSERT_EQ(r.concepts.size(), 3u);
    const auto& run = s.clusterings.back();
    for (const auto& c : r.concepts) {
        ASSERT_TRUE(c.source_cluster.has_value());
        for (const auto& bid : c.representative_example_ids) {
            const auto a = std::find_if(run.assignments.begin(), run.assignments.end(),
                                        [&](const ClusterAssignment& x) { return x.bullet_id == bid; });
            ASSERT_NE(a, run.assignments.end());
            EXPECT_EQ(a->cluster_id, *c.source_cluster);
        }
    }
    for (const auto& a : run.assignments)
        if (a.cluster_id == kNoise) {
            const auto used = std::any_of(r.concepts.begin(), r.concepts.end(), [&](const Concept& c) {
                return std::count(c.representative_example_ids.begin(), c.representative_example_ids.end(),
                                  a.bullet_id) > 0;
            });
            EXPECT_FALSE(used);
        }
    EXPECT_EQ(s.bullets.size(), 60u);
    EXPECT_TRUE(validate_session(s).empty());
}

TEST(Generation, AllNoiseGivesNoClusters) {
    Rig rig(topic_world());
    auto s = small_session(6);
    s.config.min_cluster_size = 50;
    std::vector<std::string> inputs{"d0", "d1", "d2", "d3", "d4", "d5"};
    const auto r = run_generation(rig.ctx, s, inputs, 0);
    EXPECT_TRUE(r.trace.no_clusters);
    EXPECT_TRUE(r.concepts.empty());
    EXPECT_EQ(count_kind(s, "no_clusters"), 1u);
}

TEST(Generation, CapKeepsMaxConcepts) {
    Rig rig(topic_world(2));
    auto s = small_session(30);
    s.config.max_concepts = 2;
    s.config.n_concepts_per_cluster = 2;
    std::vector<std::string> inputs;
    for (const auto& d : s.documents) inputs.push_back(d.id);
    const auto r = run_generation(rig.ctx, s, inputs, 0);
    EXPECT_EQ(r.concepts.size(), 2u);
    EXPECT_EQ(r.trace.capped_concept_ids.size(), 4u);
    EXPECT_EQ(count_kind(s, "concepts_capped"), 1u);
}

TEST(Generation, EveryDocFailingIsPipelineError) {
    Rig rig(std::make_shared<FunctionBackend>([](const CompletionRequest&) { return std::string("garbage"); }));
    auto s = small_session(4);
    std::vector<std::string> inputs{"d0", "d1", "d2", "d3"};
    EXPECT_THROW(run_generation(rig.ctx, s, inputs, 0), PipelineError);
}

namespace {

ScoreMatrix label_matrix(const std::vector<std::vector<bool>>& cols) {
    ScoreMatrix m;
    for (std::size_t d = 0; d < cols.front().size(); ++d) m.doc_ids.push_back(std::to_string(d + 1));
    for (std::size_t c = 0; c < cols.size(); ++c) {
        std::vector<ScoreEntry> col;
        for (std::size_t d = 0; d < cols[c].size(); ++d) {
            const auto a = cols[c][d] ? Answer::A : Answer::E;
            col.push_back({m.doc_ids[d], "c" + std::to_string(c), a, answer_to_score(a), "", cols[c][d], std::nullopt});
        }
        m.set_column("c" + std::to_string(c), col);
    }
    return m;
}

} // namespace

TEST(Loop, GenericOnlyCoverageIsSelected) {
    const auto m = label_matrix({{true, true, true, true}, {true, false, false, false}});
    const std::vector<std::string> ids{"c0", "c1"};
    const auto sel = loop_select_inputs(m, ids, 0.5);
    EXPECT_EQ(sel.doc_ids, (std::vector<std::string>{"2", "3", "4"}));
    EXPECT_EQ(sel.generic_concept_ids, (std::vector<std::string>{"c0"}));
}

TEST(Loop, UnmatchedDocSelected) {
    const auto m = label_matrix({{true, false, false, false}, {false, true, false, true}});
    const std::vector<std::string> ids{"c0", "c1"};
    EXPECT_EQ(loop_select_inputs(m, ids, 0.6).doc_ids, (std::vector<std::string>{"3"}));
}

TEST(Loop, FixedPoint) {
    const auto m = label_matrix({{true, false, true}, {false, true, false}});
    const std::vector<std::string> ids{"c0", "c1"};
    EXPECT_TRUE(loop_select_inputs(m, ids, 0.9).doc_ids.empty());
}

TEST(Loop, AllPositiveConceptIsGeneric) {
    Rig rig(topic_world());
    auto s = small_session(12);
    Concept all{"u1", "Everything", "Is it text?", {}, {}, {}, 0, ConceptOrigin::UserAuthored};
    commit(s, fixed_clock(), Event{event_kind::kConceptAdded, {{"concept", to_json(all)}}});
    auto b = std::make_shared<FunctionBackend>(
        [](const CompletionRequest& r) { return score_reply(r, [](auto&, auto&) { return "A"; }); });
    Rig scorer(b);
    const std::vector<std::string> ids{"u1"};
    score_concepts(scorer.ctx, s, ids);
    const auto sel = loop_select_inputs(s.matrix, ids, s.config.generic_fraction);
    EXPECT_EQ(sel.generic_concept_ids, ids);
    EXPECT_EQ(sel.doc_ids.size(), 12u);
}

TEST(Iterations, GoldenRunHasBothGenerations) {
    const auto s = run_fixture();
    std::set<int> gens;
    for (const auto& c : s.concepts) gens.insert(c.generation);
    EXPECT_EQ(gens, (std::set<int>{0, 1}));
    EXPECT_EQ(save_session(s), read_text(data_path("fixture12_golden.json")));
    for (const auto& id : active_concept_ids(s)) EXPECT_NE(s.matrix.column(id), nullptr);
}

TEST(Iterations, NoDuplicateDocumentPerIteration) {
    const auto s = run_fixture();
    for (const auto& e : s.trace)
        if (e.kind == "generation_started") {
            const auto ids = e.data["doc_ids"].get<std::vector<std::string>>();
            EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), ids.size());
        }
}

TEST(Iterations, EmptySelectionStops) {
    Rig rig(topic_world());
    auto s = small_session(30);
    const auto r = run_iterations(rig.ctx, s, 3);
    EXPECT_EQ(r.iterations_run, 1u);
    EXPECT_EQ(count_kind(s, "loop_stopped"), 1u);
    EXPECT_EQ(outlier_fraction(s), 0.0);
}

TEST(Iterations, SingleLoopIsGenerationPlusScoring) {
    Rig a(topic_world()), b(topic_world());
    auto s1 = small_session(30), s2 = small_session(30);
    run_iterations(a.ctx, s1, 1);
    const auto inputs = sample_documents(s2.documents, s2.config.sample_size, s2.config.rng_seed);
    commit(s2, fixed_clock(), Event{"documents_sampled", {{"rng_seed", s2.config.rng_seed}, {"doc_ids", inputs}}});
    run_generation(b.ctx, s2, inputs, 0);
    score_concepts(b.ctx, s2, unscored_concepts(s2));
    EXPECT_EQ(s1, s2);
}

namespace {

Concept plain_concept(const std::string& id, const std::string& name) {
    Concept c;
    c.id = id;
    c.name = name;
    c.criteria_prompt = "Does it match " + name + "?";
    c.origin = ConceptOrigin::UserAuthored;
    return c;
}

} // namespace

TEST(Scoring, AnswersMapToScores) {
    auto s = small_session(5);
    const std::map<std::string, std::string> answers{{"d0", "A"}, {"d1", "B"}, {"d2", "C"}, {"d3", "D"}, {"d4", "E"}};
    Rig rig(std::make_shared<FunctionBackend>(
        [&](const CompletionRequest& r) { return score_reply(r, [&](auto&, auto& id) { return answers.at(id); }); }));
    EventLog log;
    const auto col = score_concept(rig.ctx, plain_concept("u1", "X"), s.documents, 5, 1.0, log);
    std::vector<double> scores;
    for (const auto& e : col) scores.push_back(e.score);
    EXPECT_EQ(scores, (std::vector<double>{1.0, 0.75, 0.5, 0.25, 0.0}));
    EXPECT_TRUE(col[0].label);
    EXPECT_FALSE(col[1].label);
}

TEST(Scoring, OmittedDocRetriedSingly) {
    auto s = small_session(5);
    std::mutex mu;
    std::vector<std::size_t> batch_sizes;
    Rig rig(std::make_shared<FunctionBackend>([&](const CompletionRequest& r) {
        const auto ids = example_ids_in(r.prompt);
        {
            std::lock_guard lock(mu);
            batch_sizes.push_back(ids.size());
        }
        json results = json::array();
        for (const auto& id : ids)
            if (id != "d3" || ids.size() == 1) results.push_back({{"example_id", id}, {"rationale", ""}, {"answer", "A"}});
        return json{{"pattern_results", results}}.dump();
    }));
    EventLog log;
    const auto col = score_concept(rig.ctx, plain_concept("u1", "X"), s.documents, 5, 1.0, log);
    EXPECT_EQ(batch_sizes, (std::vector<std::size_t>{5, 1}));
    EXPECT_EQ(col[3].answer, Answer::A);
    EXPECT_EQ(count_kind(log, "score_retry"), 1u);
}

TEST(Scoring, InvalidLetterFallsBackToC) {
    auto s = small_session(3);
    Rig rig(std::make_shared<FunctionBackend>([](const CompletionRequest& r) {
        return score_reply(r, [](auto&, auto& id) { return id == "d1" ? "F" : "B"; });
    }));
    EventLog log;
    const auto col = score_concept(rig.ctx, plain_concept("u1", "X"), s.documents, 5, 1.0, log);
    EXPECT_EQ(col[1].answer, Answer::C);
    EXPECT_EQ(col[1].score, 0.5);
    EXPECT_EQ(col[0].answer, Answer::B);
    EXPECT_GE(count_kind(log, "score_invalid_answer"), 1u);
    EXPECT_EQ(count_kind(log, "score_fallback"), 1u);
}

TEST(Scoring, GatewayFailureBecomesErrorEntries) {
    auto s = small_session(4);
    auto b = std::make_shared<ScriptedBackend>();
    Rig rig(b);
    EventLog log;
    const auto col = score_concept(rig.ctx, plain_concept("u1", "X"), s.documents, 2, 1.0, log);
    ASSERT_EQ(col.size(), 4u);
    for (const auto& e : col) {
        EXPECT_TRUE(e.error.has_value());
        EXPECT_FALSE(e.label);
    }
}

TEST(Scoring, RescoreIsolatesColumn) {
    auto s = run_fixture();
    const auto before = s.matrix;
    const auto target = s.matrix.concept_ids.front();
    Rig same(fixture_backend());
    EXPECT_EQ(rescore_concept(same.ctx, s, target), *before.column(target));
    for (const auto& id : before.concept_ids) EXPECT_EQ(*s.matrix.column(id), *before.column(id));

    Rig flip(std::make_shared<FunctionBackend>(
        [](const CompletionRequest& r) { return score_reply(r, [](auto&, auto&) { return "D"; }); }));
    const auto col = rescore_concept(flip.ctx, s, target);
    for (const auto& e : col) EXPECT_EQ(e.answer, Answer::D);
    for (const auto& id : before.concept_ids)
        if (id != target) EXPECT_EQ(*s.matrix.column(id), *before.column(id));
    EXPECT_GE(count_kind(s, "column_archived"), 2u);
    EXPECT_THROW(rescore_concept(flip.ctx, s, "nope"), NotFoundError);
}

TEST(Prevalence, Examples) {
    std::vector<bool> labels(40, false);
    for (int i = 0; i < 10; ++i) labels[static_cast<std::size_t>(i * 4)] = true;
    const auto m = label_matrix({labels});
    std::vector<std::string> slice20;
    for (int i = 1; i <= 20; ++i) slice20.push_back(std::to_string(i));
    const auto a = prevalence(m, "c0", "first", slice20, Normalization::BySlice);
    EXPECT_EQ(a.count, 5u);
    EXPECT_DOUBLE_EQ(a.prevalence, 0.25);
    std::vector<std::string> four{"1", "5", "9", "13", "2"};
    const auto b = prevalence(m, "c0", "few", four, Normalization::ByConcept);
    EXPECT_DOUBLE_EQ(b.prevalence, 0.4);
    const auto e = prevalence(m, "c0", "none", std::vector<std::string>{}, Normalization::BySlice);
    EXPECT_EQ(e.prevalence, 0.0);
    EXPECT_TRUE(e.empty_denominator);
}

TEST(Prevalence, SliceWeightedSumEqualsGlobal) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<bool> labels(30);
        for (auto&& l : labels) l = rng() % 3 == 0;
        const auto m = label_matrix({labels});
        std::vector<std::string> a, b;
        for (const auto& id : m.doc_ids) (rng() % 2 ? a : b).push_back(id);
        const auto pa = prevalence(m, "c0", "a", a, Normalization::BySlice);
        const auto pb = prevalence(m, "c0", "b", b, Normalization::BySlice);
        const auto all = prevalence(m, "c0", "All", m.doc_ids, Normalization::BySlice);
        EXPECT_NEAR(pa.prevalence * static_cast<double>(a.size()) + pb.prevalence * static_cast<double>(b.size()),
                    all.prevalence * 30.0, 1e-9);
    }
}

TEST(Outliers, Fractions) {
    std::vector<bool> x(200, true), y(200, false);
    for (int i = 0; i < 19; ++i) x[static_cast<std::size_t>(i * 10)] = false;
    const auto m = label_matrix({x, y});
    const std::vector<std::string> ids{"c0", "c1"};
    EXPECT_DOUBLE_EQ(outlier_fraction(m, ids), 0.095);
    const auto full = label_matrix({std::vector<bool>(10, true)});
    EXPECT_EQ(outlier_fraction(full, std::vector<std::string>{"c0"}), 0.0);
    EXPECT_EQ(outlier_fraction(full, std::vector<std::string>{}), 1.0);
}

TEST(Export, MatrixCsvShape) {
    const auto s = run_fixture();
    const auto csv = matrix_csv(s);
    std::size_t lines = 0;
    for (const char c : csv) lines += c == '\n';
    EXPECT_EQ(lines, s.documents.size() + 1);
    const auto header = csv.substr(0, csv.find('\n'));
    EXPECT_EQ(static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')),
              2 * active_concept_ids(s).size());
}

TEST(Synthetic, SentenceSplitter) {
    EXPECT_EQ(split_sentences("Dr. Smith arrived. It rained! Why? e.g. this stays.").size(), 4u);
    EXPECT_EQ(split_sentences("No terminal punctuation").size(), 1u);
}

TEST(Synthetic, Verification) {
    const SyntheticSpec spec{5, 0.2, "Rising rent", 1};
    const std::string p = "One here. Two here. Rent went up again. Four here. Five here.";
    EXPECT_TRUE(verify_synthetic({p, {"Rent went up again."}}, spec).pass);
    const SyntheticSpec two{5, 0.4, "Rising rent", 1};
    const auto v = verify_synthetic({p, {"One here.", "Two here.", "Four here."}}, two);
    EXPECT_FALSE(v.pass);
    EXPECT_EQ(v.reasons, (std::vector<std::string>{"seed-count"}));
    const auto w = verify_synthetic({p, {"Rent went up again!"}}, spec);
    EXPECT_EQ(w.reasons, (std::vector<std::string>{"seed-not-verbatim"}));
    EXPECT_THROW(validate(SyntheticSpec{7, 0.2, "x", 1}), ValidationError);
    EXPECT_EQ(seed_sentence_count(SyntheticSpec{10, 0.4, "x", 1}), 4u);
}

TEST(Synthetic, GenerationRetriesUntilValid) {
    std::vector<std::string> replies{
        json{{"paragraph", "A. B. C. D. E. F."}, {"seed_topic_sentences", {"A."}}}.dump(),
        json{{"paragraph", "A one. B two. C three. D four. E five."}, {"seed_topic_sentences", {"Z zero."}}}.dump(),
        json{{"paragraph", "A one. B two. C three. D four. E five."}, {"seed_topic_sentences", {"C three."}}}.dump()};
    std::atomic<std::size_t> next{0};
    Rig rig(std::make_shared<FunctionBackend>([&](const CompletionRequest&) { return replies.at(next++); }));
    EventLog log;
    const auto g = generate_synthetic_doc(rig.ctx, SyntheticSpec{5, 0.2, "Rent", 1}, 5, 0.0, log);
    EXPECT_EQ(g.attempts, 3u);
    EXPECT_EQ(g.doc.seed_sentences, (std::vector<std::string>{"C three."}));
    next = 0;
    EventLog log2;
    EXPECT_THROW(generate_synthetic_doc(rig.ctx, SyntheticSpec{5, 0.2, "Rent", 1}, 2, 0.0, log2), PipelineError);
}

TEST(Hierarchy, FileMatchesBuiltIn) {
    const auto& h = concept_hierarchy();
    EXPECT_EQ(h.size(), 10u);
    for (const auto& g : h) EXPECT_EQ(g.specifics.size(), 4u);
    const auto file = read_json(std::filesystem::path(LLOOM_TEST_DATA) / ".." / ".." / "data" / "concept_hierarchy.json");
    EXPECT_EQ(to_json(concept_hierarchy_from_json(file)), to_json(h));
    EXPECT_EQ(generic_of(h, h[3].specifics[2]), h[3].name);
    EXPECT_EQ(generic_of(h, "nothing"), "");
    auto dup = to_json(h);
    dup[1]["specific"][0] = dup[0]["specific"][0];
    EXPECT_THROW(concept_hierarchy_from_json(dup), ValidationError);
}

namespace {

std::shared_ptr<FunctionBackend> matcher(std::vector<std::pair<int, std::string>> matches) {
    return std::make_shared<FunctionBackend>([matches](const CompletionRequest&) {
        json out = json::array();
        for (const auto& [g, item] : matches) out.push_back({{"concept_id", g}, {"item_id", item}, {"rationale", "r"}});
        return json{{"concept_matches", out}}.dump();
    });
}

const std::vector<std::string> kGroundTruth{"Rent", "Crime", "Schools", "Parks"};
const std::vector<std::string> kGenerated{"Housing Costs", "Public Safety", "Education", "Weather"};

} // namespace

TEST(Coverage, ThreeOfFour) {
    Rig rig(matcher({{1, "1"}, {2, "2"}, {3, "3"}, {4, "NONE"}}));
    EventLog log;
    const auto r = auto_coverage(rig.ctx, kGroundTruth, kGenerated, log);
    EXPECT_DOUBLE_EQ(r.coverage, 0.75);
    EXPECT_FALSE(r.matches[3].generated.has_value());
    EXPECT_EQ(r.matches[2].generated, 2u);
}

TEST(Coverage, ItemClaimedTwiceCountsOnce) {
    Rig rig(matcher({{1, "1"}, {2, "1"}}));
    EventLog log;
    const auto r = auto_coverage(rig.ctx, kGroundTruth, kGenerated, log);
    EXPECT_DOUBLE_EQ(r.coverage, 0.25);
    EXPECT_EQ(r.warnings.size(), 1u);
}

TEST(Coverage, ZeroMatches) {
    Rig rig(matcher({}));
    EventLog log;
    EXPECT_EQ(auto_coverage(rig.ctx, kGroundTruth, kGenerated, log).coverage, 0.0);
}

TEST(Coverage, ParseFailureRetriedOnce) {
    auto b = std::make_shared<FunctionBackend>([](const CompletionRequest&) { return std::string("nope"); });
    Rig rig(b);
    EventLog log;
    EXPECT_THROW(auto_coverage(rig.ctx, kGroundTruth, kGenerated, log), ParseError);
    EXPECT_EQ(b->calls.load(), 2u);
}

TEST(Coverage, MonotoneInGeneratedList) {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<std::string> gt, gen;
        for (int i = 0; i < 6; ++i) gt.push_back("gt" + std::to_string(i));
        for (int i = 0; i < 8; ++i) gen.push_back("c" + std::to_string(rng() % 10));
        // Matches GT i to the first generated entry spelled "c<i>".
        auto oracle = std::make_shared<FunctionBackend>([](const CompletionRequest& r) {
            const auto from = r.prompt.rfind("[{\"item_id\"");
            const auto gen_json = json::parse(r.prompt.substr(from, r.prompt.find(']', from) - from + 1));
            json out = json::array();
            for (int g = 0; g < 6; ++g) {
                std::string item = "NONE";
                for (const auto& it : gen_json)
                    if (it["text"] == "c" + std::to_string(g)) {
                        item = it["item_id"];
                        break;
                    }
                out.push_back({{"concept_id", g + 1}, {"item_id", item}, {"rationale", ""}});
            }
            return json{{"concept_matches", out}}.dump();
        });
        Rig rig(oracle);
        double prev = 0;
        for (std::size_t n = 1; n <= gen.size(); ++n) {
            EventLog log;
            const std::vector<std::string> prefix(gen.begin(), gen.begin() + static_cast<std::ptrdiff_t>(n));
            const auto c = auto_coverage(rig.ctx, gt, prefix, log).coverage;
            EXPECT_GE(c, 0.0);
            EXPECT_LE(c, 1.0);
            EXPECT_GE(c, prev);
            prev = c;
        }
    }
}

TEST(Trials, MeanAndFailures) {
    TrialInput in{"lloom", "toy", kGroundTruth, {}};
    for (int t = 0; t < 10; ++t) in.trials.push_back({{kGenerated.begin(), kGenerated.begin() + 1 + t % 4}, std::nullopt});
    // Matches the first k GT concepts when k generated concepts are offered.
    Rig rig(std::make_shared<FunctionBackend>([](const CompletionRequest& r) {
        const auto k = std::count_if(kGenerated.begin(), kGenerated.end(),
                                     [&](const std::string& g) { return contains(r.prompt, g); });
        json out = json::array();
        for (long g = 0; g < k; ++g) out.push_back({{"concept_id", g + 1}, {"item_id", g + 1}, {"rationale", ""}});
        return json{{"concept_matches", out}}.dump();
    }));
    EventLog log;
    const auto rep = run_trials(rig.ctx, in, 10, log);
    double hand = 0;
    for (int t = 0; t < 10; ++t) hand += (1 + t % 4) / 4.0;
    EXPECT_NEAR(*rep.mean, hand / 10, 1e-12);
    EXPECT_EQ(rep.n_ok, 10u);
    EXPECT_TRUE(rep.sd.has_value());

    in.trials[4].error = "timeout";
    const auto failed = run_trials(rig.ctx, in, 10, log);
    EXPECT_EQ(failed.n_ok, 9u);
    EXPECT_EQ(failed.trials[4].error, "timeout");
    EXPECT_TRUE(contains(failed.note, "aggregated over 9"));

    const auto one = run_trials(rig.ctx, in, 1, log);
    EXPECT_DOUBLE_EQ(*one.mean, 0.25);
    EXPECT_FALSE(one.sd.has_value());
    EXPECT_TRUE(contains(one.note, "sd undefined"));
    const std::vector<TrialReport> reps{one};
    EXPECT_TRUE(contains(trials_csv(reps), "lloom,toy,mean,0.25"));
}

TEST(Metrics, Classification) {
    std::vector<bool> g{true, false, true, true, false, false, true, false, true, false};
    const auto same = classification_metrics(g, g);
    EXPECT_EQ(same.accuracy, 1.0);
    EXPECT_EQ(same.f1, 1.0);

    std::vector<bool> pred, gold;
    auto add = [&](bool p, bool t, int n) {
        for (int i = 0; i < n; ++i) {
            pred.push_back(p);
            gold.push_back(t);
        }
    };
    add(true, true, 3);
    add(true, false, 1);
    add(false, true, 2);
    add(false, false, 4);
    const auto m = classification_metrics(pred, gold);
    EXPECT_DOUBLE_EQ(m.precision, 0.75);
    EXPECT_DOUBLE_EQ(m.recall, 0.6);
    EXPECT_NEAR(m.f1, 2.0 / 3.0, 1e-12);

    const auto none = classification_metrics(std::vector<bool>(10, false), g);
    EXPECT_EQ(none.precision, 0.0);
    EXPECT_TRUE(none.precision_undefined);
    EXPECT_THROW(classification_metrics({true}, {true, false}), ValidationError);
}

TEST(Metrics, Kappa) {
    std::vector<bool> a{true, true, false, false, true}, b;
    EXPECT_EQ(cohens_kappa(a, a).kappa, 1.0);
    std::vector<bool> x, y;
    auto add = [&](bool p, bool q, int n) {
        for (int i = 0; i < n; ++i) {
            x.push_back(p);
            y.push_back(q);
        }
    };
    add(true, true, 20);
    add(true, false, 5);
    add(false, true, 5);
    add(false, false, 20);
    EXPECT_NEAR(cohens_kappa(x, y).kappa, 0.6, 1e-12);
    const auto c = cohens_kappa(std::vector<bool>(5, true), a);
    EXPECT_LE(c.kappa, 0.0);
    EXPECT_TRUE(c.constant_rater);
    EXPECT_THROW(cohens_kappa(a, {true}), ValidationError);

    std::mt19937_64 rng(2);
    for (int t = 0; t < 100; ++t) {
        std::vector<bool> p(20), q(20);
        for (std::size_t i = 0; i < 20; ++i) {
            p[i] = rng() % 2;
            q[i] = rng() % 2;
        }
        EXPECT_DOUBLE_EQ(cohens_kappa(p, q).kappa, cohens_kappa(q, p).kappa);
    }
}

TEST(Metrics, MeanAbsoluteError) {
    EXPECT_DOUBLE_EQ(mean_absolute_error({1, 2, 3}, {1, 3, 5}), 1.0);
    EXPECT_THROW(mean_absolute_error({1}, {}), ValidationError);
}
