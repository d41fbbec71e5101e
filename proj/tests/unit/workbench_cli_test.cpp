#include <gtest/gtest.h>

#include <future>

#include <httplib.h>

#include "cli.hpp"
#include "lloom/core/slice_predicate.hpp"
#include "lloom/error.hpp"
#include "lloom/scoring/scoring.hpp"
#include "lloom/workbench/actions.hpp"
#include "lloom/workbench/http_api.hpp"
#include "lloom/workbench/service.hpp"
#include "lloom/workbench/views.hpp"
#include "support.hpp"

using namespace lloom;
using namespace lloom::test_support;

namespace {

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

std::size_t count_kind(const Session& s, const std::string& kind) {
    return static_cast<std::size_t>(
        std::count_if(s.trace.begin(), s.trace.end(), [&](const TraceEntry& e) { return e.kind == kind; }));
}

// Scores by criteria wording: "even" matches even-numbered documents, "strict"
// matches nothing, anything else matches everything. Merge and split replies
// are canned; `split_parts` sets how many subconcepts a split returns.
std::shared_ptr<FunctionBackend> analyst_backend(std::size_t split_parts = 2) {
    return std::make_shared<FunctionBackend>([split_parts](const CompletionRequest& r) -> std::string {
        if (r.template_id == "score") {
            const bool even = contains(r.prompt, "even"), strict = contains(r.prompt, "strict");
            return score_reply(r, [&](auto&, const std::string& doc) {
                if (strict) return "E";
                if (even) return (doc.back() - '0') % 2 == 0 ? "A" : "E";
                return "A";
            });
        }
        if (r.template_id == "merge")
            return R"({"patterns": [{"name": "Combined", "prompt": "Does it mention even things?"}]})";
        if (r.template_id == "split") {
            json patterns = json::array();
            for (std::size_t i = 0; i < split_parts; ++i)
                patterns.push_back({{"name", "Part " + std::to_string(i + 1)}, {"prompt", "Is it even part?"}});
            return json{{"patterns", patterns}}.dump();
        }
        throw ScriptError("unexpected template " + r.template_id);
    });
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

} // namespace

TEST(Actions, AddConceptIsScored) {
    Rig rig(analyst_backend());
    auto s = small_session(10);
    const auto id = add_concept(rig.ctx, s, "Social Distrust",
                                "Does this example display distrust of other people or society?");
    EXPECT_EQ(id, "u1");
    ASSERT_NE(s.matrix.column(id), nullptr);
    EXPECT_EQ(s.matrix.column(id)->size(), 10u);
    EXPECT_EQ(s.find_concept(id)->origin, ConceptOrigin::UserAuthored);

    const auto dup = add_concept(rig.ctx, s, "Social Distrust", "Another question?");
    EXPECT_EQ(dup, "u2");
    EXPECT_EQ(count_kind(s, "duplicate_name"), 1u);

    Rig again(analyst_backend());
    auto t = small_session(10);
    add_concept(again.ctx, t, "Social Distrust", "Does this example display distrust of other people or society?");
    EXPECT_EQ(*t.matrix.column("u1"), *s.matrix.column("u1"));
}

TEST(Actions, EmptyCriteriaLeavesSessionUntouched) {
    Rig rig(analyst_backend());
    auto s = small_session(4);
    const auto before = s;
    EXPECT_THROW(add_concept(rig.ctx, s, "Name", "  "), ValidationError);
    EXPECT_THROW(add_concept(rig.ctx, s, "", "Why?"), ValidationError);
    EXPECT_EQ(s, before);
}

TEST(Actions, EditConcept) {
    Rig rig(analyst_backend());
    auto s = small_session(6);
    const auto id = add_concept(rig.ctx, s, "Evens", "Is the number even?");
    const auto col = *s.matrix.column(id);

    edit_concept(rig.ctx, s, id, std::string("Renamed"), std::nullopt);
    EXPECT_EQ(s.find_concept(id)->name, "Renamed");
    EXPECT_EQ(*s.matrix.column(id), col);
    EXPECT_EQ(count_kind(s, "column_archived"), 0u);

    edit_concept(rig.ctx, s, id, std::nullopt, std::string("Is it strict?"));
    EXPECT_NE(*s.matrix.column(id), col);
    EXPECT_GE(count_kind(s, "concept_archived"), 1u);
    EXPECT_EQ(count_kind(s, "column_archived"), 1u);
    EXPECT_THROW(edit_concept(rig.ctx, s, "nope", std::string("x"), std::nullopt), NotFoundError);
}

TEST(Actions, MergeAndInactiveConcepts) {
    Rig rig(analyst_backend());
    auto s = small_session(6);
    const auto a = add_concept(rig.ctx, s, "A", "Is it even?");
    const auto b = add_concept(rig.ctx, s, "B", "Is it anything?");
    const std::vector<std::string> ids{a, b};
    const auto m = merge_concepts(rig.ctx, s, ids);
    EXPECT_EQ(m.origin, ConceptOrigin::Merged);
    EXPECT_EQ(m.subconcept_ids, ids);
    EXPECT_FALSE(s.find_concept(a)->active);
    EXPECT_FALSE(s.find_concept(b)->active);
    ASSERT_NE(s.matrix.column(m.id), nullptr);

    const auto view = matrix_view(s, Normalization::BySlice);
    ASSERT_EQ(view["concepts"].size(), 1u);
    EXPECT_EQ(view["concepts"][0]["id"], m.id);
    EXPECT_EQ(concept_detail(s, a)["id"], a);
    EXPECT_EQ(concept_detail(s, m.id)["subconcepts"].size(), 2u);

    try {
        edit_concept(rig.ctx, s, a, std::string("x"), std::nullopt);
        FAIL() << "expected PreconditionError";
    } catch (const PreconditionError& e) {
        EXPECT_TRUE(contains(e.what(), "concept inactive"));
    }
    const std::vector<std::string> one{m.id};
    EXPECT_THROW(merge_concepts(rig.ctx, s, one), PreconditionError);
}

TEST(Actions, Split) {
    Rig rig(analyst_backend());
    auto s = small_session(6);
    const auto id = add_concept(rig.ctx, s, "Everything", "Is it text?");
    const auto subs = split_concept(rig.ctx, s, id);
    ASSERT_EQ(subs.size(), 2u);
    for (const auto& c : subs) {
        EXPECT_EQ(c.origin, ConceptOrigin::Split);
        EXPECT_NE(s.matrix.column(c.id), nullptr);
    }
    EXPECT_FALSE(s.find_concept(id)->active);
    EXPECT_THROW(split_concept(rig.ctx, s, "nope"), NotFoundError);

    Rig thin(analyst_backend(1));
    auto t = small_session(6);
    const auto tid = add_concept(thin.ctx, t, "Everything", "Is it text?");
    const auto before = t;
    EXPECT_THROW(split_concept(thin.ctx, t, tid), PipelineError);
    EXPECT_EQ(t, before);
}

TEST(Actions, Slices) {
    auto s = small_session(10);
    EXPECT_THROW(define_slice(fixed_clock(), s, "All", "score > 0"), ValidationError);
    define_slice(fixed_clock(), s, "low", "score < 0.5");
    define_slice(fixed_clock(), s, "low", "score < 0.3");
    ASSERT_EQ(s.slices.size(), 1u);
    EXPECT_EQ(s.slices[0].predicate, "score < 0.3");
    EXPECT_THROW(define_slice(fixed_clock(), s, "bad", "scor < 1"), ValidationError);
    EXPECT_EQ(next_concept_id(s, "u"), "u1");
}

TEST(Views, MatrixHasCellPerConceptAndColumn) {
    auto s = run_fixture();
    define_slice(fixed_clock(), s, "older", "age >= 40");
    const auto v = matrix_view(s, Normalization::ByConcept);
    const auto rows = active_concept_ids(s).size();
    EXPECT_EQ(v["concepts"].size(), rows);
    ASSERT_EQ(v["slices"].size(), 2u);
    EXPECT_EQ(v["slices"][0]["name"], "All");
    EXPECT_EQ(v["cells"].size(), rows * 2);
    EXPECT_EQ(v["normalization"], "by_concept");
}

TEST(Views, TraceHidesPromptsUnlessDebug) {
    const auto s = run_fixture();
    const auto plain = trace_view(s, false).dump();
    EXPECT_FALSE(contains(plain, "\"prompt\""));
    EXPECT_FALSE(contains(plain, "\"response\""));
    EXPECT_TRUE(contains(trace_view(s, true).dump(), "\"prompt\""));
}

TEST(Views, HighlightsCoverQuotes) {
    const auto s = run_fixture();
    ASSERT_FALSE(s.quotes.empty());
    const auto& q = s.quotes.front();
    const auto h = highlights(s, q.doc_id);
    ASSERT_FALSE(h.empty());
    const auto& text = s.find_document(q.doc_id)->text;
    bool found = false;
    for (const auto& r : h) {
        const std::size_t a = r["start"], b = r["end"];
        found |= text.substr(a, b - a) == q.text;
    }
    EXPECT_TRUE(found);
}

TEST(Views, SummaryAndSliceDetail) {
    auto s = small_session(8);
    define_slice(fixed_clock(), s, "R", "party == \"R\"");
    EXPECT_EQ(session_summary(s)["n_documents"], 8);
    EXPECT_FALSE(session_summary(s).contains("documents"));
    const auto d = slice_detail(s, "R");
    EXPECT_EQ(d["size"], 4);
    EXPECT_THROW(slice_detail(s, "missing"), NotFoundError);
}

namespace {

ServiceOptions service_options(const std::optional<std::filesystem::path>& dir = std::nullopt) {
    ServiceOptions o;
    o.session_dir = dir;
    o.workers = 2;
    o.clock = fixed_clock();
    return o;
}

std::shared_ptr<Gateway> gateway_over(std::shared_ptr<ChatBackend> b) {
    auto g = std::make_shared<Gateway>(std::move(b), GatewayConfig{}, fixed_clock());
    g->set_sleeper([](std::chrono::milliseconds) {});
    return g;
}

} // namespace

TEST(Service, InductionJobReachesGoldenCount) {
    TempDir dir("lloom-service-job");
    WorkbenchService svc(gateway_over(fixture_backend()), TemplateSet{}, service_options(dir.path));
    svc.put_session(fixture_session());
    const auto job = svc.start_induction("fixture12", {});
    const auto st = svc.wait_job(job);
    EXPECT_EQ(st.state, JobState::Done) << st.error;
    EXPECT_EQ(st.concepts, 5u);
    EXPECT_EQ(*svc.snapshot("fixture12"), load_session(read_text(data_path("fixture12_golden.json"))));
    EXPECT_EQ(load_session_file(dir.path / "fixture12.json"), *svc.snapshot("fixture12"));

    WorkbenchService reloaded(nullptr, TemplateSet{}, service_options());
    EXPECT_EQ(load_sessions(reloaded, dir.path), 1u);
    EXPECT_EQ(*reloaded.snapshot("fixture12"), *svc.snapshot("fixture12"));
}

TEST(Service, SecondJobConflicts) {
    std::promise<void> gate;
    auto released = gate.get_future().share();
    auto inner = fixture_backend();
    auto gated = std::make_shared<FunctionBackend>(
        [=](const CompletionRequest& r) {
            released.wait();
            return inner->complete("", r).text;
        },
        [=](const std::string& t) { return inner->embed("", std::span<const std::string>(&t, 1)).vectors.at(0); });
    WorkbenchService svc(gateway_over(gated), TemplateSet{}, service_options());
    svc.put_session(fixture_session());
    const auto job = svc.start_induction("fixture12", {});
    EXPECT_THROW(svc.start_induction("fixture12", {}), ConflictError);
    gate.set_value();
    EXPECT_EQ(svc.wait_job(job).state, JobState::Done);
    EXPECT_THROW(svc.job_status("job-99"), NotFoundError);
}

TEST(Service, MissingGatewayFailsJob) {
    WorkbenchService svc(nullptr, TemplateSet{}, service_options());
    svc.put_session(fixture_session());
    const auto st = svc.wait_job(svc.start_induction("fixture12", {}));
    EXPECT_EQ(st.state, JobState::Failed);
    EXPECT_FALSE(st.error.empty());
    EXPECT_TRUE(svc.snapshot("fixture12")->concepts.empty());
    EXPECT_THROW(svc.add_concept("fixture12", "X", "Y?"), ConfigError);
}

TEST(Service, CreateSessionReportsRejectedRows) {
    WorkbenchService svc(nullptr, TemplateSet{}, service_options());
    IngestReport report;
    const auto id = svc.create_session(read_csv("text,age\nhello,3\n,4\nworld,5\n"), IngestOptions{}, std::nullopt, &report);
    EXPECT_EQ(svc.snapshot(id)->documents.size(), 2u);
    EXPECT_EQ(report.rejected.size(), 1u);
    EXPECT_THROW(svc.create_session(read_csv("body\nx\n"), IngestOptions{}, std::nullopt), DataError);
    EXPECT_THROW(svc.put_session(*svc.snapshot(id)), ConflictError);
}

TEST(Http, ErrorMapping) {
    EXPECT_EQ(error_response(ValidationError("x")).first, 400);
    EXPECT_EQ(error_response(NotFoundError("x")).first, 404);
    EXPECT_EQ(error_response(ConflictError("x")).first, 409);
    EXPECT_EQ(error_response(PreconditionError("x")).first, 422);
    EXPECT_EQ(error_response(TransportError("x")).first, 502);
    EXPECT_EQ(error_response(ConfigError("x")).first, 503);
    const auto [status, body] = error_response(slice::PredicateError("unexpected end", 7));
    EXPECT_EQ(status, 400);
    EXPECT_EQ(body["error"]["position"], 7);
}

TEST(Http, Routes) {
    WorkbenchService svc(gateway_over(analyst_backend()), TemplateSet{}, service_options());
    httplib::Server server;
    register_routes(server, svc);
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client c("127.0.0.1", port);

    auto health = c.Get("/api/health");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    EXPECT_EQ(json::parse(health->body)["status"], "ok");

    auto created = c.Post("/api/sessions", json{{"csv", "id,text,n\na,one,1\nb,two,2\nc,three,3\n"}, {"id_column", "id"}}.dump(),
                          "application/json");
    ASSERT_TRUE(created);
    ASSERT_EQ(created->status, 201) << created->body;
    const std::string sid = json::parse(created->body)["id"];
    const auto base = "/api/sessions/" + sid;

    auto added = c.Post(base + "/concepts", R"({"name": "Odd", "criteria": "Is it anything?"})", "application/json");
    ASSERT_EQ(added->status, 201) << added->body;
    EXPECT_EQ(c.Post(base + "/concepts", R"({"name": "Odd"})", "application/json")->status, 400);
    EXPECT_EQ(c.Post(base + "/concepts/merge", R"({"concept_ids": ["u1"]})", "application/json")->status, 422);

    auto bad = c.Post(base + "/slices", R"({"name": "s", "predicate": "n < "})", "application/json");
    EXPECT_EQ(bad->status, 400);
    EXPECT_TRUE(json::parse(bad->body)["error"].contains("position"));
    EXPECT_EQ(c.Post(base + "/slices", R"({"name": "big", "predicate": "n >= 2"})", "application/json")->status, 201);

    auto matrix = c.Get(base + "/matrix?normalization=by_slice");
    ASSERT_EQ(matrix->status, 200);
    EXPECT_EQ(json::parse(matrix->body)["cells"].size(), 2u);
    EXPECT_EQ(c.Get("/api/sessions/nope/matrix")->status, 404);
    EXPECT_EQ(c.Get("/api/jobs/nope")->status, 404);
    EXPECT_EQ(c.Patch(base + "/concepts/u1", R"({"name": "Renamed"})", "application/json")->status, 200);
    EXPECT_EQ(c.Get(base + "/export/matrix.csv")->status, 200);
    EXPECT_FALSE(contains(c.Get(base + "/trace")->body, "\"prompt\""));

    server.stop();
    t.join();
}

namespace {

struct CliResult {
    int code;
    std::string out, err;
};

CliResult cli_run(std::vector<std::string> args) {
    args.insert(args.begin(), "lloom");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path, std::ios::binary) << text; }

std::string fixture_config_file(const TempDir& dir) {
    const auto path = dir / "config.json";
    write_file(path, json{{"session", to_json(fixture_config())}}.dump());
    return path;
}

} // namespace

TEST(Cli, IngestCsvAndJsonl) {
    TempDir dir("lloom-cli-ingest");
    std::string csv = "id,text,age\n", jsonl;
    for (int i = 0; i < 100; ++i) {
        csv += "r" + std::to_string(i) + ",row " + std::to_string(i) + "," + std::to_string(20 + i) + "\n";
        jsonl += json{{"id", "r" + std::to_string(i)}, {"text", "row " + std::to_string(i)}, {"age", 20 + i}}.dump() + "\n";
    }
    write_file(dir / "d.csv", csv);
    write_file(dir / "d.jsonl", jsonl);
    const auto a = cli_run({"ingest", dir / "d.csv", "--text-col", "text", "--id-col", "id", "-o", dir / "a.json"});
    ASSERT_EQ(a.code, 0) << a.err;
    const auto b = cli_run({"ingest", dir / "d.jsonl", "--text-col", "text", "--id-col", "id", "-o", dir / "b.json"});
    ASSERT_EQ(b.code, 0) << b.err;
    const auto sa = load_session_file(dir / "a.json"), sb = load_session_file(dir / "b.json");
    EXPECT_EQ(sa.documents.size(), 100u);
    EXPECT_EQ(sa.documents, sb.documents);

    EXPECT_EQ(cli_run({"ingest", dir / "d.csv", "-o", dir / "c.json"}).code, 2);
    const auto missing = cli_run({"ingest", dir / "d.csv", "--text-col", "body", "-o", dir / "c.json"});
    EXPECT_EQ(missing.code, 3);
    EXPECT_TRUE(contains(missing.err, "text"));
}

TEST(Cli, InduceMatchesGoldenAndExports) {
    TempDir dir("lloom-cli-induce");
    const auto config = fixture_config_file(dir);
    const auto session = dir / "s.json";
    ASSERT_EQ(cli_run({"ingest", data_path("fixture12.csv").string(), "--text-col", "text", "--id-col", "id",
                       "--session-id", "fixture12", "--config", config, "--fixed-time", "-o", session})
                  .code,
              0);
    const auto backend = "scripted:" + data_path("fixture12_script.json").string();
    const auto r = cli_run({"induce", session, "--config", config, "--backend", backend, "--fixed-time"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(read_text(session), read_text(data_path("fixture12_golden.json")));
    EXPECT_TRUE(contains(r.out, "Economic Anxiety"));

    const auto s = load_session_file(session);
    const auto m = cli_run({"export", session, "--what", "matrix"});
    ASSERT_EQ(m.code, 0);
    const auto header = m.out.substr(0, m.out.find('\n'));
    EXPECT_EQ(static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1,
              1 + 2 * active_concept_ids(s).size());
    EXPECT_EQ(static_cast<std::size_t>(std::count(m.out.begin(), m.out.end(), '\n')), s.documents.size() + 1);

    const auto tr = cli_run({"export", session, "--what", "trace", "-o", dir / "trace.json"});
    ASSERT_EQ(tr.code, 0);
    std::vector<TraceEntry> entries;
    for (const auto& e : read_json(dir / "trace.json")) entries.push_back(trace_entry_from_json(e));
    EXPECT_EQ(replay(initial_state(s), entries), s);

    const auto u = cli_run({"usage", session, "--json"});
    ASSERT_EQ(u.code, 0);
    EXPECT_EQ(json::parse(u.out)["calls"], s.usage.size());
}

TEST(Cli, SeedTermReachesPrompts) {
    TempDir dir("lloom-cli-seed");
    write_file(dir / "d.csv", "id,text\na,alpha one\nb,alpha two\nc,alpha three\nd,alpha four\n");
    json script{{"completions",
                 {{{"template", "summarize"}, {"response", R"({"bullets": ["alpha point"]})"}},
                  {{"template", "synthesize"},
                   {"response", R"({"patterns": [{"name": "Alpha", "prompt": "Is it alpha?", "example_ids": []}]})"}},
                  {{"template", "score"},
                   {"response", R"({"pattern_results": [{"example_id": "a", "rationale": "", "answer": "A"},
                                   {"example_id": "b", "rationale": "", "answer": "A"},
                                   {"example_id": "c", "rationale": "", "answer": "A"},
                                   {"example_id": "d", "rationale": "", "answer": "A"}]})"}}}},
                {"embeddings", {{"alpha point", {1.0, 0.0}}}}};
    write_file(dir / "script.json", script.dump());
    ASSERT_EQ(cli_run({"ingest", dir / "d.csv", "--text-col", "text", "--id-col", "id", "-o", dir / "s.json"}).code, 0);
    const auto r = cli_run({"induce", dir / "s.json", "--seed-term", "social issues", "--backend",
                            "scripted:" + (dir / "script.json"), "--fixed-time"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto s = load_session_file(dir / "s.json");
    std::size_t seeded = 0;
    for (const auto& e : s.trace)
        if (e.kind == event_kind::kLlmCall && contains(e.data.value("prompt", ""), "related to social issues")) ++seeded;
    EXPECT_GE(seeded, 5u);
    EXPECT_EQ(s.config.seed_term, "social issues");
}

TEST(Cli, ExportConceptsOnEmptySession) {
    TempDir dir("lloom-cli-empty");
    write_file(dir / "d.csv", "text\nhello\n");
    ASSERT_EQ(cli_run({"ingest", dir / "d.csv", "--text-col", "text", "-o", dir / "s.json"}).code, 0);
    const auto r = cli_run({"export", dir / "s.json", "--what", "concepts"});
    EXPECT_EQ(r.code, 3);
    EXPECT_TRUE(contains(r.err, "no concepts"));
    EXPECT_EQ(cli_run({"export", dir / "missing.json"}).code, 3);
    EXPECT_EQ(cli_run({"bogus"}).code, 2);
}

TEST(Cli, EvalKappaAndCoverage) {
    TempDir dir("lloom-cli-eval");
    json a = json::array(), b = json::array();
    auto add = [&](bool p, bool q, int n) {
        for (int i = 0; i < n; ++i) {
            a.push_back(p);
            b.push_back(q);
        }
    };
    add(true, true, 20);
    add(true, false, 5);
    add(false, true, 5);
    add(false, false, 20);
    write_file(dir / "a.json", a.dump());
    write_file(dir / "b.json", b.dump());
    const auto k = cli_run({"eval", "kappa", dir / "a.json", dir / "b.json"});
    ASSERT_EQ(k.code, 0) << k.err;
    EXPECT_TRUE(contains(k.out, "kappa: 0.6"));

    write_file(dir / "gt.json", R"(["Rent", "Crime", "Schools", "Parks"])");
    write_file(dir / "gen.json", R"(["Housing", "Safety", "Education"])");
    json script{{"completions",
                 {{{"template", "coverage_match"},
                   {"response", R"({"concept_matches": [{"concept_id": 1, "item_id": 1, "rationale": ""},
                                   {"concept_id": 2, "item_id": 2, "rationale": ""},
                                   {"concept_id": 3, "item_id": 3, "rationale": ""},
                                   {"concept_id": 4, "item_id": "NONE", "rationale": ""}]})"}}}}};
    write_file(dir / "script.json", script.dump());
    const auto c = cli_run({"eval", "coverage", "--ground-truth", dir / "gt.json", "--generated", dir / "gen.json",
                            "--backend", "scripted:" + (dir / "script.json")});
    ASSERT_EQ(c.code, 0) << c.err;
    EXPECT_TRUE(contains(c.out, "coverage: 0.75"));
    EXPECT_TRUE(contains(c.out, "Parks -> NONE"));
}

TEST(Cli, ScriptedRunsNeverConnect) {
    TempDir dir("lloom-cli-offline");
    const auto config = fixture_config_file(dir);
    ASSERT_EQ(cli_run({"ingest", data_path("fixture12.csv").string(), "--text-col", "text", "--id-col", "id",
                       "--config", config, "-o", dir / "s.json"})
                  .code,
              0);
    const auto before = HttpBackend::connection_attempts();
    const auto r = cli_run({"induce", dir / "s.json", "--config", config, "--backend",
                            "scripted:" + data_path("fixture12_script.json").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(HttpBackend::connection_attempts(), before);

    HttpBackendConfig live;
    live.base_url = "http://127.0.0.1:1";
    live.timeout_seconds = 1;
    HttpBackend backend(live);
    EXPECT_THROW(backend.complete("m", {ModelTier::Score, Stage::Scoring, "score", "p"}), TransportError);
    EXPECT_EQ(HttpBackend::connection_attempts(), before + 1);
}
