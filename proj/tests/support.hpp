#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "lloom/core/events.hpp"
#include "lloom/core/session_io.hpp"
#include "lloom/io/dataset.hpp"
#include "lloom/llm/backends.hpp"
#include "lloom/llm/gateway.hpp"
#include "lloom/llm/templates.hpp"
#include "lloom/pipeline/engine.hpp"
#include "lloom/pipeline/induction.hpp"

namespace lloom::test_support {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(LLOOM_TEST_DATA) / name;
}

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json read_json(const std::filesystem::path& p) { return json::parse(read_text(p)); }

/// Answers completions with a callback; embeddings come from `embed_fn`.
class FunctionBackend : public ChatBackend {
public:
    using Fn = std::function<std::string(const CompletionRequest&)>;
    using EmbedFn = std::function<std::vector<double>(const std::string&)>;

    explicit FunctionBackend(Fn fn, EmbedFn embed_fn = {}) : fn_(std::move(fn)), embed_fn_(std::move(embed_fn)) {}

    BackendReply complete(const std::string&, const CompletionRequest& r) override {
        ++calls;
        return {fn_(r), ScriptedBackend::estimate_tokens(r.prompt), 20};
    }
    EmbedReply embed(const std::string&, std::span<const std::string> texts) override {
        EmbedReply out;
        for (const auto& t : texts) out.vectors.push_back(embed_fn_(t));
        return out;
    }
    std::string name() const override { return "function"; }

    std::atomic<std::size_t> calls{0};

private:
    Fn fn_;
    EmbedFn embed_fn_;
};

/// Gateway plus engine context over one backend, with retries that do not sleep.
struct Rig {
    std::shared_ptr<ChatBackend> backend;
    std::unique_ptr<Gateway> gateway;
    TemplateSet templates;
    EngineContext ctx;

    explicit Rig(std::shared_ptr<ChatBackend> b, std::size_t workers = 4, Clock clock = fixed_clock())
        : backend(std::move(b)),
          gateway(std::make_unique<Gateway>(backend, GatewayConfig{}, clock)),
          ctx{*gateway, templates, clock, {}, workers} {
        gateway->set_sleeper([](std::chrono::milliseconds) {});
    }
};

inline std::vector<std::string> example_ids_in(const std::string& prompt) {
    static const std::regex re("\"example_id\":\"([^\"]+)\"");
    std::vector<std::string> out;
    for (auto it = std::sregex_iterator(prompt.begin(), prompt.end(), re); it != std::sregex_iterator(); ++it)
        out.push_back((*it)[1]);
    return out;
}

inline std::string concept_name_in(const std::string& score_prompt) {
    static const std::regex re("pattern named (.*) with the following PROMPT");
    std::smatch m;
    return std::regex_search(score_prompt, m, re) ? std::string(m[1]) : "";
}

/// A score reply answering `answer(concept_name, doc_id)` for every example in the prompt.
inline std::string score_reply(const CompletionRequest& r,
                               const std::function<std::string(const std::string&, const std::string&)>& answer) {
    const auto name = concept_name_in(r.prompt);
    json results = json::array();
    for (const auto& id : example_ids_in(r.prompt))
        results.push_back({{"example_id", id}, {"rationale", "because"}, {"answer", answer(name, id)}});
    return json{{"pattern_results", results}}.dump();
}

inline SessionConfig fixture_config() {
    SessionConfig c;
    c.min_cluster_size = 4;
    c.min_samples = 2;
    c.max_concepts = 8;
    c.n_loops = 2;
    c.rng_seed = 7;
    return c;
}

inline Session fixture_session(const Clock& clock = fixed_clock()) {
    IngestOptions o;
    o.id_col = "id";
    return make_session("fixture12", ingest(read_dataset_file(data_path("fixture12.csv")), o), fixture_config(), clock);
}

inline std::shared_ptr<ScriptedBackend> fixture_backend() {
    return ScriptedBackend::from_file(data_path("fixture12_script.json"));
}

/// The scripted two-loop induction run over the 12-document fixture.
inline Session run_fixture(std::size_t workers = 4) {
    Rig rig(fixture_backend(), workers);
    auto s = fixture_session();
    run_iterations(rig.ctx, s, s.config.n_loops);
    return s;
}

/// Small session with plain documents d0..d{n-1} and a numeric "score" column.
inline Session small_session(std::size_t n, const Clock& clock = fixed_clock()) {
    RawTable t;
    t.columns = {"id", "text", "score", "party"};
    for (std::size_t i = 0; i < n; ++i)
        t.rows.push_back({{"id", "d" + std::to_string(i)},
                          {"text", "document number " + std::to_string(i) + " talks about topic " +
                                       std::to_string(i % 3)},
                          {"score", static_cast<double>(i) / static_cast<double>(n)},
                          {"party", i % 2 ? "D" : "R"}});
    IngestOptions o;
    o.id_col = "id";
    return make_session("small", ingest(t, o), SessionConfig{}, clock);
}

} // namespace lloom::test_support
