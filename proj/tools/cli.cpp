#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <sstream>

#include "lloom/core/events.hpp"
#include "lloom/core/session_io.hpp"
#include "lloom/error.hpp"
#include "lloom/eval/harness.hpp"
#include "lloom/eval/metrics.hpp"
#include "lloom/eval/synthetic.hpp"
#include "lloom/io/config.hpp"
#include "lloom/io/dataset.hpp"
#include "lloom/llm/backends.hpp"
#include "lloom/pipeline/induction.hpp"
#include "lloom/scoring/scoring.hpp"
#include "lloom/workbench/http_api.hpp"
#include "lloom/workbench/service.hpp"

namespace lloom::cli {

namespace {

struct Common {
    std::string config_path;
    std::string backend = "live";
    std::size_t workers = 0;
    bool fixed_time = false;
};

AppConfig load_app_config(const Common& c) {
    AppConfig cfg = c.config_path.empty() ? AppConfig{} : load_config(c.config_path);
    apply_environment(cfg);
    if (c.workers) cfg.workers = c.workers;
    return cfg;
}

Clock clock_for(const Common& c) { return c.fixed_time ? fixed_clock() : system_clock(); }

std::shared_ptr<Gateway> make_gateway(const Common& c, const AppConfig& cfg) {
    std::shared_ptr<ChatBackend> backend;
    if (c.backend == "live") {
        backend = std::make_shared<HttpBackend>(cfg.provider);
    } else if (c.backend.rfind("scripted:", 0) == 0) {
        backend = ScriptedBackend::from_file(c.backend.substr(9));
    } else {
        throw ConfigError("--backend must be 'live' or 'scripted:<script path>', got '" + c.backend + "'");
    }
    return std::make_shared<Gateway>(backend, cfg.gateway, clock_for(c));
}

TemplateSet templates_for(const AppConfig& cfg) {
    return cfg.template_dir ? TemplateSet::from_directory(*cfg.template_dir) : TemplateSet{};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_file(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw DataError("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_output(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write '" + path + "'");
    f << content;
}

std::vector<std::string> string_list(const json& j, const std::string& what) {
    if (!j.is_array()) throw DataError(what + " must be a JSON array of strings");
    std::vector<std::string> out;
    for (const auto& v : j) {
        if (!v.is_string()) throw DataError(what + " must be a JSON array of strings");
        out.push_back(v.get<std::string>());
    }
    return out;
}

bool label_value(const json& v, const std::string& path) {
    if (v.is_boolean()) return v.get<bool>();
    if (v.is_number() && (v.get<double>() == 0 || v.get<double>() == 1)) return v.get<double>() == 1;
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "1" || s == "true" || s == "yes") return true;
        if (s == "0" || s == "false" || s == "no") return false;
    }
    throw DataError("'" + path + "' holds a non-binary label: " + v.dump());
}

// A JSON array of labels, or one label per line.
std::vector<bool> read_labels(const std::string& path) {
    const auto text = read_file(path);
    std::vector<bool> out;
    const auto t = trim(text);
    if (!t.empty() && t.front() == '[') {
        for (const auto& v : read_json_file(path)) out.push_back(label_value(v, path));
        return out;
    }
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        const auto l = trim(line);
        if (!l.empty()) out.push_back(label_value(json(std::string(l)), path));
    }
    return out;
}

void print_concepts(const Session& s, std::ostream& out) {
    const auto n = s.documents.size();
    out << std::left << std::setw(14) << "id" << std::setw(6) << "gen" << std::setw(10) << "matches"
        << "name\n";
    for (const auto* c : s.active_concepts()) {
        std::size_t m = 0;
        if (const auto* col = s.matrix.column(c->id))
            for (const auto& e : *col) m += e.label ? 1 : 0;
        out << std::left << std::setw(14) << c->id << std::setw(6) << c->generation << std::setw(10)
            << (std::to_string(m) + "/" + std::to_string(n)) << c->name << (c->generic ? " (generic)" : "") << "\n";
    }
    out << "outlier fraction: " << format_number(outlier_fraction(s)) << "\n";
}

void add_common(CLI::App* app, Common& c, bool with_backend) {
    app->add_option("--config", c.config_path, "Config file (JSON)");
    app->add_option("--workers", c.workers, "Worker threads");
    app->add_flag("--fixed-time", c.fixed_time, "Stamp every trace entry with the epoch (reproducible output)");
    if (with_backend) app->add_option("--backend", c.backend, "live | scripted:<script path>");
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ValidationError*>(&e) ||
        dynamic_cast<const TemplateError*>(&e))
        return kUsage;
    if (dynamic_cast<const TransportError*>(&e) || dynamic_cast<const ContentError*>(&e) ||
        dynamic_cast<const ScriptError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
        dynamic_cast<const PipelineError*>(&e))
        return kProvider;
    if (dynamic_cast<const Error*>(&e) || dynamic_cast<const json::exception*>(&e)) return kData;
    return kFailure;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Concept induction over unstructured text", "lloom"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    std::function<void()> action;

    // ingest
    Common ingest_c;
    std::string ingest_path, ingest_text_col, ingest_id_col, ingest_out, ingest_session_id = "session";
    auto* ingest_cmd = app.add_subcommand("ingest", "Read a CSV or JSON-lines dataset into a session file");
    ingest_cmd->add_option("path", ingest_path, "Dataset file")->required();
    ingest_cmd->add_option("--text-col", ingest_text_col, "Column holding the document text")->required();
    ingest_cmd->add_option("--id-col", ingest_id_col, "Column holding document ids (default: row index)");
    ingest_cmd->add_option("--out,-o", ingest_out, "Session file to write")->required();
    ingest_cmd->add_option("--session-id", ingest_session_id, "Session id");
    add_common(ingest_cmd, ingest_c, false);
    ingest_cmd->callback([&] {
        action = [&] {
            const auto cfg = load_app_config(ingest_c);
            IngestOptions opts;
            opts.text_col = ingest_text_col;
            if (!ingest_id_col.empty()) opts.id_col = ingest_id_col;
            auto data = ingest(read_dataset_file(ingest_path), opts);
            const auto report = to_json(data.report);
            const auto s = make_session(ingest_session_id, std::move(data), cfg.session, clock_for(ingest_c));
            save_session(s, ingest_out);
            out << report.dump(2) << "\n";
        };
    });

    // induce
    Common induce_c;
    std::string induce_session, induce_out, induce_seed;
    std::optional<std::size_t> induce_loops, induce_max;
    std::optional<std::uint64_t> induce_rng;
    auto* induce_cmd = app.add_subcommand("induce", "Run concept induction and scoring on a session");
    induce_cmd->add_option("session", induce_session, "Session file")->required();
    induce_cmd->add_option("--loops", induce_loops, "Number of generation iterations");
    induce_cmd->add_option("--seed-term", induce_seed, "Steer generation toward a topic");
    induce_cmd->add_option("--rng-seed", induce_rng, "Sampling seed");
    induce_cmd->add_option("--max-concepts", induce_max, "Concept cap per iteration");
    induce_cmd->add_option("--out,-o", induce_out, "Where to write the updated session (default: in place)");
    add_common(induce_cmd, induce_c, true);
    induce_cmd->callback([&] {
        action = [&] {
            const auto cfg = load_app_config(induce_c);
            auto s = load_session_file(induce_session);
            auto sc = s.config;
            if (induce_loops) sc.n_loops = *induce_loops;
            if (!induce_seed.empty()) sc.seed_term = induce_seed;
            if (induce_rng) sc.rng_seed = *induce_rng;
            if (induce_max) sc.max_concepts = *induce_max;
            const auto clock = clock_for(induce_c);
            if (!(sc == s.config)) commit(s, clock, Event{event_kind::kConfigSet, {{"config", to_json(sc)}}});
            auto gw = make_gateway(induce_c, cfg);
            const auto templates = templates_for(cfg);
            EngineContext ctx{*gw, templates, clock, {}, cfg.workers};
            run_iterations(ctx, s, sc.n_loops);
            save_session(s, induce_out.empty() ? induce_session : induce_out);
            print_concepts(s, out);
        };
    });

    // score
    Common score_c;
    std::string score_session, score_out;
    std::vector<std::string> score_ids;
    auto* score_cmd = app.add_subcommand("score", "Score unscored concepts, or rescore the given ones");
    score_cmd->add_option("session", score_session, "Session file")->required();
    score_cmd->add_option("--concept", score_ids, "Concept id to rescore (repeatable)");
    score_cmd->add_option("--out,-o", score_out, "Where to write the updated session (default: in place)");
    add_common(score_cmd, score_c, true);
    score_cmd->callback([&] {
        action = [&] {
            const auto cfg = load_app_config(score_c);
            auto s = load_session_file(score_session);
            auto gw = make_gateway(score_c, cfg);
            const auto templates = templates_for(cfg);
            EngineContext ctx{*gw, templates, clock_for(score_c), {}, cfg.workers};
            if (score_ids.empty()) {
                score_concepts(ctx, s, unscored_concepts(s));
            } else {
                for (const auto& id : score_ids) rescore_concept(ctx, s, id);
            }
            save_session(s, score_out.empty() ? score_session : score_out);
            print_concepts(s, out);
        };
    });

    // export
    std::string export_session, export_what = "matrix", export_out;
    auto* export_cmd = app.add_subcommand("export", "Export the matrix (CSV), concepts or trace (JSON)");
    export_cmd->add_option("session", export_session, "Session file")->required();
    export_cmd->add_option("--what", export_what, "matrix | concepts | trace")
        ->check(CLI::IsMember({"matrix", "concepts", "trace"}));
    export_cmd->add_option("--out,-o", export_out, "Output file (default: stdout)");
    export_cmd->callback([&] {
        action = [&] {
            const auto s = load_session_file(export_session);
            if (export_what == "matrix") {
                if (s.matrix.columns.empty()) throw DataError("no scored concepts in session");
                write_output(export_out, matrix_csv(s), out);
            } else if (export_what == "concepts") {
                if (s.concepts.empty()) throw DataError("no concepts in session");
                json arr = json::array();
                for (const auto& c : s.concepts) arr.push_back(to_json(c));
                write_output(export_out, arr.dump(2) + "\n", out);
            } else {
                json arr = json::array();
                for (const auto& t : s.trace) arr.push_back(to_json(t));
                write_output(export_out, arr.dump(2) + "\n", out);
            }
        };
    });

    // usage
    std::string usage_session;
    bool usage_json = false;
    auto* usage_cmd = app.add_subcommand("usage", "Token, cost and time report by stage");
    usage_cmd->add_option("session", usage_session, "Session file")->required();
    usage_cmd->add_flag("--json", usage_json, "Print JSON");
    usage_cmd->callback([&] {
        action = [&] {
            const auto s = load_session_file(usage_session);
            const auto r = usage_report(s.usage);
            if (usage_json) {
                out << to_json(r).dump(2) << "\n";
                return;
            }
            out << std::left << std::setw(12) << "stage" << std::setw(8) << "calls" << std::setw(12) << "in_tokens"
                << std::setw(12) << "out_tokens" << std::setw(12) << "cost" << std::setw(10) << "cost%"
                << "time%\n";
            for (const auto& st : r.stages)
                out << std::left << std::setw(12) << to_string(st.stage) << std::setw(8) << st.calls << std::setw(12)
                    << st.input_tokens << std::setw(12) << st.output_tokens << std::setw(12)
                    << format_number(st.cost) << std::setw(10) << std::fixed << std::setprecision(1)
                    << st.cost_share_pct << st.time_share_pct << std::defaultfloat << "\n";
            out << "total: " << r.calls << " calls, " << r.input_tokens << " in, " << r.output_tokens
                << " out, cost " << format_number(r.cost) << "\n";
        };
    });

    // serve
    Common serve_c;
    std::string serve_host = "127.0.0.1", serve_dir = "sessions", serve_static;
    int serve_port = 8080;
    auto* serve_cmd = app.add_subcommand("serve", "Run the workbench HTTP service");
    serve_cmd->add_option("--port", serve_port, "Port");
    serve_cmd->add_option("--host", serve_host, "Bind address");
    serve_cmd->add_option("--session-dir", serve_dir, "Directory for session files");
    serve_cmd->add_option("--static", serve_static, "Built UI bundle to serve at /");
    add_common(serve_cmd, serve_c, true);
    serve_cmd->callback([&] {
        action = [&] {
            const auto cfg = load_app_config(serve_c);
            std::shared_ptr<Gateway> gw;
            try {
                gw = make_gateway(serve_c, cfg);
            } catch (const Error& e) {
                err << "warning: " << e.what() << "; LLM-backed endpoints will fail\n";
            }
            ServiceOptions opts;
            opts.session_dir = serve_dir;
            opts.default_config = cfg.session;
            opts.workers = cfg.workers;
            opts.clock = clock_for(serve_c);
            WorkbenchService service(gw, templates_for(cfg), opts);
            const auto n = load_sessions(service, serve_dir);
            httplib::Server server;
            register_routes(server, service,
                            serve_static.empty() ? std::nullopt : std::optional<std::filesystem::path>(serve_static));
            out << "loaded " << n << " session(s); listening on http://" << serve_host << ":" << serve_port
                << std::endl;
            if (!server.listen(serve_host, serve_port))
                throw ConfigError("cannot listen on " + serve_host + ":" + std::to_string(serve_port));
        };
    });

    // config
    Common config_c;
    auto* config_cmd = app.add_subcommand("config", "Print the effective configuration");
    add_common(config_cmd, config_c, false);
    config_cmd->callback([&] { action = [&] { out << to_json(load_app_config(config_c)).dump(2) << "\n"; }; });

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluation tools");
    eval_cmd->require_subcommand(1);

    Common gen_c;
    std::size_t gen_length = 5, gen_docs = 1, gen_attempts = 3;
    double gen_prevalence = 0.2, gen_temperature = 0.0;
    std::string gen_seed, gen_out;
    auto* gen_cmd = eval_cmd->add_subcommand("generate-synthetic", "Generate verified synthetic documents");
    gen_cmd->add_option("--doc-length", gen_length, "Sentences per document (5 or 10)");
    gen_cmd->add_option("--prevalence", gen_prevalence, "Fraction of seed sentences (0.2 or 0.4)");
    gen_cmd->add_option("--seed-concept", gen_seed, "Specific concept (default: cycle through the hierarchy)");
    gen_cmd->add_option("--n-docs", gen_docs, "Documents to generate");
    gen_cmd->add_option("--max-attempts", gen_attempts, "Generations tried per document");
    gen_cmd->add_option("--temperature", gen_temperature, "Sampling temperature");
    gen_cmd->add_option("--out,-o", gen_out, "JSON-lines output (default: stdout)");
    add_common(gen_cmd, gen_c, true);
    gen_cmd->callback([&] {
        action = [&] {
            const auto cfg = load_app_config(gen_c);
            auto gw = make_gateway(gen_c, cfg);
            const auto templates = templates_for(cfg);
            EngineContext ctx{*gw, templates, clock_for(gen_c), {}, cfg.workers};
            std::vector<std::string> specifics;
            for (const auto& g : concept_hierarchy())
                for (const auto& s : g.specifics) specifics.push_back(s);
            std::string lines;
            std::size_t failed = 0;
            for (std::size_t i = 0; i < gen_docs; ++i) {
                SyntheticSpec spec{gen_length, gen_prevalence, gen_seed.empty() ? specifics[i % specifics.size()] : gen_seed,
                                   gen_docs};
                EventLog log;
                try {
                    const auto g = generate_synthetic_doc(ctx, spec, gen_attempts, gen_temperature, log);
                    lines += json{{"id", std::to_string(i)},
                                  {"text", g.doc.paragraph},
                                  {"seed_concept", spec.seed_concept},
                                  {"generic_concept", generic_of(concept_hierarchy(), spec.seed_concept)},
                                  {"seed_sentences", g.doc.seed_sentences},
                                  {"doc_length", spec.doc_length},
                                  {"concept_prevalence", spec.concept_prevalence},
                                  {"attempts", g.attempts}}
                                 .dump() +
                             "\n";
                } catch (const PipelineError& e) {
                    ++failed;
                    err << "document " << i << ": " << e.what() << "\n";
                }
            }
            write_output(gen_out, lines, out);
            if (failed) throw PipelineError(std::to_string(failed) + " of " + std::to_string(gen_docs) +
                                            " documents could not be generated");
        };
    });

    Common cov_c;
    std::string cov_gt, cov_gen;
    auto* cov_cmd = eval_cmd->add_subcommand("coverage", "Fraction of ground-truth concepts matched by generated ones");
    cov_cmd->add_option("--ground-truth", cov_gt, "JSON array of ground-truth concept names")->required();
    cov_cmd->add_option("--generated", cov_gen, "JSON array of generated concept texts")->required();
    add_common(cov_cmd, cov_c, true);
    cov_cmd->callback([&] {
        action = [&] {
            const auto cfg = load_app_config(cov_c);
            const auto gt = string_list(read_json_file(cov_gt), cov_gt);
            const auto gen = string_list(read_json_file(cov_gen), cov_gen);
            auto gw = make_gateway(cov_c, cfg);
            const auto templates = templates_for(cfg);
            EngineContext ctx{*gw, templates, clock_for(cov_c), {}, cfg.workers};
            EventLog log;
            const auto r = auto_coverage(ctx, gt, gen, log);
            for (const auto& w : r.warnings) err << "warning: " << w << "\n";
            for (const auto& m : r.matches)
                out << gt[m.ground_truth] << " -> " << (m.generated ? gen[*m.generated] : std::string("NONE")) << "\n";
            out << "coverage: " << format_number(r.coverage) << "\n";
        };
    });

    std::string met_pred, met_gold;
    auto* met_cmd = eval_cmd->add_subcommand("metrics", "Accuracy, precision, recall and F1 of binary labels");
    met_cmd->add_option("--predicted", met_pred, "Predicted labels file")->required();
    met_cmd->add_option("--gold", met_gold, "Gold labels file")->required();
    met_cmd->callback([&] {
        action = [&] {
            const auto m = classification_metrics(read_labels(met_pred), read_labels(met_gold));
            out << "tp=" << m.tp << " fp=" << m.fp << " fn=" << m.fn << " tn=" << m.tn << "\n"
                << "accuracy: " << format_number(m.accuracy) << "\n"
                << "precision: " << format_number(m.precision) << (m.precision_undefined ? " (undefined, no positive predictions)" : "") << "\n"
                << "recall: " << format_number(m.recall) << (m.recall_undefined ? " (undefined, no positive gold labels)" : "") << "\n"
                << "f1: " << format_number(m.f1) << (m.f1_undefined ? " (undefined)" : "") << "\n";
        };
    });

    std::string kappa_a, kappa_b;
    auto* kappa_cmd = eval_cmd->add_subcommand("kappa", "Cohen's kappa between two raters");
    kappa_cmd->add_option("a", kappa_a, "Rater A labels file")->required();
    kappa_cmd->add_option("b", kappa_b, "Rater B labels file")->required();
    kappa_cmd->callback([&] {
        action = [&] {
            const auto k = cohens_kappa(read_labels(kappa_a), read_labels(kappa_b));
            out << "kappa: " << format_number(k.kappa) << "\n"
                << "observed: " << format_number(k.observed) << "\nexpected: " << format_number(k.expected) << "\n";
            if (k.degenerate) out << "note: degenerate (expected agreement is 1)\n";
            if (k.constant_rater) out << "note: a rater used a single label\n";
        };
    });

    Common trials_c;
    std::string trials_in, trials_out;
    std::size_t trials_n = 10;
    auto* trials_cmd = eval_cmd->add_subcommand("trials", "Coverage across repeated trials, as CSV");
    trials_cmd->add_option("--input", trials_in, "JSON list of {method, dataset, ground_truth, trials}")->required();
    trials_cmd->add_option("--n-trials", trials_n, "Trials per method");
    trials_cmd->add_option("--out,-o", trials_out, "CSV output (default: stdout)");
    add_common(trials_cmd, trials_c, true);
    trials_cmd->callback([&] {
        action = [&] {
            const auto cfg = load_app_config(trials_c);
            const auto j = read_json_file(trials_in);
            if (!j.is_array()) throw DataError("trials input must be a JSON array");
            auto gw = make_gateway(trials_c, cfg);
            const auto templates = templates_for(cfg);
            EngineContext ctx{*gw, templates, clock_for(trials_c), {}, cfg.workers};
            std::vector<TrialReport> reports;
            for (const auto& e : j) {
                TrialInput in;
                in.method = e.value("method", "");
                in.dataset = e.value("dataset", "");
                in.ground_truth = string_list(e.value("ground_truth", json()), "ground_truth");
                for (const auto& t : e.value("trials", json::array())) {
                    TrialRun r;
                    if (t.contains("error") && t["error"].is_string()) r.error = t["error"].get<std::string>();
                    else r.concepts = string_list(t.value("concepts", json()), "concepts");
                    in.trials.push_back(std::move(r));
                }
                EventLog log;
                reports.push_back(run_trials(ctx, in, trials_n, log));
            }
            write_output(trials_out, trials_csv(reports), out);
        };
    });

    Common mae_c;
    std::string mae_in;
    auto* mae_cmd = eval_cmd->add_subcommand("mae", "Mean absolute error of automatic against manual coverage");
    mae_cmd->add_option("--manual", mae_in, "JSON list of {ground_truth, generated, matches}")->required();
    add_common(mae_cmd, mae_c, true);
    mae_cmd->callback([&] {
        action = [&] {
            const auto cfg = load_app_config(mae_c);
            const auto j = read_json_file(mae_in);
            if (!j.is_array() || j.empty()) throw DataError("manual match file must be a non-empty JSON array");
            auto gw = make_gateway(mae_c, cfg);
            const auto templates = templates_for(cfg);
            EngineContext ctx{*gw, templates, clock_for(mae_c), {}, cfg.workers};
            std::vector<double> automatic, manual;
            for (const auto& e : j) {
                const auto gt = string_list(e.value("ground_truth", json()), "ground_truth");
                const auto gen = string_list(e.value("generated", json()), "generated");
                const auto& ms = e.value("matches", json());
                if (!ms.is_array() || ms.size() != gt.size())
                    throw DataError("'matches' needs one entry (index or null) per ground-truth concept");
                std::vector<std::optional<std::size_t>> hand;
                for (const auto& m : ms) {
                    if (m.is_null()) hand.emplace_back();
                    else if (m.is_number_unsigned() && m.get<std::size_t>() < gen.size()) hand.emplace_back(m.get<std::size_t>());
                    else throw DataError("match entries must be a generated-concept index or null");
                }
                EventLog log;
                automatic.push_back(auto_coverage(ctx, gt, gen, log).coverage);
                manual.push_back(manual_coverage(hand));
            }
            for (std::size_t i = 0; i < automatic.size(); ++i)
                out << i << ": auto " << format_number(automatic[i]) << " manual " << format_number(manual[i]) << "\n";
            out << "mae: " << format_number(mean_absolute_error(automatic, manual)) << "\n";
        };
    });

    auto* hier_cmd = eval_cmd->add_subcommand("hierarchy", "Print the synthetic concept hierarchy");
    hier_cmd->callback([&] { action = [&] { out << to_json(concept_hierarchy()).dump(2) << "\n"; }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (action) action();
        return kOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

} // namespace lloom::cli
