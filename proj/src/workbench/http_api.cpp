#include "lloom/workbench/http_api.hpp"

#include "lloom/core/session_io.hpp"
#include "lloom/core/slice_predicate.hpp"
#include "lloom/error.hpp"
#include "lloom/llm/gateway.hpp"
#include "lloom/workbench/views.hpp"

namespace lloom {

namespace {

json error_body(const std::string& code, const std::string& message) {
    return {{"error", {{"code", code}, {"message", message}}}};
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    auto j = json::parse(req.body);
    if (!j.is_object()) throw ValidationError("request body must be a JSON object");
    return j;
}

std::string required_string(const json& body, const std::string& key) {
    if (!body.contains(key) || !body[key].is_string()) throw ValidationError("'" + key + "' must be a string");
    return body[key].get<std::string>();
}

std::optional<std::string> optional_string(const json& body, const std::string& key) {
    if (!body.contains(key) || body[key].is_null()) return std::nullopt;
    if (!body[key].is_string()) throw ValidationError("'" + key + "' must be a string");
    return body[key].get<std::string>();
}

template <typename T>
std::optional<T> optional_number(const json& body, const std::string& key) {
    if (!body.contains(key) || body[key].is_null()) return std::nullopt;
    if (!body[key].is_number_integer() || body[key].get<std::int64_t>() < 0)
        throw ValidationError("'" + key + "' must be a non-negative integer");
    return body[key].get<T>();
}

SessionConfig overlay_config(const SessionConfig& base, const json& patch) {
    if (!patch.is_object()) throw ValidationError("'config' must be an object");
    auto j = to_json(base);
    for (const auto& [k, v] : patch.items()) {
        if (!j.contains(k)) throw ValidationError("unknown config key '" + k + "'");
        j[k] = v;
    }
    try {
        return session_config_from_json(j, "/config");
    } catch (const DecodeError& e) {
        throw ValidationError(std::string("invalid config: ") + e.what());
    }
}

// Wraps a handler so every exception becomes a JSON error response.
template <typename F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const std::exception& e) {
            auto [status, body] = error_response(e);
            send_json(res, status, body);
        }
    };
}

} // namespace

std::pair<int, json> error_response(const std::exception& e) {
    const std::string msg = e.what();
    if (const auto* p = dynamic_cast<const slice::PredicateError*>(&e)) {
        auto body = error_body("invalid_predicate", msg);
        body["error"]["position"] = p->position();
        return {400, body};
    }
    if (dynamic_cast<const ValidationError*>(&e)) return {400, error_body("validation", msg)};
    if (dynamic_cast<const DataError*>(&e)) return {400, error_body("invalid_dataset", msg)};
    if (dynamic_cast<const DecodeError*>(&e)) return {400, error_body("decode", msg)};
    if (dynamic_cast<const json::exception*>(&e)) return {400, error_body("invalid_json", msg)};
    if (dynamic_cast<const NotFoundError*>(&e)) return {404, error_body("not_found", msg)};
    if (dynamic_cast<const ConflictError*>(&e)) return {409, error_body("conflict", msg)};
    if (dynamic_cast<const PreconditionError*>(&e)) return {422, error_body("precondition", msg)};
    if (dynamic_cast<const PipelineError*>(&e)) return {422, error_body("pipeline", msg)};
    if (dynamic_cast<const ParseError*>(&e)) return {502, error_body("provider_parse", msg)};
    if (dynamic_cast<const TransportError*>(&e) || dynamic_cast<const ContentError*>(&e) ||
        dynamic_cast<const ScriptError*>(&e))
        return {502, error_body("provider", msg)};
    if (dynamic_cast<const ConfigError*>(&e)) return {503, error_body("not_configured", msg)};
    return {500, error_body("internal", msg)};
}

RawTable table_from_request(const json& body) {
    if (body.contains("csv")) return read_csv(required_string(body, "csv"));
    if (body.contains("jsonl")) return read_jsonl(required_string(body, "jsonl"));
    if (body.contains("path")) return read_dataset_file(required_string(body, "path"));
    if (body.contains("rows")) {
        const auto& rows = body["rows"];
        if (!rows.is_array()) throw ValidationError("'rows' must be an array of objects");
        RawTable t;
        for (const auto& r : rows) {
            if (!r.is_object()) throw ValidationError("'rows' must be an array of objects");
            std::map<std::string, json> row;
            for (const auto& [k, v] : r.items()) {
                if (std::find(t.columns.begin(), t.columns.end(), k) == t.columns.end()) t.columns.push_back(k);
                row[k] = v;
            }
            t.rows.push_back(std::move(row));
        }
        return t;
    }
    throw ValidationError("dataset must be given as 'csv', 'jsonl', 'rows' or 'path'");
}

void register_routes(httplib::Server& server, WorkbenchService& service,
                     const std::optional<std::filesystem::path>& static_dir) {
    const std::string S = R"(/api/sessions/([^/]+))";

    server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
        send_json(res, 200, {{"status", "ok"}});
    });

    server.Get("/api/sessions", guarded([&service](const httplib::Request&, httplib::Response& res) {
        json out = json::array();
        for (const auto& id : service.list_sessions()) out.push_back(session_summary(*service.snapshot(id)));
        send_json(res, 200, out);
    }));

    server.Post("/api/sessions", guarded([&service](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        const auto table = table_from_request(body);
        IngestOptions opts;
        if (auto c = optional_string(body, "text_column")) opts.text_col = *c;
        opts.id_col = optional_string(body, "id_column");
        std::optional<SessionConfig> config;
        if (body.contains("config")) config = overlay_config(SessionConfig{}, body["config"]);
        IngestReport report;
        const auto id = service.create_session(table, opts, config, &report);
        auto out = session_summary(*service.snapshot(id));
        out["ingest"] = to_json(report);
        send_json(res, 201, out);
    }));

    server.Get(S, guarded([&service](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, session_summary(*service.snapshot(req.matches[1])));
    }));

    server.Post(S + "/induction", guarded([&service](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        InductionParams p;
        p.loops = optional_number<std::size_t>(body, "loops");
        p.seed_term = optional_string(body, "seed_term");
        p.rng_seed = optional_number<std::uint64_t>(body, "rng_seed");
        p.max_concepts = optional_number<std::size_t>(body, "max_concepts");
        const auto job = service.start_induction(req.matches[1], p);
        send_json(res, 202, to_json(service.job_status(job)));
    }));

    server.Get(R"(/api/jobs/([^/]+))", guarded([&service](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, to_json(service.job_status(req.matches[1])));
    }));

    server.Get(S + "/matrix", guarded([&service](const httplib::Request& req, httplib::Response& res) {
        auto norm = Normalization::BySlice;
        if (req.has_param("normalization")) norm = normalization_from_string(req.get_param_value("normalization"));
        send_json(res, 200, service.matrix_view(req.matches[1], norm));
    }));

    server.Post(S + "/concepts/merge", guarded([&service](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        if (!body.contains("concept_ids") || !body["concept_ids"].is_array())
            throw ValidationError("'concept_ids' must be an array of strings");
        std::vector<std::string> ids;
        for (const auto& v : body["concept_ids"]) {
            if (!v.is_string()) throw ValidationError("'concept_ids' must be an array of strings");
            ids.push_back(v.get<std::string>());
        }
        const auto merged = service.merge_concepts(req.matches[1], ids);
        send_json(res, 201, service.concept_detail(req.matches[1], merged.id));
    }));

    server.Post(S + "/concepts/([^/]+)/split", guarded([&service](const httplib::Request& req, httplib::Response& res) {
        const auto subs = service.split_concept(req.matches[1], req.matches[2]);
        json out = json::array();
        for (const auto& c : subs) out.push_back(service.concept_detail(req.matches[1], c.id));
        send_json(res, 201, out);
    }));

    server.Post(S + "/concepts", guarded([&service](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        const auto id = service.add_concept(req.matches[1], required_string(body, "name"), required_string(body, "criteria"));
        send_json(res, 201, service.concept_detail(req.matches[1], id));
    }));

    server.Get(S + "/concepts/([^/]+)", guarded([&service](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, service.concept_detail(req.matches[1], req.matches[2]));
    }));

    server.Patch(S + "/concepts/([^/]+)", guarded([&service](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        service.edit_concept(req.matches[1], req.matches[2], optional_string(body, "name"),
                             optional_string(body, "criteria"));
        send_json(res, 200, service.concept_detail(req.matches[1], req.matches[2]));
    }));

    server.Post(S + "/slices", guarded([&service](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        const auto sl = service.define_slice(req.matches[1], required_string(body, "name"),
                                             required_string(body, "predicate"));
        send_json(res, 201, service.slice_detail(req.matches[1], sl.name));
    }));

    server.Get(S + "/slices/([^/]+)", guarded([&service](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, service.slice_detail(req.matches[1], req.matches[2]));
    }));

    server.Get(S + "/trace", guarded([&service](const httplib::Request& req, httplib::Response& res) {
        const bool debug = req.has_param("debug") && req.get_param_value("debug") == "1";
        send_json(res, 200, trace_view(*service.snapshot(req.matches[1]), debug));
    }));

    server.Get(S + "/usage", guarded([&service](const httplib::Request& req, httplib::Response& res) {
        send_json(res, 200, to_json(usage_report(service.snapshot(req.matches[1])->usage)));
    }));

    server.Get(S + "/export/matrix.csv", guarded([&service](const httplib::Request& req, httplib::Response& res) {
        res.status = 200;
        res.set_content(matrix_csv(*service.snapshot(req.matches[1])), "text/csv");
    }));

    if (static_dir) server.set_mount_point("/", static_dir->string());
}

} // namespace lloom
