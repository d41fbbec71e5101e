#include "lloom/io/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "lloom/core/session_io.hpp"
#include "lloom/error.hpp"

namespace lloom {

namespace {

void only_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError("config section '" + where + "' must be an object");
    for (const auto& [k, v] : j.items())
        if (!allowed.count(k)) throw ConfigError("unknown config key '" + where + "." + k + "'");
}

template <typename T>
T get(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + where + "." + key + "' has the wrong type");
    }
}

} // namespace

AppConfig config_from_json(const json& j) {
    AppConfig c;
    only_keys(j, "<root>", {"session", "models", "rates", "gateway", "provider", "template_dir", "workers"});

    if (j.contains("session")) {
        const auto& s = j["session"];
        auto defaults = to_json(c.session);
        only_keys(s, "session", [&] {
            std::set<std::string> keys;
            for (const auto& [k, v] : defaults.items()) keys.insert(k);
            return keys;
        }());
        for (const auto& [k, v] : s.items()) defaults[k] = v;
        try {
            c.session = session_config_from_json(defaults, "/session");
        } catch (const Error& e) {
            throw ConfigError(std::string("invalid session config: ") + e.what());
        }
    }
    if (j.contains("models")) {
        only_keys(j["models"], "models",
                  {"distill", "synthesize", "score", "embed", "generate_synthetic", "coverage_match"});
        for (const auto& [k, v] : j["models"].items()) {
            if (!v.is_string()) throw ConfigError("model for tier '" + k + "' must be a string");
            c.gateway.models[model_tier_from_string(k)] = v.get<std::string>();
        }
    }
    if (j.contains("rates")) {
        if (!j["rates"].is_object()) throw ConfigError("config section 'rates' must be an object");
        for (const auto& [model, r] : j["rates"].items()) {
            only_keys(r, "rates." + model, {"input_per_1k", "output_per_1k"});
            c.gateway.rates[model] = {get(r, "input_per_1k", 0.0, "rates." + model),
                                      get(r, "output_per_1k", 0.0, "rates." + model)};
        }
    }
    if (j.contains("gateway")) {
        const auto& g = j["gateway"];
        only_keys(g, "gateway",
                  {"max_concurrency", "max_attempts", "initial_backoff_ms", "backoff_multiplier", "embed_batch_size"});
        c.gateway.max_concurrency = get(g, "max_concurrency", c.gateway.max_concurrency, "gateway");
        c.gateway.max_attempts = get(g, "max_attempts", c.gateway.max_attempts, "gateway");
        c.gateway.initial_backoff =
            std::chrono::milliseconds(get<long long>(g, "initial_backoff_ms", c.gateway.initial_backoff.count(), "gateway"));
        c.gateway.backoff_multiplier = get(g, "backoff_multiplier", c.gateway.backoff_multiplier, "gateway");
        c.gateway.embed_batch_size = get(g, "embed_batch_size", c.gateway.embed_batch_size, "gateway");
    }
    if (j.contains("provider")) {
        const auto& p = j["provider"];
        only_keys(p, "provider", {"base_url", "chat_path", "embeddings_path", "api_key_env", "timeout_seconds"});
        c.provider.base_url = get(p, "base_url", c.provider.base_url, "provider");
        c.provider.chat_path = get(p, "chat_path", c.provider.chat_path, "provider");
        c.provider.embeddings_path = get(p, "embeddings_path", c.provider.embeddings_path, "provider");
        c.provider.api_key_env = get(p, "api_key_env", c.provider.api_key_env, "provider");
        c.provider.timeout_seconds = get(p, "timeout_seconds", c.provider.timeout_seconds, "provider");
    }
    if (j.contains("template_dir") && !j["template_dir"].is_null())
        c.template_dir = get<std::string>(j, "template_dir", "", "<root>");
    c.workers = get(j, "workers", c.workers, "<root>");
    return c;
}

AppConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    auto c = config_from_json(j);
    if (c.template_dir && c.template_dir->is_relative()) c.template_dir = path.parent_path() / *c.template_dir;
    return c;
}

void apply_environment(AppConfig& c) {
    if (const char* v = std::getenv("LLOOM_BASE_URL")) c.provider.base_url = v;
    if (const char* v = std::getenv("LLOOM_API_KEY_ENV")) c.provider.api_key_env = v;
}

json to_json(const AppConfig& c) {
    json models = json::object();
    for (const auto& [tier, m] : c.gateway.models) models[std::string(to_string(tier))] = m;
    json rates = json::object();
    for (const auto& [m, r] : c.gateway.rates) rates[m] = {{"input_per_1k", r.input_per_1k}, {"output_per_1k", r.output_per_1k}};
    json j{{"session", to_json(c.session)},
           {"models", models},
           {"rates", rates},
           {"gateway",
            {{"max_concurrency", c.gateway.max_concurrency},
             {"max_attempts", c.gateway.max_attempts},
             {"initial_backoff_ms", c.gateway.initial_backoff.count()},
             {"backoff_multiplier", c.gateway.backoff_multiplier},
             {"embed_batch_size", c.gateway.embed_batch_size}}},
           {"provider",
            {{"base_url", c.provider.base_url},
             {"chat_path", c.provider.chat_path},
             {"embeddings_path", c.provider.embeddings_path},
             {"api_key_env", c.provider.api_key_env},
             {"timeout_seconds", c.provider.timeout_seconds}}},
           {"workers", c.workers}};
    j["template_dir"] = c.template_dir ? json(c.template_dir->string()) : json();
    return j;
}

} // namespace lloom
