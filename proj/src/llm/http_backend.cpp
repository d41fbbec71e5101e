#include <algorithm>
#include <atomic>
#include <cstdlib>

#include <httplib.h>

#include "lloom/error.hpp"
#include "lloom/llm/backends.hpp"

namespace lloom {

namespace {
std::atomic<std::size_t> g_connection_attempts{0};
}

std::size_t HttpBackend::connection_attempts() { return g_connection_attempts.load(); }

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
    if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

json HttpBackend::post(const std::string& path, const json& body) {
    if (std::getenv("LLOOM_FORBID_NETWORK"))
        throw TransportError("network access forbidden (LLOOM_FORBID_NETWORK is set)");
    ++g_connection_attempts;
    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) throw TransportError("request to " + config_.base_url + path + " failed: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw TransportError("provider returned HTTP " + std::to_string(res->status), res->status);
    if (res->status >= 400)
        throw ContentError("provider rejected request with HTTP " + std::to_string(res->status), res->body);
    try {
        return json::parse(res->body);
    } catch (const json::parse_error&) {
        throw ContentError("provider returned non-JSON body", res->body);
    }
}

BackendReply HttpBackend::complete(const std::string& model, const CompletionRequest& request) {
    if (api_key_.empty() && config_.base_url.rfind("https://", 0) == 0)
        throw ConfigError("API key environment variable " + config_.api_key_env + " is not set");
    const json body = {{"model", model},
                       {"messages", json::array({{{"role", "user"}, {"content", request.prompt}}})},
                       {"temperature", request.temperature},
                       {"max_tokens", request.max_output_tokens}};
    const auto res = post(config_.chat_path, body);
    try {
        const auto& choice = res.at("choices").at(0);
        const auto& message = choice.at("message");
        if ((message.contains("refusal") && !message["refusal"].is_null()) ||
            choice.value("finish_reason", "") == "content_filter")
            throw ContentError("provider refused the request", res.dump());
        BackendReply r;
        r.text = message.at("content").is_string() ? message["content"].get<std::string>() : "";
        if (res.contains("usage")) {
            r.input_tokens = res["usage"].value("prompt_tokens", 0ULL);
            r.output_tokens = res["usage"].value("completion_tokens", 0ULL);
        }
        return r;
    } catch (const json::exception&) {
        throw ContentError("unexpected chat completion payload", res.dump());
    }
}

EmbedReply HttpBackend::embed(const std::string& model, std::span<const std::string> texts) {
    if (api_key_.empty() && config_.base_url.rfind("https://", 0) == 0)
        throw ConfigError("API key environment variable " + config_.api_key_env + " is not set");
    const json body = {{"model", model}, {"input", std::vector<std::string>(texts.begin(), texts.end())}};
    const auto res = post(config_.embeddings_path, body);
    try {
        EmbedReply r;
        std::vector<std::pair<std::size_t, std::vector<double>>> items;
        for (const auto& d : res.at("data"))
            items.emplace_back(d.value("index", items.size()), d.at("embedding").get<std::vector<double>>());
        std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
        for (auto& [i, v] : items) r.vectors.push_back(std::move(v));
        if (res.contains("usage")) r.input_tokens = res["usage"].value("prompt_tokens", 0ULL);
        return r;
    } catch (const json::exception&) {
        throw ContentError("unexpected embeddings payload", res.dump());
    }
}

} // namespace lloom
