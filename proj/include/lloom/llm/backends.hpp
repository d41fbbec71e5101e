#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lloom/llm/gateway.hpp"

namespace lloom {

/// Deterministic provider stand-in driven by a JSON script:
///
///   {
///     "completions": [
///       {"template": "summarize", "prompt_hash": "<fnv1a64>", "response": "...",
///        "transient_failures": 0, "refusal": false},
///       {"template": "score", "contains": ["Economic Anxiety", "d03"], "response": "..."}
///     ],
///     "fallback": {"synthesize": ["first reply", "second reply"]},
///     "embeddings": {"<text>": [0.1, 0.2, ...]}
///   }
///
/// Keyed entries match on template plus prompt hash and/or substrings; the
/// first match wins. Unmatched prompts consume the template's ordered
/// fallback list. With nothing left the call fails with ScriptError.
class ScriptedBackend : public ChatBackend {
public:
    struct Entry {
        std::string template_id;
        std::optional<std::string> prompt_hash;
        std::vector<std::string> contains;
        std::string response;
        int transient_failures = 0;
        bool refusal = false;
        std::optional<std::uint64_t> input_tokens;
        std::optional<std::uint64_t> output_tokens;
    };

    ScriptedBackend() = default;
    static std::shared_ptr<ScriptedBackend> from_json(const json& script);
    static std::shared_ptr<ScriptedBackend> from_file(const std::filesystem::path& path);

    void add(Entry e);
    void add_fallback(const std::string& template_id, Entry e);
    void set_embedding(const std::string& text, std::vector<double> v);

    BackendReply complete(const std::string& model, const CompletionRequest& request) override;
    EmbedReply embed(const std::string& model, std::span<const std::string> texts) override;
    std::string name() const override { return "scripted"; }

    std::size_t calls() const { return calls_.load(); }
    std::size_t embed_calls() const { return embed_calls_.load(); }

    /// Rough token estimate used when an entry does not state usage.
    static std::uint64_t estimate_tokens(std::string_view text);

private:
    BackendReply reply_from(Entry& e, const CompletionRequest& request, std::size_t index);

    mutable std::mutex mu_;
    std::vector<Entry> entries_;
    std::vector<int> failures_thrown_;
    std::map<std::string, std::vector<Entry>> fallback_;
    std::map<std::string, std::size_t> fallback_pos_;
    std::map<std::string, std::vector<double>> embeddings_;
    std::atomic<std::size_t> calls_{0};
    std::atomic<std::size_t> embed_calls_{0};
};

struct HttpBackendConfig {
    /// e.g. https://api.openai.com ; plain http is accepted for local gateways.
    std::string base_url = "https://api.openai.com";
    std::string chat_path = "/v1/chat/completions";
    std::string embeddings_path = "/v1/embeddings";
    /// Name of the environment variable holding the API key.
    std::string api_key_env = "OPENAI_API_KEY";
    int timeout_seconds = 120;
};

/// OpenAI-compatible chat-completions / embeddings client.
class HttpBackend : public ChatBackend {
public:
    explicit HttpBackend(HttpBackendConfig config);

    BackendReply complete(const std::string& model, const CompletionRequest& request) override;
    EmbedReply embed(const std::string& model, std::span<const std::string> texts) override;
    std::string name() const override { return "live"; }

    /// Process-wide count of outbound connection attempts.
    static std::size_t connection_attempts();

private:
    json post(const std::string& path, const json& body);

    HttpBackendConfig config_;
    std::string api_key_;
};

} // namespace lloom
