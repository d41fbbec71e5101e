#pragma once

#include <filesystem>
#include <optional>

#include "lloom/core/types.hpp"
#include "lloom/llm/backends.hpp"
#include "lloom/llm/gateway.hpp"

namespace lloom {

/// Everything read from the config file. Layout (all keys optional):
///
///   {
///     "session":  { <SessionConfig fields> },
///     "models":   { "distill": "gpt-3.5-turbo", "synthesize": "gpt-4", ... },
///     "rates":    { "gpt-4": {"input_per_1k": 0.03, "output_per_1k": 0.06} },
///     "gateway":  { "max_concurrency": 4, "max_attempts": 4, "initial_backoff_ms": 500,
///                   "backoff_multiplier": 2, "embed_batch_size": 100 },
///     "provider": { "base_url": "...", "chat_path": "...", "embeddings_path": "...",
///                   "api_key_env": "OPENAI_API_KEY", "timeout_seconds": 120 },
///     "template_dir": "prompts/",
///     "workers": 4
///   }
struct AppConfig {
    SessionConfig session;
    GatewayConfig gateway;
    HttpBackendConfig provider;
    std::optional<std::filesystem::path> template_dir;
    std::size_t workers = 4;
};

/// Unknown keys are rejected with ConfigError so typos do not pass silently.
AppConfig config_from_json(const json& j);
AppConfig load_config(const std::filesystem::path& path);

/// LLOOM_BASE_URL and LLOOM_API_KEY_ENV override the provider section.
void apply_environment(AppConfig& c);

json to_json(const AppConfig& c);

} // namespace lloom
