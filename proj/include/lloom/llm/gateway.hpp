#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "lloom/core/types.hpp"
#include "lloom/core/util.hpp"

namespace lloom {

struct CompletionRequest {
    ModelTier tier = ModelTier::Distill;
    Stage stage = Stage::Generation;
    /// Template the prompt was rendered from; scripted backends key on it.
    std::string template_id;
    std::string prompt;
    double temperature = 0.0;
    int max_output_tokens = 2048;
};

struct CompletionResponse {
    std::string text;
    UsageRecord usage;
    int attempts = 1;
    std::string model;
};

/// What a provider returns for one attempt.
struct BackendReply {
    std::string text;
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
};

struct EmbedReply {
    std::vector<std::vector<double>> vectors;
    std::uint64_t input_tokens = 0;
};

/// Provider interface. Implementations throw TransportError for retryable
/// failures (network, 429, 5xx) and ContentError for refusals.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual BackendReply complete(const std::string& model, const CompletionRequest& request) = 0;
    virtual EmbedReply embed(const std::string& model, std::span<const std::string> texts) = 0;
    virtual std::string name() const = 0;
};

struct RateCard {
    double input_per_1k = 0.0;
    double output_per_1k = 0.0;
};

struct GatewayConfig {
    std::map<ModelTier, std::string> models{
        {ModelTier::Distill, "gpt-3.5-turbo"},
        {ModelTier::Synthesize, "gpt-4"},
        {ModelTier::Score, "gpt-3.5-turbo"},
        {ModelTier::Embed, "text-embedding-ada-002"},
        {ModelTier::GenerateSynthetic, "gpt-4"},
        {ModelTier::CoverageMatch, "gpt-3.5-turbo"},
    };
    /// Per-model token prices.
    std::map<std::string, RateCard> rates;
    std::size_t max_concurrency = 4;
    int max_attempts = 4;
    std::chrono::milliseconds initial_backoff{500};
    double backoff_multiplier = 2.0;
    std::size_t embed_batch_size = 100;
};

/// Append-only, thread-safe usage log.
class UsageLedger {
public:
    void append(UsageRecord r);
    std::vector<UsageRecord> snapshot() const;
    std::size_t size() const;

private:
    mutable std::mutex mu_;
    std::vector<UsageRecord> records_;
};

struct EmbedResult {
    std::vector<EmbeddingVector> vectors;
    /// One record per provider call.
    std::vector<UsageRecord> usage;
};

/// Uniform front door to a provider: tier -> model mapping, bounded
/// concurrency, retry with exponential backoff, usage accounting.
class Gateway {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    Gateway(std::shared_ptr<ChatBackend> backend, GatewayConfig config, Clock clock = system_clock());

    /// Throws TransportError once attempts are exhausted, ContentError (or
    /// ScriptError) immediately.
    CompletionResponse complete(const CompletionRequest& request);

    /// One vector per text, batched under embed_batch_size. `item_ids` may be
    /// empty, in which case ids are the text indices.
    EmbedResult embed(std::span<const std::string> texts, std::span<const std::string> item_ids = {},
                      Stage stage = Stage::Generation);

    const std::string& model_for(ModelTier tier) const;
    const GatewayConfig& config() const { return config_; }
    const UsageLedger& ledger() const { return ledger_; }
    ChatBackend& backend() { return *backend_; }
    const Clock& clock() const { return clock_; }

    void set_sleeper(Sleeper s) { sleeper_ = std::move(s); }

    /// Highest number of provider calls observed in flight at once.
    std::size_t peak_in_flight() const { return peak_in_flight_.load(); }

private:
    class Permit;
    void acquire();
    void release();
    double cost_of(const std::string& model, std::uint64_t in, std::uint64_t out) const;

    std::shared_ptr<ChatBackend> backend_;
    GatewayConfig config_;
    Clock clock_;
    Sleeper sleeper_;
    UsageLedger ledger_;

    std::mutex slots_mu_;
    std::condition_variable slots_cv_;
    std::size_t in_flight_ = 0;
    std::atomic<std::size_t> peak_in_flight_{0};
};

struct StageUsage {
    Stage stage;
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
    double cost = 0.0;
    double wall_time_s = 0.0;
    std::size_t calls = 0;
    /// Percent of total cost (of total tokens when every record costs 0).
    double cost_share_pct = 0.0;
    double time_share_pct = 0.0;
};

struct UsageReport {
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
    double cost = 0.0;
    double wall_time_s = 0.0;
    std::size_t calls = 0;
    std::vector<StageUsage> stages;
};

UsageReport usage_report(std::span<const UsageRecord> ledger);
json to_json(const UsageReport& r);

} // namespace lloom
