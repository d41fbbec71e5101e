#include "lloom/llm/gateway.hpp"

#include <cmath>
#include <thread>

#include "lloom/error.hpp"

namespace lloom {

void UsageLedger::append(UsageRecord r) {
    std::lock_guard lock(mu_);
    records_.push_back(std::move(r));
}

std::vector<UsageRecord> UsageLedger::snapshot() const {
    std::lock_guard lock(mu_);
    return records_;
}

std::size_t UsageLedger::size() const {
    std::lock_guard lock(mu_);
    return records_.size();
}

class Gateway::Permit {
public:
    explicit Permit(Gateway& g) : g_(g) { g_.acquire(); }
    ~Permit() { g_.release(); }
    Permit(const Permit&) = delete;
    Permit& operator=(const Permit&) = delete;

private:
    Gateway& g_;
};

Gateway::Gateway(std::shared_ptr<ChatBackend> backend, GatewayConfig config, Clock clock)
    : backend_(std::move(backend)), config_(std::move(config)), clock_(std::move(clock)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
    if (!backend_) throw ConfigError("gateway requires a backend");
    if (config_.max_concurrency == 0) config_.max_concurrency = 1;
    if (config_.max_attempts < 1) config_.max_attempts = 1;
    if (config_.embed_batch_size == 0) config_.embed_batch_size = 1;
}

void Gateway::acquire() {
    std::unique_lock lock(slots_mu_);
    slots_cv_.wait(lock, [&] { return in_flight_ < config_.max_concurrency; });
    ++in_flight_;
    auto peak = peak_in_flight_.load();
    while (in_flight_ > peak && !peak_in_flight_.compare_exchange_weak(peak, in_flight_)) {
    }
}

void Gateway::release() {
    {
        std::lock_guard lock(slots_mu_);
        --in_flight_;
    }
    slots_cv_.notify_one();
}

const std::string& Gateway::model_for(ModelTier tier) const {
    const auto it = config_.models.find(tier);
    if (it == config_.models.end() || it->second.empty())
        throw ConfigError("no model configured for tier '" + std::string(to_string(tier)) + "'");
    return it->second;
}

double Gateway::cost_of(const std::string& model, std::uint64_t in, std::uint64_t out) const {
    const auto it = config_.rates.find(model);
    if (it == config_.rates.end()) return 0.0;
    return static_cast<double>(in) / 1000.0 * it->second.input_per_1k +
           static_cast<double>(out) / 1000.0 * it->second.output_per_1k;
}

namespace {

template <typename F>
auto with_retries(int max_attempts, std::chrono::milliseconds initial, double multiplier,
                  const Gateway::Sleeper& sleep, int& attempts, F&& call) {
    auto delay = initial;
    for (attempts = 1;; ++attempts) {
        try {
            return call();
        } catch (const TransportError& e) {
            if (attempts >= max_attempts)
                throw TransportError("giving up after " + std::to_string(attempts) + " attempts: " + e.what(),
                                     e.status());
            sleep(delay);
            delay = std::chrono::milliseconds(
                static_cast<long long>(std::llround(static_cast<double>(delay.count()) * multiplier)));
        }
    }
}

double seconds_between(std::chrono::system_clock::time_point a, std::chrono::system_clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

} // namespace

CompletionResponse Gateway::complete(const CompletionRequest& request) {
    const auto& model = model_for(request.tier);
    const auto started = clock_();
    int attempts = 0;
    auto reply = with_retries(config_.max_attempts, config_.initial_backoff, config_.backoff_multiplier, sleeper_,
                              attempts, [&] {
                                  Permit permit(*this);
                                  return backend_->complete(model, request);
                              });
    CompletionResponse resp;
    resp.text = std::move(reply.text);
    resp.attempts = attempts;
    resp.model = model;
    resp.usage.tier = request.tier;
    resp.usage.stage = request.stage;
    resp.usage.model = model;
    resp.usage.input_tokens = reply.input_tokens;
    resp.usage.output_tokens = reply.output_tokens;
    resp.usage.cost = cost_of(model, reply.input_tokens, reply.output_tokens);
    resp.usage.wall_time_s = seconds_between(started, clock_());
    ledger_.append(resp.usage);
    return resp;
}

EmbedResult Gateway::embed(std::span<const std::string> texts, std::span<const std::string> item_ids, Stage stage) {
    if (texts.empty()) throw PreconditionError("embed requires at least one text");
    if (!item_ids.empty() && item_ids.size() != texts.size())
        throw PreconditionError("embed: item_ids and texts differ in length");
    const auto& model = model_for(ModelTier::Embed);
    EmbedResult result;
    std::size_t dim = 0;
    for (std::size_t begin = 0; begin < texts.size(); begin += config_.embed_batch_size) {
        const auto count = std::min(config_.embed_batch_size, texts.size() - begin);
        const auto batch = texts.subspan(begin, count);
        const auto started = clock_();
        int attempts = 0;
        auto reply = with_retries(config_.max_attempts, config_.initial_backoff, config_.backoff_multiplier,
                                  sleeper_, attempts, [&] {
                                      Permit permit(*this);
                                      return backend_->embed(model, batch);
                                  });
        if (reply.vectors.size() != count)
            throw Error("embedding provider returned " + std::to_string(reply.vectors.size()) + " vectors for " +
                        std::to_string(count) + " texts");
        for (std::size_t i = 0; i < count; ++i) {
            auto& v = reply.vectors[i];
            if (dim == 0) dim = v.size();
            if (v.size() != dim || dim < 2)
                throw Error("embedding dimension mismatch: expected " + std::to_string(dim) + ", got " +
                            std::to_string(v.size()));
            const auto idx = begin + i;
            result.vectors.push_back(
                {item_ids.empty() ? std::to_string(idx) : std::string(item_ids[idx]), std::move(v)});
        }
        UsageRecord u;
        u.tier = ModelTier::Embed;
        u.stage = stage;
        u.model = model;
        u.input_tokens = reply.input_tokens;
        u.cost = cost_of(model, reply.input_tokens, 0);
        u.wall_time_s = seconds_between(started, clock_());
        ledger_.append(u);
        result.usage.push_back(u);
    }
    return result;
}

} // namespace lloom
