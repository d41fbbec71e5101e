#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "lloom/core/events.hpp"
#include "lloom/llm/gateway.hpp"
#include "lloom/llm/templates.hpp"

namespace lloom {

/// Called from worker threads; implementations must be thread-safe.
using ProgressFn = std::function<void(std::string_view stage, std::size_t done, std::size_t total)>;

/// Everything an operator needs besides the session itself.
struct EngineContext {
    Gateway& gateway;
    const TemplateSet& templates;
    Clock clock = system_clock();
    ProgressFn progress;
    /// Worker threads for per-document / per-batch fan-out. The gateway
    /// ceiling still bounds provider calls.
    std::size_t workers = 4;

    void report(std::string_view stage, std::size_t done, std::size_t total) const {
        if (progress) progress(stage, done, total);
    }
};

/// Renders `id`, sends it at `tier`, and appends an llm_call event (prompt,
/// raw response, attempts, usage) to `log`. On failure appends llm_error and
/// rethrows. `item` names what the call was about (doc id, cluster, ...).
CompletionResponse call_llm(EngineContext& ctx, TemplateId id, ModelTier tier, Stage stage,
                            const TemplateParams& params, double temperature, const json& item, EventLog& log);

/// Serializes {"example_id", "example_text"} records the way prompts expect.
json example_record(const std::string& id, const std::string& text);

/// Runs f(i) for i in [0, n) on up to `workers` threads. Results keep index
/// order. The first exception (by index) is rethrown after all tasks finish.
template <typename F>
auto parallel_map(std::size_t n, std::size_t workers, F&& f) -> std::vector<decltype(f(std::size_t{}))> {
    using R = decltype(f(std::size_t{}));
    std::vector<R> out(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto run = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const auto count = std::min(std::max<std::size_t>(workers, 1), n);
    if (count <= 1) {
        run();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(count);
        for (std::size_t t = 0; t < count; ++t) pool.emplace_back(run);
        for (auto& t : pool) t.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

} // namespace lloom
