#include <map>

#include "lloom/llm/gateway.hpp"

namespace lloom {

UsageReport usage_report(std::span<const UsageRecord> ledger) {
    UsageReport r;
    std::map<Stage, StageUsage> by_stage;
    for (const auto& u : ledger) {
        auto& s = by_stage.try_emplace(u.stage, StageUsage{u.stage}).first->second;
        s.input_tokens += u.input_tokens;
        s.output_tokens += u.output_tokens;
        s.cost += u.cost;
        s.wall_time_s += u.wall_time_s;
        ++s.calls;
        r.input_tokens += u.input_tokens;
        r.output_tokens += u.output_tokens;
        r.cost += u.cost;
        r.wall_time_s += u.wall_time_s;
        ++r.calls;
    }
    const double total_tokens = static_cast<double>(r.input_tokens + r.output_tokens);
    for (auto& [stage, s] : by_stage) {
        if (r.cost > 0.0) s.cost_share_pct = 100.0 * s.cost / r.cost;
        else if (total_tokens > 0.0)
            s.cost_share_pct = 100.0 * static_cast<double>(s.input_tokens + s.output_tokens) / total_tokens;
        if (r.wall_time_s > 0.0) s.time_share_pct = 100.0 * s.wall_time_s / r.wall_time_s;
        r.stages.push_back(s);
    }
    return r;
}

json to_json(const UsageReport& r) {
    json stages = json::array();
    for (const auto& s : r.stages)
        stages.push_back({{"stage", to_string(s.stage)},
                          {"input_tokens", s.input_tokens},
                          {"output_tokens", s.output_tokens},
                          {"cost", s.cost},
                          {"wall_time_s", s.wall_time_s},
                          {"calls", s.calls},
                          {"cost_share_pct", s.cost_share_pct},
                          {"time_share_pct", s.time_share_pct}});
    return {{"input_tokens", r.input_tokens}, {"output_tokens", r.output_tokens}, {"cost", r.cost},
            {"wall_time_s", r.wall_time_s},   {"calls", r.calls},                 {"stages", std::move(stages)}};
}

} // namespace lloom
