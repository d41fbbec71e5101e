#include "lloom/pipeline/engine.hpp"

#include "lloom/core/session_io.hpp"
#include "lloom/error.hpp"

namespace lloom {

json example_record(const std::string& id, const std::string& text) {
    return json{{"example_id", id}, {"example_text", text}};
}

CompletionResponse call_llm(EngineContext& ctx, TemplateId id, ModelTier tier, Stage stage,
                            const TemplateParams& params, double temperature, const json& item, EventLog& log) {
    CompletionRequest req;
    req.tier = tier;
    req.stage = stage;
    req.template_id = std::string(to_string(id));
    req.prompt = ctx.templates.render(id, params);
    req.temperature = temperature;
    try {
        auto resp = ctx.gateway.complete(req);
        log.push_back({event_kind::kLlmCall,
                       {{"template", req.template_id},
                        {"item", item},
                        {"model", resp.model},
                        {"temperature", temperature},
                        {"prompt_hash", stable_hash(req.prompt)},
                        {"prompt", req.prompt},
                        {"response", resp.text},
                        {"attempts", resp.attempts},
                        {"usage", to_json(resp.usage)}}});
        return resp;
    } catch (const Error& e) {
        json data{{"template", req.template_id},
                  {"item", item},
                  {"temperature", temperature},
                  {"prompt_hash", stable_hash(req.prompt)},
                  {"prompt", req.prompt},
                  {"error", e.what()}};
        if (const auto* ce = dynamic_cast<const ContentError*>(&e)) data["response"] = ce->raw();
        log.push_back({"llm_error", std::move(data)});
        throw;
    }
}

} // namespace lloom
