#include <fstream>
#include <sstream>

#include "lloom/core/util.hpp"
#include "lloom/error.hpp"
#include "lloom/llm/backends.hpp"

namespace lloom {

namespace {

ScriptedBackend::Entry entry_from_json(const json& j, const std::string& template_id) {
    ScriptedBackend::Entry e;
    if (j.is_string()) {
        e.template_id = template_id;
        e.response = j.get<std::string>();
        return e;
    }
    if (!j.is_object()) throw DecodeError("script entry must be an object or string", 0, template_id);
    e.template_id = j.value("template", template_id);
    if (e.template_id.empty()) throw DecodeError("script entry without template", 0, "template");
    if (j.contains("prompt_hash")) e.prompt_hash = j["prompt_hash"].get<std::string>();
    if (j.contains("contains")) {
        if (j["contains"].is_string()) e.contains.push_back(j["contains"].get<std::string>());
        else e.contains = j["contains"].get<std::vector<std::string>>();
    }
    const auto& resp = j.at("response");
    e.response = resp.is_string() ? resp.get<std::string>() : resp.dump();
    e.transient_failures = j.value("transient_failures", 0);
    e.refusal = j.value("refusal", false);
    if (j.contains("input_tokens")) e.input_tokens = j["input_tokens"].get<std::uint64_t>();
    if (j.contains("output_tokens")) e.output_tokens = j["output_tokens"].get<std::uint64_t>();
    return e;
}

bool matches(const ScriptedBackend::Entry& e, const CompletionRequest& r, const std::string& hash) {
    if (e.template_id != r.template_id) return false;
    if (e.prompt_hash && *e.prompt_hash != hash) return false;
    for (const auto& needle : e.contains)
        if (r.prompt.find(needle) == std::string::npos) return false;
    return true;
}

} // namespace

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_json(const json& script) {
    auto b = std::make_shared<ScriptedBackend>();
    try {
        if (script.contains("completions"))
            for (const auto& e : script["completions"]) b->add(entry_from_json(e, ""));
        if (script.contains("fallback"))
            for (const auto& [tpl, list] : script["fallback"].items())
                for (const auto& e : list) b->add_fallback(tpl, entry_from_json(e, tpl));
        if (script.contains("embeddings"))
            for (const auto& [text, v] : script["embeddings"].items())
                b->set_embedding(text, v.get<std::vector<double>>());
    } catch (const json::exception& e) {
        throw DecodeError(std::string("malformed script: ") + e.what(), 0, "script");
    }
    return b;
}

std::shared_ptr<ScriptedBackend> ScriptedBackend::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw NotFoundError("cannot open script " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto text = ss.str();
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DecodeError(std::string("malformed script JSON: ") + e.what(), e.byte, path.string());
    }
    return from_json(j);
}

void ScriptedBackend::add(Entry e) {
    std::lock_guard lock(mu_);
    entries_.push_back(std::move(e));
    failures_thrown_.push_back(0);
}

void ScriptedBackend::add_fallback(const std::string& template_id, Entry e) {
    std::lock_guard lock(mu_);
    e.template_id = template_id;
    fallback_[template_id].push_back(std::move(e));
}

void ScriptedBackend::set_embedding(const std::string& text, std::vector<double> v) {
    std::lock_guard lock(mu_);
    embeddings_[text] = std::move(v);
}

std::uint64_t ScriptedBackend::estimate_tokens(std::string_view text) { return (text.size() + 3) / 4; }

BackendReply ScriptedBackend::reply_from(Entry& e, const CompletionRequest& request, std::size_t index) {
    if (index < failures_thrown_.size() && failures_thrown_[index] < e.transient_failures) {
        ++failures_thrown_[index];
        throw TransportError("scripted transient failure", 503);
    }
    if (e.refusal) throw ContentError("provider refused the request", e.response);
    BackendReply r;
    r.text = e.response;
    r.input_tokens = e.input_tokens.value_or(estimate_tokens(request.prompt));
    r.output_tokens = e.output_tokens.value_or(estimate_tokens(e.response));
    return r;
}

BackendReply ScriptedBackend::complete(const std::string&, const CompletionRequest& request) {
    ++calls_;
    const auto hash = stable_hash(request.prompt);
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (matches(entries_[i], request, hash)) return reply_from(entries_[i], request, i);
    auto it = fallback_.find(request.template_id);
    if (it != fallback_.end()) {
        auto& pos = fallback_pos_[request.template_id];
        if (pos < it->second.size()) {
            auto& e = it->second[pos++];
            if (e.transient_failures > 0) {
                --e.transient_failures;
                --pos;
                throw TransportError("scripted transient failure", 503);
            }
            return reply_from(e, request, static_cast<std::size_t>(-1));
        }
    }
    throw ScriptError("no scripted response for template '" + request.template_id + "' (prompt hash " + hash + ")");
}

EmbedReply ScriptedBackend::embed(const std::string&, std::span<const std::string> texts) {
    ++embed_calls_;
    std::lock_guard lock(mu_);
    EmbedReply r;
    for (const auto& t : texts) {
        const auto it = embeddings_.find(t);
        if (it == embeddings_.end()) throw ScriptError("no scripted embedding for text '" + t + "'");
        r.vectors.push_back(it->second);
        r.input_tokens += estimate_tokens(t);
    }
    return r;
}

} // namespace lloom
