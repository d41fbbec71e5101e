#include "lloom/llm/parse.hpp"

#include <array>
#include <cctype>

#include "lloom/core/util.hpp"
#include "lloom/error.hpp"

namespace lloom {

namespace {

constexpr std::array<std::pair<PayloadSchema, std::string_view>, 6> kSchemas{{
    {PayloadSchema::RelevantQuotes, "relevant_quotes"},
    {PayloadSchema::Bullets, "bullets"},
    {PayloadSchema::Patterns, "patterns"},
    {PayloadSchema::PatternResults, "pattern_results"},
    {PayloadSchema::ConceptMatches, "concept_matches"},
    {PayloadSchema::Paragraph, "paragraph"},
}};

std::string strip_trailing_commas(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            out += c;
            if (c == '\\' && i + 1 < s.size()) out += s[++i];
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == ',') {
            std::size_t j = i + 1;
            while (j < s.size() && std::isspace(static_cast<unsigned char>(s[j]))) ++j;
            if (j < s.size() && (s[j] == '}' || s[j] == ']')) continue;
        }
        out += c;
    }
    return out;
}

// Position of the brace closing the object opened at `open`, or npos.
std::size_t matching_brace(std::string_view s, std::size_t open) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < s.size(); ++i) {
        const char c = s[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
        } else if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return i;
        }
    }
    return std::string_view::npos;
}

std::string as_id(const json& v, const std::string& key, std::string_view raw) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw SchemaError(key, "expected string id", std::string(raw));
}

const json& require(const json& obj, const std::string& key, std::string_view raw) {
    if (!obj.is_object()) throw SchemaError(key, "expected object", std::string(raw));
    const auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(key, "missing required key", std::string(raw));
    return *it;
}

std::string require_string(const json& obj, const std::string& key, std::string_view raw) {
    const auto& v = require(obj, key, raw);
    if (!v.is_string()) throw SchemaError(key, "expected string", std::string(raw));
    return v.get<std::string>();
}

json string_list(const json& obj, const std::string& key, std::string_view raw) {
    const auto& v = require(obj, key, raw);
    if (!v.is_array()) throw SchemaError(key, "expected list", std::string(raw));
    json out = json::array();
    for (const auto& item : v) {
        if (!item.is_string()) throw SchemaError(key, "expected list of strings", std::string(raw));
        out.push_back(item);
    }
    return out;
}

json normalize(const json& doc, PayloadSchema schema, std::string_view raw) {
    switch (schema) {
    case PayloadSchema::RelevantQuotes: return {{"relevant_quotes", string_list(doc, "relevant_quotes", raw)}};
    case PayloadSchema::Bullets: return {{"bullets", string_list(doc, "bullets", raw)}};
    case PayloadSchema::Patterns: {
        const auto& arr = require(doc, "patterns", raw);
        if (!arr.is_array()) throw SchemaError("patterns", "expected list", std::string(raw));
        json out = json::array();
        for (const auto& p : arr) {
            json ids = json::array();
            if (p.is_object() && p.contains("example_ids") && !p["example_ids"].is_null()) {
                if (!p["example_ids"].is_array()) throw SchemaError("example_ids", "expected list", std::string(raw));
                for (const auto& id : p["example_ids"]) ids.push_back(as_id(id, "example_ids", raw));
            }
            out.push_back({{"name", require_string(p, "name", raw)},
                           {"prompt", require_string(p, "prompt", raw)},
                           {"example_ids", std::move(ids)}});
        }
        return {{"patterns", std::move(out)}};
    }
    case PayloadSchema::PatternResults: {
        const auto& arr = require(doc, "pattern_results", raw);
        if (!arr.is_array()) throw SchemaError("pattern_results", "expected list", std::string(raw));
        json out = json::array();
        for (const auto& r : arr) {
            const auto& id = require(r, "example_id", raw);
            std::string rationale;
            if (r.contains("rationale") && r["rationale"].is_string()) rationale = r["rationale"].get<std::string>();
            out.push_back({{"example_id", as_id(id, "example_id", raw)},
                           {"rationale", rationale},
                           {"answer", require_string(r, "answer", raw)}});
        }
        return {{"pattern_results", std::move(out)}};
    }
    case PayloadSchema::ConceptMatches: {
        const auto& arr = require(doc, "concept_matches", raw);
        if (!arr.is_array()) throw SchemaError("concept_matches", "expected list", std::string(raw));
        json out = json::array();
        for (const auto& m : arr) {
            const auto concept_id = as_id(require(m, "concept_id", raw), "concept_id", raw);
            json item = nullptr;
            if (m.contains("item_id") && !m["item_id"].is_null()) {
                auto id = as_id(m["item_id"], "item_id", raw);
                auto t = std::string(trim(id));
                for (auto& ch : t) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
                if (t != "NONE" && !t.empty()) item = id;
            }
            std::string rationale;
            if (m.contains("rationale") && m["rationale"].is_string()) rationale = m["rationale"].get<std::string>();
            out.push_back({{"concept_id", concept_id}, {"item_id", item}, {"rationale", rationale}});
        }
        return {{"concept_matches", std::move(out)}};
    }
    case PayloadSchema::Paragraph: {
        const auto paragraph = require_string(doc, "paragraph", raw);
        const auto& seeds = require(doc, "seed_topic_sentences", raw);
        if (seeds.is_string()) return {{"paragraph", paragraph}, {"seed_topic_sentences", seeds}};
        return {{"paragraph", paragraph}, {"seed_topic_sentences", string_list(doc, "seed_topic_sentences", raw)}};
    }
    }
    throw SchemaError("?", "unknown schema", std::string(raw));
}

} // namespace

std::string_view to_string(PayloadSchema s) {
    for (const auto& [v, n] : kSchemas)
        if (v == s) return n;
    return "?";
}

PayloadSchema payload_schema_from_string(std::string_view s) {
    for (const auto& [v, n] : kSchemas)
        if (n == s) return v;
    throw ValidationError("unknown payload schema '" + std::string(s) + "'");
}

std::string extract_json_text(std::string_view raw) {
    std::string_view body = raw;
    // Prefer the contents of a ``` fence when present.
    if (const auto fence = body.find("```"); fence != std::string_view::npos) {
        auto start = body.find('\n', fence);
        const auto end = start == std::string_view::npos ? std::string_view::npos : body.find("```", start);
        if (start != std::string_view::npos && end != std::string_view::npos) body = body.substr(start + 1, end - start - 1);
    }
    const auto open = body.find('{');
    if (open == std::string_view::npos) return {};
    const auto close = matching_brace(body, open);
    if (close == std::string_view::npos) return strip_trailing_commas(body.substr(open));
    return strip_trailing_commas(body.substr(open, close - open + 1));
}

json parse_json_payload(std::string_view raw, PayloadSchema schema) {
    const auto text = extract_json_text(raw);
    if (text.empty()) throw ParseError("no JSON object found in response", std::string(raw));
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("unparseable JSON in response: ") + e.what(), std::string(raw));
    }
    return normalize(doc, schema, raw);
}

std::vector<std::string> parse_quotes(std::string_view raw) {
    return parse_json_payload(raw, PayloadSchema::RelevantQuotes)["relevant_quotes"].get<std::vector<std::string>>();
}

std::vector<std::string> parse_bullets(std::string_view raw) {
    return parse_json_payload(raw, PayloadSchema::Bullets)["bullets"].get<std::vector<std::string>>();
}

std::vector<Pattern> parse_patterns(std::string_view raw) {
    std::vector<Pattern> out;
    const auto payload = parse_json_payload(raw, PayloadSchema::Patterns);
    for (const auto& p : payload["patterns"])
        out.push_back({p["name"], p["prompt"], p["example_ids"].get<std::vector<std::string>>()});
    return out;
}

std::vector<PatternResult> parse_pattern_results(std::string_view raw) {
    std::vector<PatternResult> out;
    const auto payload = parse_json_payload(raw, PayloadSchema::PatternResults);
    for (const auto& r : payload["pattern_results"])
        out.push_back({r["example_id"], r["rationale"], r["answer"]});
    return out;
}

std::vector<ConceptMatch> parse_concept_matches(std::string_view raw) {
    std::vector<ConceptMatch> out;
    const auto payload = parse_json_payload(raw, PayloadSchema::ConceptMatches);
    for (const auto& m : payload["concept_matches"]) {
        ConceptMatch cm{m["concept_id"], std::nullopt, m["rationale"]};
        if (!m["item_id"].is_null()) cm.item_id = m["item_id"].get<std::string>();
        out.push_back(std::move(cm));
    }
    return out;
}

ParagraphPayload parse_paragraph(std::string_view raw) {
    const auto j = parse_json_payload(raw, PayloadSchema::Paragraph);
    ParagraphPayload p;
    p.paragraph = j["paragraph"];
    const auto& seeds = j["seed_topic_sentences"];
    if (seeds.is_string()) {
        p.seed_topic_sentences.push_back(seeds.get<std::string>());
    } else {
        p.seed_given_as_list = true;
        p.seed_topic_sentences = seeds.get<std::vector<std::string>>();
    }
    return p;
}

} // namespace lloom
