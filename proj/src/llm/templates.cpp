#include "lloom/llm/templates.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include "lloom/error.hpp"

namespace lloom {

namespace {

// Prompt bodies. filter/summarize/synthesize/score/coverage_match and
// synthetic_gen are the published operator prompts; merge and split are
// written in the same style (JSON-only answer with name + prompt fields).

const std::string kFilter = R"TPL(I have the following TEXT EXAMPLE:
{text_example_json}

Please extract {n_quotes} QUOTES exactly copied from this EXAMPLE {seed_phrase}. 
Please respond ONLY with a valid JSON in the following format:
{{
    "relevant_quotes": [ "<QUOTE_1>", "<QUOTE_2>", ... ]
}}
)TPL";

const std::string kSummarize = R"TPL(I have the following TEXT EXAMPLE:
{text_example_json}

Please summarize the main point of this EXAMPLE {seed_phrase} into 
{n_bullets} bullet points, where each bullet point is a {n_words} word phrase. 
Please respond ONLY with a valid JSON in the following format:
{{
    "bullets": [ "<BULLET_1>", "<BULLET_2>", ... ]
}}
)TPL";

const std::string kSynthesize = R"TPL(I have this set of bullet point summaries of text examples:
{bullets_json}

Please write a summary of {n_concepts} unifying patterns for these examples {seed_phrase}.
For each high-level pattern, write a {n_name_words} word NAME for the pattern 
and an associated 1-sentence ChatGPT PROMPT that could take in a new text example 
and determine whether the relevant pattern applies. 
Please also include {n_example_ids} example_ids for items that BEST exemplify the pattern. 
Please respond ONLY with a valid JSON in the following format:
{{
    "patterns": [ 
        {{
            "name": "<PATTERN_NAME_1>", 
            "prompt": "<PATTERN_PROMPT_1>", 
            "example_ids": ["<EXAMPLE_ID_1>", "<EXAMPLE_ID_2>"]
        }},
        {{
            "name": "<PATTERN_NAME_2>", 
            "prompt": "<PATTERN_PROMPT_2>", 
            "example_ids": ["<EXAMPLE_ID_1>", "<EXAMPLE_ID_2>"]
        }},
    ]
}}
)TPL";

const std::string kScore = R"TPL(CONTEXT: 
    I have the following text examples in a JSON:
    {examples_json}

    I also have a pattern named {concept_name} with the following PROMPT: 
    {concept_prompt}

TASK:
    For each example, please evaluate the PROMPT by generating RATIONALE of your thought process
    and providing a resulting ANSWER of ONE of the following multiple-choice options, including just the letter: 
    - A: Strongly agree
    - B: Agree
    - C: Neither agree nor disagree
    - D: Disagree
    - E: Strongly disagree
    Respond with ONLY a JSON with the following format, escaping any quotes within strings with a backslash:
    {{
        "pattern_results": [
            {{
                "example_id": "<example_id>",
                "rationale": "<rationale>",
                "answer": "<answer>",
            }}
        ]
    }}
)TPL";

const std::string kCoverageMatch = R"TPL(I have this set of CONCEPTS:
{ground_truth_concepts}

I have this set of TEXTS: 
{generated_concepts}

Please match at most ONE TEXT to each CONCEPT. To perform a match, the text must 
EXACTLY match the meaning of the concept. 
Do NOT match the same TEXT to multiple CONCEPTS.

Here are examples of VALID matches:
- Global Diplomacy, International Relations; 
rationale: "The text is about diplomacy between countries."
- Statistical Data, Quantitative Evidence; 
rationale: "The text is about data and quantitative measures."
- Policy and Regulation, Policy issues and legislation; 
rationale: "The text is about policy, laws, and legislation."

Here are examples of INVALID matches:
- Reputation Impact, Immigration
- Environment, Politics and Law
- Interdisciplinary Politics, Economy

If there are no valid matches, please EXCLUDE the concept from the list. 
Please provide a 1-sentence RATIONALE for your decision for any matches. 
Please respond with a list of each concept and either the item it matches or NONE 
if no item matches in this format:
{{
    "concept_matches": [
        {{
            "concept_id": "<concept_id_number>",
            "item_id": "<item_id_number or NONE>",
            "rationale": "<rationale for match>",
        }}
    ]
}}
)TPL";

const std::string kSyntheticGen = R"TPL(Write a {doc_length}-sentence paragraph about 
'politics'.
In {n_seed_sentences} sentences of the paragraph, include content related to a SEED TOPIC '{low_level_concept}'. 
Please only return a JSON with this format:
{{
    "paragraph": "<PARAGRAPH>",
    "seed_topic_sentences": "<The sentences from PARAGRAPH related to SEED TOPIC>"
}}
)TPL";

const std::string kMerge = R"TPL(I have this set of PATTERNS, each with a NAME and a PROMPT:
{concepts_json}

Please write ONE high-level pattern that combines all of these patterns {seed_phrase}.
Write a {n_name_words} word NAME for the combined pattern 
and an associated 1-sentence ChatGPT PROMPT that could take in a new text example 
and determine whether the combined pattern applies. 
Please respond ONLY with a valid JSON in the following format:
{{
    "patterns": [ 
        {{
            "name": "<PATTERN_NAME>", 
            "prompt": "<PATTERN_PROMPT>"
        }}
    ]
}}
)TPL";

const std::string kSplit = R"TPL(I have this PATTERN with a NAME and a PROMPT:
{concept_json}

The pattern is too general. Please split it into {n_concepts} more specific sub-patterns {seed_phrase}.
For each sub-pattern, write a {n_name_words} word NAME 
and an associated 1-sentence ChatGPT PROMPT that could take in a new text example 
and determine whether the sub-pattern applies. 
Please respond ONLY with a valid JSON in the following format:
{{
    "patterns": [ 
        {{
            "name": "<PATTERN_NAME_1>", 
            "prompt": "<PATTERN_PROMPT_1>"
        }},
        {{
            "name": "<PATTERN_NAME_2>", 
            "prompt": "<PATTERN_PROMPT_2>"
        }}
    ]
}}
)TPL";

constexpr std::array<std::pair<TemplateId, std::string_view>, 8> kNames{{
    {TemplateId::Filter, "filter"},
    {TemplateId::Summarize, "summarize"},
    {TemplateId::Synthesize, "synthesize"},
    {TemplateId::Score, "score"},
    {TemplateId::CoverageMatch, "coverage_match"},
    {TemplateId::SyntheticGen, "synthetic_gen"},
    {TemplateId::Merge, "merge"},
    {TemplateId::Split, "split"},
}};

// Splits a body into literal text and placeholder names.
struct Piece {
    bool placeholder;
    std::string text;
};

std::vector<Piece> tokenize(std::string_view body) {
    std::vector<Piece> out;
    std::string literal;
    for (std::size_t i = 0; i < body.size(); ++i) {
        const char c = body[i];
        if (c == '{') {
            if (i + 1 < body.size() && body[i + 1] == '{') {
                literal += '{';
                ++i;
                continue;
            }
            const auto close = body.find('}', i + 1);
            if (close == std::string_view::npos) throw TemplateError("unterminated placeholder in template");
            if (!literal.empty()) out.push_back({false, std::move(literal)});
            literal.clear();
            out.push_back({true, std::string(body.substr(i + 1, close - i - 1))});
            i = close;
        } else if (c == '}') {
            if (i + 1 < body.size() && body[i + 1] == '}') ++i;
            literal += '}';
        } else {
            literal += c;
        }
    }
    if (!literal.empty()) out.push_back({false, std::move(literal)});
    return out;
}

} // namespace

std::string_view to_string(TemplateId id) {
    for (const auto& [v, n] : kNames)
        if (v == id) return n;
    return "?";
}

TemplateId template_id_from_string(std::string_view s) {
    for (const auto& [v, n] : kNames)
        if (n == s) return v;
    throw TemplateError("unknown template id '" + std::string(s) + "'");
}

const std::vector<TemplateId>& all_template_ids() {
    static const std::vector<TemplateId> ids = [] {
        std::vector<TemplateId> v;
        for (const auto& [id, n] : kNames) v.push_back(id);
        return v;
    }();
    return ids;
}

const std::string& default_template(TemplateId id) {
    switch (id) {
    case TemplateId::Filter: return kFilter;
    case TemplateId::Summarize: return kSummarize;
    case TemplateId::Synthesize: return kSynthesize;
    case TemplateId::Score: return kScore;
    case TemplateId::CoverageMatch: return kCoverageMatch;
    case TemplateId::SyntheticGen: return kSyntheticGen;
    case TemplateId::Merge: return kMerge;
    case TemplateId::Split: return kSplit;
    }
    throw TemplateError("unknown template id");
}

std::vector<std::string> placeholders(std::string_view body) {
    std::vector<std::string> out;
    for (auto& p : tokenize(body))
        if (p.placeholder && std::find(out.begin(), out.end(), p.text) == out.end()) out.push_back(p.text);
    return out;
}

std::vector<std::string> fixed_segments(std::string_view body) {
    std::vector<std::string> out;
    for (auto& p : tokenize(body))
        if (!p.placeholder) out.push_back(std::move(p.text));
    return out;
}

std::string seed_phrase(const std::optional<std::string>& seed_term) {
    if (!seed_term || seed_term->empty()) return {};
    return "related to " + *seed_term;
}

std::string render_template(std::string_view body, const TemplateParams& params) {
    std::string out;
    out.reserve(body.size() * 2);
    for (const auto& p : tokenize(body)) {
        if (!p.placeholder) {
            out += p.text;
            continue;
        }
        if (const auto it = params.find(p.text); it != params.end()) {
            out += it->second;
        } else if (p.text == "seed_phrase") {
            const auto seed = params.find("seed_term");
            out += seed_phrase(seed == params.end() ? std::nullopt : std::optional<std::string>(seed->second));
        } else if (p.text == "n_quotes") {
            // Left empty so the model picks how many quotes to extract.
        } else {
            throw TemplateError("missing placeholder " + p.text);
        }
    }
    return out;
}

TemplateSet TemplateSet::from_directory(const std::filesystem::path& dir) {
    TemplateSet set;
    for (const auto id : all_template_ids()) {
        const auto file = dir / (std::string(to_string(id)) + ".txt");
        if (!std::filesystem::exists(file)) continue;
        std::ifstream in(file, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        set.set_override(id, ss.str());
    }
    return set;
}

void TemplateSet::set_override(TemplateId id, std::string body) {
    tokenize(body); // reject malformed bodies up front
    overrides_[id] = std::move(body);
}

const std::string& TemplateSet::body(TemplateId id) const {
    const auto it = overrides_.find(id);
    return it == overrides_.end() ? default_template(id) : it->second;
}

std::string TemplateSet::render(TemplateId id, const TemplateParams& params) const {
    return render_template(body(id), params);
}

std::string render_prompt(TemplateId id, const TemplateParams& params) {
    return render_template(default_template(id), params);
}

} // namespace lloom
