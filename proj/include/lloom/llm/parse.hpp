#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lloom/core/types.hpp"

namespace lloom {

enum class PayloadSchema { RelevantQuotes, Bullets, Patterns, PatternResults, ConceptMatches, Paragraph };

std::string_view to_string(PayloadSchema s);
PayloadSchema payload_schema_from_string(std::string_view s);

/// Pulls the JSON object out of a model response: strips markdown fences and
/// surrounding prose, and drops trailing commas before `}` / `]`.
std::string extract_json_text(std::string_view raw);

/// Parses and validates a response against `schema`. Throws ParseError when
/// no JSON object can be read and SchemaError naming the offending key.
/// Returns the normalized payload (ids coerced to strings, optional keys
/// filled with defaults).
json parse_json_payload(std::string_view raw, PayloadSchema schema);

struct Pattern {
    std::string name;
    std::string prompt;
    std::vector<std::string> example_ids;
};

struct PatternResult {
    std::string example_id;
    std::string rationale;
    std::string answer;
};

struct ConceptMatch {
    std::string concept_id;
    std::optional<std::string> item_id; // nullopt for NONE
    std::string rationale;
};

struct ParagraphPayload {
    std::string paragraph;
    /// As returned: either one string or a list. Segmented by the caller.
    std::vector<std::string> seed_topic_sentences;
    bool seed_given_as_list = false;
};

std::vector<std::string> parse_quotes(std::string_view raw);
std::vector<std::string> parse_bullets(std::string_view raw);
std::vector<Pattern> parse_patterns(std::string_view raw);
std::vector<PatternResult> parse_pattern_results(std::string_view raw);
std::vector<ConceptMatch> parse_concept_matches(std::string_view raw);
ParagraphPayload parse_paragraph(std::string_view raw);

} // namespace lloom
