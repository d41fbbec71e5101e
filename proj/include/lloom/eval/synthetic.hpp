#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lloom/core/events.hpp"
#include "lloom/core/types.hpp"
#include "lloom/pipeline/engine.hpp"

namespace lloom {

/// Splits on '.', '!' or '?' followed by whitespace or end of text. A period
/// after a known abbreviation ("Dr.", "U.S.", "e.g.", ...) does not end a sentence.
std::vector<std::string> split_sentences(std::string_view text);

struct SyntheticSpec {
    std::size_t doc_length = 5;
    double concept_prevalence = 0.2;
    std::string seed_concept;
    std::size_t n_docs = 1;
};

/// Throws ValidationError unless doc_length is 5 or 10, prevalence is 0.2 or
/// 0.4, the seed concept is non-empty and prevalence x length is whole.
void validate(const SyntheticSpec& spec);
std::size_t seed_sentence_count(const SyntheticSpec& spec);

struct SyntheticDoc {
    std::string paragraph;
    std::vector<std::string> seed_sentences;
};

struct Verification {
    bool pass = true;
    /// Any of "sentence-count", "seed-count", "seed-not-verbatim".
    std::vector<std::string> reasons;
    std::size_t n_sentences = 0;
};

Verification verify_synthetic(const SyntheticDoc& doc, const SyntheticSpec& spec);

struct GeneratedDoc {
    SyntheticDoc doc;
    std::size_t attempts = 0;
};

/// Prompts for a paragraph until one verifies, at most `max_attempts` times.
/// Unparseable or rejected generations are logged; PipelineError when the cap runs out.
GeneratedDoc generate_synthetic_doc(EngineContext& ctx, const SyntheticSpec& spec, std::size_t max_attempts,
                                    double temperature, EventLog& log);

struct GenericConcept {
    std::string name;
    std::vector<std::string> specifics;
};
using ConceptHierarchy = std::vector<GenericConcept>;

/// The fixed 10 x 4 hierarchy used for the synthetic corpus.
const ConceptHierarchy& concept_hierarchy();
json to_json(const ConceptHierarchy& h);
/// Throws ValidationError when a Specific appears under two Generics.
ConceptHierarchy concept_hierarchy_from_json(const json& j);
/// Name of the Generic that owns `specific`, or empty.
std::string generic_of(const ConceptHierarchy& h, std::string_view specific);

} // namespace lloom
