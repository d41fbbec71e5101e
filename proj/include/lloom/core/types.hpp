#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace lloom {

using json = nlohmann::json;

/// Metadata cell. Nested values are rejected at ingest.
using Scalar = std::variant<std::string, double, bool>;

enum class ColumnType { String, Number, Boolean };

std::string_view to_string(ColumnType t);
ColumnType column_type_from_string(std::string_view s);

struct Document {
    std::string id;
    std::string text;
    std::map<std::string, Scalar> metadata;

    bool operator==(const Document&) const = default;
};

/// Verbatim excerpt of a document produced by the Filter step.
struct Quote {
    std::string doc_id;
    std::string text;

    bool operator==(const Quote&) const = default;
};

/// Distilled summary point. Detached from its document for clustering but
/// always traceable to exactly one source.
struct Bullet {
    std::string id;
    std::string doc_id;
    std::string text;
    int iteration = 0;

    bool operator==(const Bullet&) const = default;
};

struct EmbeddingVector {
    std::string item_id;
    std::vector<double> values;

    bool operator==(const EmbeddingVector&) const = default;
};

inline constexpr int kNoise = -1;

struct ClusterAssignment {
    std::string bullet_id;
    int cluster_id = kNoise;
    double membership = 0.0;

    bool operator==(const ClusterAssignment&) const = default;
};

/// One clustering pass (one per loop iteration).
struct ClusterRun {
    int iteration = 0;
    std::size_t min_cluster_size = 2;
    std::vector<ClusterAssignment> assignments;

    bool operator==(const ClusterRun&) const = default;
};

enum class ConceptOrigin { Synthesized, UserAuthored, Merged, Split };

std::string_view to_string(ConceptOrigin o);
ConceptOrigin concept_origin_from_string(std::string_view s);

struct Concept {
    std::string id;
    std::string name;
    std::string criteria_prompt;
    /// Bullet ids cited by the synthesizer.
    std::vector<std::string> representative_example_ids;
    /// Documents those bullets came from.
    std::vector<std::string> representative_doc_ids;
    /// Parents for merged/split concepts.
    std::vector<std::string> subconcept_ids;
    int generation = 0;
    ConceptOrigin origin = ConceptOrigin::Synthesized;
    bool active = true;
    /// Set by the Loop operator when the concept matched >= generic_fraction of docs.
    bool generic = false;
    std::optional<int> source_cluster;

    bool operator==(const Concept&) const = default;
};

enum class Answer { A, B, C, D, E };

std::string_view to_string(Answer a);

struct ScoreEntry {
    std::string doc_id;
    std::string concept_id;
    Answer answer = Answer::C;
    double score = 0.5;
    std::string rationale;
    bool label = false;
    std::optional<std::string> error;

    bool operator==(const ScoreEntry&) const = default;
};

/// Dense documents x concepts matrix, stored column-wise. Columns of
/// deactivated concepts are retained for provenance.
struct ScoreMatrix {
    std::vector<std::string> doc_ids;
    std::vector<std::string> concept_ids;
    std::vector<std::vector<ScoreEntry>> columns;

    std::optional<std::size_t> column_index(std::string_view concept_id) const;
    const std::vector<ScoreEntry>* column(std::string_view concept_id) const;
    /// Inserts or replaces a column. Entries must follow doc_ids order.
    void set_column(const std::string& concept_id, std::vector<ScoreEntry> entries);

    bool operator==(const ScoreMatrix&) const = default;
};

struct Slice {
    std::string name;
    std::string predicate;

    bool operator==(const Slice&) const = default;
};

struct SessionConfig {
    std::size_t sample_size = 200;
    std::size_t max_concepts = 20;
    std::optional<std::string> n_quotes;
    std::string n_bullets = "2-4";
    std::string n_words = "5-8";
    std::string n_name_words = "2-4";
    std::string n_example_ids = "1-2";
    std::optional<std::size_t> n_concepts_per_cluster;
    std::optional<std::string> seed_term;
    double score_threshold = 1.0;
    double generic_fraction = 0.5;
    std::optional<std::size_t> min_cluster_size;
    std::optional<std::size_t> min_samples;
    std::size_t score_batch_size = 5;
    std::size_t filter_min_chars = 350;
    std::size_t n_loops = 1;
    std::uint64_t rng_seed = 0;
    double temperature = 0.0;

    bool operator==(const SessionConfig&) const = default;
};

enum class ModelTier { Distill, Synthesize, Score, Embed, GenerateSynthetic, CoverageMatch };
enum class Stage { Generation, Scoring, Eval };

std::string_view to_string(ModelTier t);
ModelTier model_tier_from_string(std::string_view s);
std::string_view to_string(Stage s);
Stage stage_from_string(std::string_view s);

struct UsageRecord {
    ModelTier tier = ModelTier::Distill;
    Stage stage = Stage::Generation;
    std::string model;
    std::uint64_t input_tokens = 0;
    std::uint64_t output_tokens = 0;
    double cost = 0.0;
    double wall_time_s = 0.0;

    bool operator==(const UsageRecord&) const = default;
};

/// One append-only audit record. `kind` decides whether replay changes state.
struct TraceEntry {
    std::uint64_t seq = 0;
    std::string timestamp;
    std::string kind;
    json data;

    bool operator==(const TraceEntry&) const = default;
};

inline constexpr std::string_view kSessionSchema = "lloom-session/1";

struct Session {
    std::string schema_version{kSessionSchema};
    std::string id;
    std::vector<Document> documents;
    std::map<std::string, ColumnType> columns;
    SessionConfig config;
    std::vector<Quote> quotes;
    std::vector<Bullet> bullets;
    std::vector<ClusterRun> clusterings;
    std::vector<Concept> concepts;
    ScoreMatrix matrix;
    std::vector<Slice> slices;
    std::vector<UsageRecord> usage;
    std::vector<TraceEntry> trace;

    const Document* find_document(std::string_view id) const;
    const Concept* find_concept(std::string_view id) const;
    Concept* find_concept(std::string_view id);
    const Bullet* find_bullet(std::string_view id) const;
    std::vector<const Concept*> active_concepts() const;

    bool operator==(const Session&) const = default;
};

} // namespace lloom
