#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lloom/core/types.hpp"
#include "lloom/pipeline/engine.hpp"

namespace lloom {

/// min(cap, n) document ids drawn uniformly without replacement; returned in
/// session order. Same seed, same sample.
std::vector<std::string> sample_documents(std::span<const Document> docs, std::size_t cap, std::uint64_t rng_seed);

/// True when the Filter step runs for this text.
bool filter_applies(const Document& doc, const SessionConfig& config);

/// Extracts verbatim quotes. Quotes that do not occur in the document are
/// dropped with a "quote_dropped" warning in `log`. Skipped (with a
/// "filter_skipped" note and no LLM call) when filter_applies is false.
std::vector<Quote> distill_filter(EngineContext& ctx, const Document& doc, const SessionConfig& config,
                                  EventLog& log);

/// Summarizes `source_text` into bullets tagged with `doc_id`. Empty bullets
/// are dropped. Bullet ids are "i<iteration>-<doc_id>-<k>".
std::vector<Bullet> distill_summarize(EngineContext& ctx, const std::string& doc_id, const std::string& source_text,
                                      const SessionConfig& config, int iteration, EventLog& log);

/// Proposes concepts for one cluster. example_ids outside the cluster are
/// dropped with a warning.
std::vector<Concept> synthesize_cluster(EngineContext& ctx, int cluster_id,
                                        std::span<const Bullet> bullets, std::size_t n_concepts,
                                        const SessionConfig& config, int iteration, EventLog& log);

/// ceil(cap / clusters) bounded to [1, 5].
std::size_t concepts_per_cluster(std::size_t max_concepts, std::size_t n_clusters);

struct ClusterSummary {
    int cluster_id = 0;
    std::vector<std::string> bullet_ids;
    std::vector<std::string> concept_ids;
};

struct GenerationTrace {
    int iteration = 0;
    std::vector<std::string> input_doc_ids;
    std::vector<std::string> failed_doc_ids;
    std::vector<std::string> bullet_ids;
    std::vector<ClusterSummary> clusters;
    std::vector<std::string> capped_concept_ids;
    bool no_clusters = false;
};

struct GenerationResult {
    std::vector<Concept> concepts;
    GenerationTrace trace;
};

/// One Distill -> Cluster -> Synthesize pass over `inputs`, committed to the
/// session trace in (stage, item) order. Throws PipelineError when every
/// document fails distillation.
GenerationResult run_generation(EngineContext& ctx, Session& session, std::span<const std::string> inputs,
                                int iteration);

struct LoopSelection {
    std::vector<std::string> doc_ids;
    std::vector<std::string> generic_concept_ids;
};

/// Documents with no positive label, plus documents whose positive labels all
/// come from generic concepts (matching >= generic_fraction of all docs).
LoopSelection loop_select_inputs(const ScoreMatrix& matrix, std::span<const std::string> concept_ids,
                                 double generic_fraction);

struct IterationsResult {
    std::vector<std::string> concept_ids;
    std::size_t iterations_run = 0;
    std::vector<GenerationTrace> traces;
};

/// Iteration 0 runs on a sample of the dataset; later iterations on the Loop
/// selection of the previous one. Scores every active concept after each
/// iteration.
IterationsResult run_iterations(EngineContext& ctx, Session& session, std::size_t n_loops);

} // namespace lloom
