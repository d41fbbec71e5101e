#pragma once

#include <span>
#include <string>
#include <vector>

#include "lloom/core/answer_scale.hpp"
#include "lloom/core/types.hpp"
#include "lloom/pipeline/engine.hpp"

namespace lloom {

/// One entry per document, in `docs` order. Documents the model skips or
/// answers with an invalid letter are retried alone once, then fall back to
/// C. Gateway failures become error entries; the call itself never throws for
/// provider trouble.
std::vector<ScoreEntry> score_concept(EngineContext& ctx, const Concept& cpt, std::span<const Document> docs,
                                      std::size_t batch_size, double threshold, EventLog& log);

/// Scores the given concepts against every document and commits one
/// column_scored event per concept.
void score_concepts(EngineContext& ctx, Session& session, std::span<const std::string> concept_ids);

/// Active concepts with no matrix column yet.
std::vector<std::string> unscored_concepts(const Session& session);

/// Re-runs scoring for one concept. The previous column is archived in the
/// trace; no other column changes.
std::vector<ScoreEntry> rescore_concept(EngineContext& ctx, Session& session, const std::string& concept_id);

enum class Normalization { BySlice, ByConcept };

std::string_view to_string(Normalization n);
Normalization normalization_from_string(std::string_view s);

struct PrevalenceCell {
    std::string concept_id;
    std::string slice_name;
    std::size_t count = 0;
    std::size_t denominator = 0;
    double prevalence = 0.0;
    Normalization normalization = Normalization::BySlice;
    /// Denominator was zero; prevalence reported as 0.
    bool empty_denominator = false;
};

PrevalenceCell prevalence(const ScoreMatrix& matrix, const std::string& concept_id, const std::string& slice_name,
                          std::span<const std::string> slice_doc_ids, Normalization normalization);

/// Fraction of documents with no positive label among `concept_ids`; 1.0
/// when there are no concepts.
double outlier_fraction(const ScoreMatrix& matrix, std::span<const std::string> concept_ids);
double outlier_fraction(const Session& session);

std::vector<std::string> active_concept_ids(const Session& session);

/// doc_id, then "<name> [<id>] score" and "<name> [<id>] label" per active concept.
std::string matrix_csv(const Session& session);

} // namespace lloom
