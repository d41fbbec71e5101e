#pragma once

#include <string>

#include "lloom/core/types.hpp"
#include "lloom/scoring/scoring.hpp"

namespace lloom {

/// Rows are active concepts, columns are "All" followed by the defined
/// slices; one cell per (concept, column).
json matrix_view(const Session& s, Normalization normalization);

/// Criteria, provenance, representative examples, per-slice prevalence,
/// quartile histograms over numeric metadata and the match table with
/// highlighted filter quotes. Works for inactive concepts too.
json concept_detail(const Session& s, const std::string& concept_id);

/// Slice membership with per-concept prevalence and a document table.
json slice_detail(const Session& s, const std::string& slice_name);

/// Session trace. Prompts and raw responses are removed unless `debug`.
json trace_view(const Session& s, bool debug);

/// Counts and config; no documents.
json session_summary(const Session& s);

/// Character ranges of `doc_id`'s filter quotes inside the document text.
json highlights(const Session& s, const std::string& doc_id);

} // namespace lloom
