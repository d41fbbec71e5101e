#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lloom/core/events.hpp"
#include "lloom/pipeline/engine.hpp"

namespace lloom {

struct CoverageMatch {
    std::size_t ground_truth = 0;
    std::optional<std::size_t> generated;
    std::string rationale;
};

struct CoverageResult {
    double coverage = 0;
    /// One entry per ground-truth concept, in input order.
    std::vector<CoverageMatch> matches;
    std::vector<std::string> warnings;
    std::size_t attempts = 0;
};

/// Asks the matcher which generated concept (if any) covers each ground-truth
/// concept. Duplicate matches are dropped, earlier ground truth wins. A parse
/// failure is retried once before it propagates.
CoverageResult auto_coverage(EngineContext& ctx, std::span<const std::string> ground_truth,
                             std::span<const std::string> generated, EventLog& log);

struct TrialRun {
    std::vector<std::string> concepts;
    /// Set when the method itself failed to produce output for this trial.
    std::optional<std::string> error;
};

struct TrialInput {
    std::string method;
    std::string dataset;
    std::vector<std::string> ground_truth;
    std::vector<TrialRun> trials;
};

struct TrialOutcome {
    std::size_t trial = 0;
    std::optional<double> coverage;
    std::string error;
};

struct TrialReport {
    std::string method;
    std::string dataset;
    std::vector<TrialOutcome> trials;
    std::size_t n_ok = 0;
    std::optional<double> mean;
    std::optional<double> sd;
    std::string note;
};

/// Coverage for the first `n_trials` runs. Failed trials are reported and left
/// out of mean and sample sd; sd is undefined below two successful trials.
TrialReport run_trials(EngineContext& ctx, const TrialInput& input, std::size_t n_trials, EventLog& log);

/// method,dataset,row,coverage,note with one row per trial then "mean" and "sd".
std::string trials_csv(std::span<const TrialReport> reports);

/// Coverage implied by a hand-labelled match list (null = unmatched).
double manual_coverage(const std::vector<std::optional<std::size_t>>& matches);

} // namespace lloom
