#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "lloom/core/types.hpp"

namespace lloom {

// Multiple-choice buckets. Endpoints are fixed (strongly agree = 1, strongly
// disagree = 0); interior values interpolate linearly.
inline constexpr std::array<double, 5> kAnswerScores{1.0, 0.75, 0.5, 0.25, 0.0};

constexpr double answer_to_score(Answer a) { return kAnswerScores[static_cast<std::size_t>(a)]; }

/// Inclusive: a score equal to the threshold is a match.
constexpr bool apply_threshold(double score, double threshold) { return score >= threshold; }

/// Accepts "A".."E", optionally followed by a separator and the option text
/// ("A: Strongly agree"). Returns nullopt for anything else.
std::optional<Answer> parse_answer(std::string_view text);

} // namespace lloom
