#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace lloom {

using Clock = std::function<std::chrono::system_clock::time_point()>;

Clock system_clock();
/// Always returns the same instant; used for reproducible traces.
Clock fixed_clock(std::chrono::system_clock::time_point at = {});

std::string iso8601(std::chrono::system_clock::time_point t);

/// FNV-1a 64-bit, rendered as 16 lowercase hex digits.
std::string stable_hash(std::string_view text);

std::string_view trim(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::size_t edit_distance(std::string_view a, std::string_view b);

/// RFC-4180 field: quoted when it contains a comma, quote or line break.
std::string csv_escape(std::string_view field);

/// Shortest round-trip decimal form ("1", "0.75").
std::string format_number(double v);

} // namespace lloom
