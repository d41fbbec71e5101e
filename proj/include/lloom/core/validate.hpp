#pragma once

#include <string>
#include <vector>

#include "lloom/core/types.hpp"

namespace lloom {

struct Violation {
    std::string code;
    std::string detail;

    bool operator==(const Violation&) const = default;
};

/// Every invariant violation in `s`; empty iff the session is consistent.
/// Pure and total.
std::vector<Violation> validate_session(const Session& s);

} // namespace lloom
