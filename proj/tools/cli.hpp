#pragma once

#include <ostream>

namespace lloom::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kData = 3, kProvider = 4 };

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace lloom::cli
