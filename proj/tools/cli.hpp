#pragma once

#include <iosfwd>

namespace fex::cli {

enum ExitCode { ok = 0, usage = 1, data = 2 };

/// Runs one `fex` invocation. Regular output goes to `out`, errors to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fex::cli
