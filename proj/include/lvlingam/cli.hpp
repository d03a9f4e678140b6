#pragma once

#include <ostream>

namespace lvlingam {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 ok, 2 usage or malformed input, 3 I/O, 4 numerical
/// degeneracy, 5 inconsistent verdicts, 1 anything else.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lvlingam
