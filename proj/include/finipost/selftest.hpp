#pragma once

#include <iosfwd>

namespace finipost {

/// Quick oracle suite; prints one PASS/FAIL line per check and returns the
/// number of failures.
int run_selftest(std::ostream& out);

}  // namespace finipost
