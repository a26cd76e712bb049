#pragma once

#include <iosfwd>

namespace pqbias {

/// Oracle and invariant checks over every module. Prints one line per check
/// and returns true when all pass.
bool run_selftest(std::ostream& out, unsigned workers = 4);

}  // namespace pqbias
