#pragma once

#include <iosfwd>

namespace biokg {

// Entry point of the `biokg` command. Returns 0 on success, 1 for user
// errors (bad arguments, unknown kg, malformed input) and 2 otherwise.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace biokg
