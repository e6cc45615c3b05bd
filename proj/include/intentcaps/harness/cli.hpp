#ifndef INTENTCAPS_HARNESS_CLI_HPP_
#define INTENTCAPS_HARNESS_CLI_HPP_

#include <ostream>

namespace intentcaps::harness {

// Entry point of the intentcaps tool. Subcommands: train, eval, zsl-eval,
// export-attention, export-activations, cross-validate, gradcheck. Returns the
// process exit code; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace intentcaps::harness

#endif  // INTENTCAPS_HARNESS_CLI_HPP_
