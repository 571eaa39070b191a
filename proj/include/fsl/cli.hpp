#pragma once

// Command-line driver: gen-synth, train, eval, ensemble, ablate.

#include <iosfwd>

namespace fsl::cli {

// Returns the process exit code. Diagnostics go to err, summaries to out.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv);

}  // namespace fsl::cli
