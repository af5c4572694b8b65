#pragma once

#include <ostream>

namespace goalrl {

/// Entry point of the goalrl command line: train, evaluate, oracle.
/// Returns the process exit status.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace goalrl
