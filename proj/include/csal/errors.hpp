#pragma once

#include <stdexcept>

namespace csal {

// Configuration file / parameter problems. CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Structurally infeasible problem construction (mass budget, packing,
// region overlap, value range). CLI maps these to exit code 2 as well,
// since they originate from user-supplied parameters.
struct ProblemError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A cost oracle returned a value outside [0, 1].
struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Refinement asked for a cell beyond the depth cap (60 * dim splits),
// where box coordinates would degenerate in double precision.
struct DepthCapExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace csal
