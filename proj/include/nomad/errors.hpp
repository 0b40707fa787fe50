#pragma once

#include <stdexcept>
#include <string>

namespace nomad {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonPositiveRate : SolverError {
  using SolverError::SolverError;
};
struct DimensionMismatch : SolverError {
  using SolverError::SolverError;
};
struct InvalidParameter : SolverError {
  using SolverError::SolverError;
};
struct OutOfRange : SolverError {
  using SolverError::SolverError;
};
struct OccupancyZero : SolverError {
  using SolverError::SolverError;
};
struct TruncationTooSmall : SolverError {
  using SolverError::SolverError;
};
struct SingularSystem : SolverError {
  using SolverError::SolverError;
};
struct NoBracket : SolverError {
  using SolverError::SolverError;
};
struct NonConvergence : SolverError {
  using SolverError::SolverError;
};
struct MonotonicityViolation : SolverError {
  using SolverError::SolverError;
};
struct DegenerateLowerBound : SolverError {
  using SolverError::SolverError;
};
struct InvalidSystem : SolverError {
  using SolverError::SolverError;
};

// Configuration / input-file problems; message names the offending key.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace nomad
