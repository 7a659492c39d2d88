#pragma once

#include <stdexcept>
#include <string>

namespace gtdd {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidGrid : SolverError {
  using SolverError::SolverError;
};

struct MisalignedPartition : SolverError {
  using SolverError::SolverError;
};

struct InvalidPartition : SolverError {
  using SolverError::SolverError;
};

struct GridMismatch : SolverError {
  using SolverError::SolverError;
};

struct SingularMatrix : SolverError {
  using SolverError::SolverError;
};

struct InvalidRobinParameter : SolverError {
  using SolverError::SolverError;
};

struct DegenerateElement : SolverError {
  using SolverError::SolverError;
};

struct IndexError : SolverError {
  using SolverError::SolverError;
};

struct ConfigError : SolverError {
  using SolverError::SolverError;
};

} // namespace gtdd
