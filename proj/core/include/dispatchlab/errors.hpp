#pragma once

#include <stdexcept>
#include <string>

namespace dispatchlab {

// A point fell outside the grid's service area (west or south of the origin).
struct OutOfAreaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user-facing configuration: parameters, profiles, CLI specs.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input file lacks a required column. Message names the missing column.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Caller broke an interface contract (infeasible matching, busy driver, ...).
struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

// The exact solver was asked for an instance above its enumeration guard.
struct OracleSizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A metric ratio would divide by an absent or zero value. Names the metric.
struct NormalizationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dispatchlab
