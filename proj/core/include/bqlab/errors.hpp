#pragma once

#include <stdexcept>
#include <string>

namespace bqlab {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Argument/size violations of an operation's preconditions.
struct ContractError : Error {
  using Error::Error;
};

// Grid too coarse or too short to represent the requested object.
struct ResolutionError : Error {
  using Error::Error;
};

// Input outside the mathematical domain of an operation (e.g. t <= 0 cutoffs).
struct DomainError : Error {
  using Error::Error;
};

// The discrete solution left the resolvable regime; carries the detection time.
struct BlowupError : Error {
  double time;
  explicit BlowupError(double t, const std::string& what_arg)
      : Error(what_arg), time(t) {}
};

struct ConvergenceError : Error {
  using Error::Error;
};

// State too far from a soliton sum for the modulation solve.
struct OutOfBasinError : Error {
  using Error::Error;
};

// A certified spectral property failed to hold numerically.
struct CertificationError : Error {
  using Error::Error;
};

// Checkpoint file with wrong magic or version.
struct FormatError : Error {
  using Error::Error;
};

// Checkpoint file truncated or inconsistent.
struct CorruptionError : Error {
  using Error::Error;
};

struct ConfigError : Error {
  using Error::Error;
};

}  // namespace bqlab
