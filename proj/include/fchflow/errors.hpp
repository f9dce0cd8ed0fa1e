#pragma once

#include <stdexcept>
#include <string>

namespace fchflow {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid configuration or construction-time invariant violation.
struct ConfigError : Error {
  using Error::Error;
};

// Config text mentions a key the schema does not know.
struct UnknownKeyError : ConfigError {
  explicit UnknownKeyError(const std::string& key)
      : ConfigError("unknown config key: " + key), key(key) {}
  std::string key;
};

// A required key is absent.
struct MissingKeyError : ConfigError {
  explicit MissingKeyError(const std::string& key)
      : ConfigError(key + " required"), key(key) {}
  std::string key;
};

// A key is present but its value is malformed or out of range.
struct BadValueError : ConfigError {
  BadValueError(const std::string& key, const std::string& what)
      : ConfigError("bad value for " + key + ": " + what), key(key) {}
  std::string key;
};

// A grid axis has an odd point count (the transforms need even n).
struct OddGridSizeError : BadValueError {
  OddGridSizeError(const std::string& key, long long n)
      : BadValueError(key, "grid sizes must be even, got " + std::to_string(n)) {}
};

// A coefficient law's lower bound is not strictly positive.
struct NonPositiveFloorError : BadValueError {
  explicit NonPositiveFloorError(const std::string& key)
      : BadValueError(key, "coefficient floors must be > 0") {}
};

// A time-step quantity (dt, t_end) is not strictly positive.
struct NonPositiveStepError : BadValueError {
  explicit NonPositiveStepError(const std::string& key)
      : BadValueError(key, "must be > 0") {}
};

// File system / serialization failures.
struct IoError : Error {
  using Error::Error;
};

// Snapshot file does not start with the expected magic bytes.
struct BadMagicError : IoError {
  using IoError::IoError;
};

// Snapshot format version is not supported by this build.
struct BadVersionError : IoError {
  using IoError::IoError;
};

// Snapshot payload ends before the header-declared length.
struct TruncatedError : IoError {
  using IoError::IoError;
};

// A functional evaluated to a non-finite value outside the solver loop.
struct NumericalError : Error {
  using Error::Error;
};

// Solution left the trusted regime: a tracked norm exceeded the overflow
// threshold or a field went non-finite. `monitor` names the first offender.
struct BlowUpError : Error {
  BlowUpError(double t, const std::string& monitor)
      : Error("blow-up detected at t=" + std::to_string(t) +
              " (first diverging monitor: " + monitor + ")"),
        t(t),
        monitor(monitor) {}
  double t;
  std::string monitor;
};

}  // namespace fchflow
