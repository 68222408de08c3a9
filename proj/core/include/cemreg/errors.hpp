#pragma once

#include <stdexcept>
#include <string>

namespace cemreg {

// Input is structurally valid but geometrically unusable (all points
// identical, empty vertex set, ...).
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Correspondence geometry is rank-deficient (collinear / coincident points).
class DegenerateGeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A file failed to parse; carries the 1-based line where parsing stopped.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& path, long line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what),
        line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

// Checkpoint file is recognizable but not usable with this build/config.
class IncompatibleCheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Checkpoint file is truncated or internally inconsistent.
class CorruptCheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor / layer shape mismatch.
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration (unknown key, bad value, K > N, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Planning aborted (non-finite reward from the oracle).
class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training aborted (non-finite loss); message carries epoch/batch diagnostics.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File IO failure with the offending path in the message.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cemreg
