#pragma once

#include <stdexcept>
#include <string>

namespace limix {

// Bad or missing configuration (stream specs, config files, CLI args).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape or architecture mismatch.
struct StructuralError : std::runtime_error {
  explicit StructuralError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite value encountered; message names the offending tensor/stage.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Out-of-range label or malformed sample.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Operation not supported in the model's current mode (e.g. predict on an
// unsupervised mixture).
struct ModeError : std::runtime_error {
  explicit ModeError(const std::string& msg) : std::runtime_error(msg) {}
};

// Training produced a non-finite loss; the task is aborted.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

// A referenced checkpoint/metrics file does not exist.
struct MissingArtifactError : std::runtime_error {
  explicit MissingArtifactError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace limix
