#pragma once

#include <stdexcept>
#include <string>

namespace slide {

// Bad specs, configs, CLI arguments or malformed files. Mapped to exit code 2.
class InvalidInput : public std::runtime_error {
 public:
  explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

// Solver breakdown at runtime: Newton divergence, NaN states, failed
// eigen decomposition. Mapped to exit code 3.
class NumericalFailure : public std::runtime_error {
 public:
  explicit NumericalFailure(const std::string& msg) : std::runtime_error(msg) {}
};

// A sampled start configuration with no admissible equilibrium pressures.
// Recoverable: the data generator resamples the initial angle.
class InfeasibleConfiguration : public std::runtime_error {
 public:
  explicit InfeasibleConfiguration(const std::string& msg)
      : std::runtime_error(msg) {}
};

}  // namespace slide
