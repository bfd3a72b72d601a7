#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace nadbound {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// All times are in inverse-energy units.
inline constexpr double kHbar = 1.0;

inline constexpr const char* kVersion = "0.1.0";

/// Raised when a spectral gap shrinks below the resolvable tolerance, or when
/// level tracking across a time grid breaks down. Carries the time of failure.
class GapClosureError : public std::runtime_error {
 public:
  GapClosureError(const std::string& message, double t)
      : std::runtime_error(message), time_(t) {}
  double time() const { return time_; }

 private:
  double time_;
};

/// Raised on malformed run configuration or input files.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& message)
      : std::runtime_error(message) {}
};

}  // namespace nadbound
