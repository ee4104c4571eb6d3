#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace rpbie {

using cplx = std::complex<double>;
using Vec3 = Eigen::Vector3d;

inline constexpr double pi = std::numbers::pi;

/// Malformed input: a geometry file, a config value, an inconsistent problem.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A surface map that cannot be discretized (non-positive Jacobian).
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violated numerical precondition inside the integrators or the solver.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rpbie
