#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace mnt {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/// Numerical tolerances shared by the library and its test suites.
struct Tolerances {
  double solve_rel_residual = 1e-10;    // solve_linear accuracy contract
  double pivot_min = 1e-300;            // LU pivot underflow -> SingularMatrix
  double sigma_rel_tol = 1e-8;          // largest_singular_value convergence
  double spectral_rel_tol = 1e-6;       // spectral_radius accuracy contract
  int max_power_iterations = 10000;
  double flip_denominator_min = 1e-12;  // Sherman-Morrison breakdown guard
};

inline const Tolerances& tolerances() {
  static const Tolerances t{};
  return t;
}

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};
struct SingularMatrix : Error {
  using Error::Error;
};
struct ConvergenceFailure : Error {
  using Error::Error;
};
struct PassivityViolation : Error {
  using Error::Error;
};
struct InfeasibleTarget : Error {
  using Error::Error;
};
struct CacheInvalid : Error {
  using Error::Error;
};
struct StaleCache : Error {
  using Error::Error;
};
struct NumericBreakdown : Error {
  using Error::Error;
};
struct NotFitted : Error {
  using Error::Error;
};
struct DegenerateDesign : Error {
  using Error::Error;
};
struct ShapeError : Error {
  using Error::Error;
};
struct EmptyDictionary : Error {
  using Error::Error;
};
struct InvalidPopulation : Error {
  using Error::Error;
};
struct NonFiniteGradient : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

inline constexpr const char* kVersion = "0.1.0";

}  // namespace mnt
