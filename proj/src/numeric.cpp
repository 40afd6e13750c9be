#include "mnt/numeric.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "mnt/rng.hpp"

namespace mnt {

Matrix solve_linear(const Matrix& A, const Matrix& B) {
  if (A.rows() != A.cols()) throw DimensionMismatch("solve_linear: A not square");
  if (B.rows() != A.rows()) throw DimensionMismatch("solve_linear: row count of B != n");

  Eigen::PartialPivLU<Matrix> lu(A);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > tolerances().pivot_min))
    throw SingularMatrix("solve_linear: pivot underflow");

  Matrix X = lu.solve(B);
  // one refinement step keeps the residual near machine level even for
  // moderately ill-conditioned systems
  X += lu.solve(B - A * X);
  return X;
}

double largest_singular_value(const Matrix& A) {
  if (A.size() == 0) throw DimensionMismatch("largest_singular_value: empty matrix");
  if (A.cwiseAbs().maxCoeff() == 0.0) return 0.0;

  // Fixed-seed start vector: deterministic result for a given input.
  Rng rng(0x53564d4158ULL);
  Vector x(A.cols());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = rng.complex_gaussian(1.0);
  x.normalize();

  // Power iteration on A^H A; the Rayleigh quotient converges to sigma_max^2.
  double lambda_prev = 0.0;
  const double tol = tolerances().sigma_rel_tol;
  for (int it = 0; it < tolerances().max_power_iterations; ++it) {
    Vector y = A.adjoint() * (A * x);
    const double lambda = std::real(x.dot(y));
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;  // x landed in the null space; sigma within tol of 0
    x = y / norm;
    if (it > 0 && std::abs(lambda - lambda_prev) <= tol * std::abs(lambda))
      return std::sqrt(std::abs(lambda));
    lambda_prev = lambda;
  }
  throw ConvergenceFailure("largest_singular_value: power iteration stalled");
}

double spectral_radius(const Matrix& A) {
  if (A.rows() != A.cols()) throw DimensionMismatch("spectral_radius: A not square");
  if (A.size() == 0) throw DimensionMismatch("spectral_radius: empty matrix");

  Eigen::ComplexSchur<Matrix> schur(A, /*computeU=*/false);
  if (schur.info() != Eigen::Success)
    throw ConvergenceFailure("spectral_radius: Schur iteration failed");
  return schur.matrixT().diagonal().cwiseAbs().maxCoeff();
}

}  // namespace mnt
