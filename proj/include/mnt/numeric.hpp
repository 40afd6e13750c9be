#pragma once

#include "mnt/common.hpp"

namespace mnt {

/// Solves A X = B for square A via LU with partial pivoting plus one step of
/// iterative refinement. Relative residual stays below
/// tolerances().solve_rel_residual for condition numbers up to ~1e6.
/// Throws SingularMatrix when a pivot underflows, DimensionMismatch on
/// incompatible shapes.
Matrix solve_linear(const Matrix& A, const Matrix& B);

/// Largest singular value via power iteration on the Gram matrix with a
/// deterministic start vector. Relative tolerance tolerances().sigma_rel_tol;
/// throws ConvergenceFailure past max_power_iterations.
double largest_singular_value(const Matrix& A);

/// Largest eigenvalue magnitude of a square matrix, computed by complex Schur
/// reduction (robust for repeated or equal-magnitude dominant eigenvalues,
/// which defeat plain power iteration). Throws ConvergenceFailure if the QR
/// iteration does not converge.
double spectral_radius(const Matrix& A);

}  // namespace mnt
