#pragma once

#include "nadbound/common.hpp"

namespace nadbound {

/// Eigendecomposition of a Hermitian matrix: d real eigenvalues in ascending
/// order and a unitary matrix whose columns are the eigenvectors.
struct HermitianEig {
  RealVector values;
  Matrix vectors;
};

bool has_finite_entries(const Matrix& a);

/// Frobenius norm of the anti-Hermitian part, ||A - A^dag||_F.
double hermiticity_defect(const Matrix& a);

/// Rejects non-finite or non-Hermitian input (tolerance 1e-10 relative to
/// ||A||_F). `where` names the caller for the error message.
void require_hermitian(const Matrix& a, const char* where);

/// Diagonalizes the symmetrized input (A + A^dag)/2.
HermitianEig hermitian_eig(const Matrix& a);

/// Largest singular value. Computed from the full dense matrix so results are
/// deterministic across runs.
double operator_norm(const Matrix& a);

/// exp(-i * A * dt / hbar) for Hermitian A, via eigendecomposition. The result
/// is unitary up to eigensolver error.
Matrix expi_step(const Matrix& a, double dt);

inline Matrix commutator(const Matrix& a, const Matrix& b) {
  return a * b - b * a;
}

}  // namespace nadbound
