#include "nadbound/operator_core.hpp"

#include <cmath>
#include <string>

namespace nadbound {

bool has_finite_entries(const Matrix& a) {
  return a.allFinite();
}

double hermiticity_defect(const Matrix& a) {
  return 0.5 * (a - a.adjoint()).norm();
}

void require_hermitian(const Matrix& a, const char* where) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument(std::string(where) + ": matrix is not square");
  }
  if (!has_finite_entries(a)) {
    throw std::invalid_argument(std::string(where) +
                                ": matrix has non-finite entries");
  }
  const double scale = a.norm();
  if (hermiticity_defect(a) > 1e-10 * std::max(scale, 1e-300)) {
    throw std::invalid_argument(std::string(where) +
                                ": matrix is not Hermitian within tolerance");
  }
}

HermitianEig hermitian_eig(const Matrix& a) {
  require_hermitian(a, "hermitian_eig");
  const Matrix sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("hermitian_eig: eigensolver failed to converge");
  }
  return HermitianEig{solver.eigenvalues(), solver.eigenvectors()};
}

double operator_norm(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("operator_norm: matrix is not square");
  }
  if (!has_finite_entries(a)) {
    throw std::invalid_argument("operator_norm: matrix has non-finite entries");
  }
  // sigma_max(A) = sqrt(lambda_max(A^dag A)); A^dag A is Hermitian PSD.
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.adjoint() * a,
                                               Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("operator_norm: eigensolver failed to converge");
  }
  const double top = solver.eigenvalues().maxCoeff();
  return std::sqrt(std::max(top, 0.0));
}

Matrix expi_step(const Matrix& a, double dt) {
  require_hermitian(a, "expi_step");
  if (!std::isfinite(dt)) {
    throw std::invalid_argument("expi_step: dt is not finite");
  }
  const HermitianEig eig = hermitian_eig(a);
  const Eigen::Index d = a.rows();
  ComplexVector phases(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    phases[i] = std::exp(Complex(0.0, -eig.values[i] * dt / kHbar));
  }
  return eig.vectors * phases.asDiagonal() * eig.vectors.adjoint();
}

}  // namespace nadbound
