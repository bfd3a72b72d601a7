#pragma once

#include "nadbound/spectral.hpp"

#include <random>

namespace nadbound::testing {

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(seed);
}

inline Matrix random_complex(std::mt19937_64& rng, int rows, int cols,
                             double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = Complex(gauss(rng), gauss(rng));
  }
  return m;
}

inline Matrix random_hermitian(std::mt19937_64& rng, int d, double scale = 1.0) {
  const Matrix a = random_complex(rng, d, d, scale);
  return (a + Matrix(a.adjoint())) / 2.0;
}

inline Matrix random_unitary(std::mt19937_64& rng, int d) {
  const Matrix a = random_complex(rng, d, d);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  // Fix the phase convention so the distribution is Haar.
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < d; ++i) {
    const Complex diag = r(i, i);
    if (std::abs(diag) > 0.0) q.col(i) *= diag / std::abs(diag);
  }
  return q;
}

inline ComplexVector random_unit_vector(std::mt19937_64& rng, int d) {
  const Matrix v = random_complex(rng, d, 1);
  return v.col(0) / v.col(0).norm();
}

inline Matrix random_density(std::mt19937_64& rng, int d, int rank) {
  Matrix rho = Matrix::Zero(d, d);
  std::uniform_real_distribution<double> uni(0.1, 1.0);
  double total = 0.0;
  std::vector<double> w(rank);
  for (int k = 0; k < rank; ++k) {
    w[k] = uni(rng);
    total += w[k];
  }
  const Matrix u = random_unitary(rng, d);
  for (int k = 0; k < rank; ++k) {
    rho += (w[k] / total) * (u.col(k) * u.col(k).adjoint());
  }
  return rho;
}

/// Monte-Carlo operator norm: best of n_samples random unit vectors, then
/// power ascent on A^dag A from the best sample. Independent of the
/// eigensolver route used by operator_norm.
inline double mc_operator_norm(const Matrix& a, std::mt19937_64& rng,
                               int n_samples = 10000, int polish = 200) {
  const int d = static_cast<int>(a.cols());
  double best = 0.0;
  ComplexVector best_v = random_unit_vector(rng, d);
  for (int s = 0; s < n_samples; ++s) {
    const ComplexVector v = random_unit_vector(rng, d);
    const double value = (a * v).norm();
    if (value > best) {
      best = value;
      best_v = v;
    }
  }
  ComplexVector v = best_v;
  for (int it = 0; it < polish; ++it) {
    ComplexVector w = a.adjoint() * (a * v);
    const double n = w.norm();
    if (n == 0.0) break;
    v = w / n;
  }
  return std::max(best, (a * v).norm());
}

/// Monte-Carlo Uhlmann fidelity: stochastic ascent of |Tr(sqrt(rho_f)
/// sqrt(rho_i) V)|^2 over unitaries V, realizing the maximum over
/// purifications. Samples random Givens-style steps with decaying size.
inline double mc_uhlmann_fidelity(const Matrix& rho_i, const Matrix& rho_f,
                                  std::mt19937_64& rng, int steps = 200000) {
  auto sqrt_of = [](const Matrix& rho) {
    const HermitianEig eig = hermitian_eig(rho);
    Matrix root = Matrix::Zero(rho.rows(), rho.cols());
    for (int i = 0; i < eig.values.size(); ++i) {
      root += std::sqrt(std::max(eig.values[i], 0.0)) *
              (eig.vectors.col(i) * eig.vectors.col(i).adjoint());
    }
    return root;
  };
  const Matrix m = sqrt_of(rho_f) * sqrt_of(rho_i);
  const int d = static_cast<int>(m.rows());

  std::uniform_int_distribution<int> pick(0, d - 1);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Matrix v = Matrix::Identity(d, d);
  double best = std::abs((m * v).trace());
  for (int s = 0; s < steps; ++s) {
    const double step = 1.5 * std::pow(0.99995, s) + 1e-4;
    int i = pick(rng), j = pick(rng);
    Matrix g = Matrix::Identity(d, d);
    if (i == j) {
      g(i, i) = std::exp(Complex(0.0, step * uni(rng)));
    } else {
      const double angle = step * uni(rng);
      const double phase = step * uni(rng);
      const Complex c(std::cos(angle), 0.0);
      const Complex z = std::sin(angle) * std::exp(Complex(0.0, phase));
      g(i, i) = c;
      g(j, j) = c;
      g(i, j) = z;
      g(j, i) = -std::conj(z);
    }
    const Matrix cand = v * g;
    const double value = std::abs((m * cand).trace());
    if (value > best) {
      best = value;
      v = cand;
    }
  }
  return best * best;
}

/// H(lambda) = A0 + sum_k lambda_k A_k with frozen random Hermitian terms.
/// A0 has a spread diagonal so the unperturbed spectrum is well gapped.
/// Parameter derivatives intentionally go through the finite-difference
/// default, exercising that production path.
class RandomSmoothModel final : public HamiltonianModel {
 public:
  RandomSmoothModel(std::uint64_t seed, int d, int p, double coupling = 0.3)
      : d_(d), p_(p) {
    std::mt19937_64 rng(seed);
    Matrix base = Matrix::Zero(d, d);
    for (int i = 0; i < d; ++i) base(i, i) = Complex(2.0 * i, 0.0);
    a_.push_back(base + random_hermitian(rng, d, 0.1));
    for (int k = 0; k < p; ++k) a_.push_back(random_hermitian(rng, d, coupling));
  }

  int dim() const override { return d_; }
  int param_count() const override { return p_; }
  std::string family() const override { return "random-smooth"; }
  Matrix evaluate(const RealVector& lambda) const override {
    if (lambda.size() != p_) {
      throw std::invalid_argument("random-smooth: wrong lambda size");
    }
    Matrix h = a_[0];
    for (int k = 0; k < p_; ++k) h += lambda[k] * a_[k + 1];
    return h;
  }

 private:
  int d_;
  int p_;
  std::vector<Matrix> a_;
};

/// Random C^1 schedule through jittered knots, endpoints included.
inline ParameterSchedule random_smooth_schedule(std::mt19937_64& rng, double T,
                                                int p, int interior_knots = 3,
                                                double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  std::vector<ScheduleKnot> knots;
  const int total = interior_knots + 2;
  for (int i = 0; i < total; ++i) {
    RealVector lambda(p);
    for (int k = 0; k < p; ++k) lambda[k] = gauss(rng);
    knots.push_back({T * static_cast<double>(i) / (total - 1), lambda});
  }
  return ParameterSchedule::piecewise_cubic(std::move(knots));
}

}  // namespace nadbound::testing
