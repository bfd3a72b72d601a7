#include "nadbound/spectral.hpp"

#include <cmath>
#include <limits>

namespace nadbound {

namespace {

const Complex kI(0.0, 1.0);

/// Couplings in the eigenbasis, scaled by inverse level gaps:
/// K_ij = W_ij / (E_g(j) - E_g(i)) across distinct groups, 0 inside a group,
/// with W = V^dag h_dot V. Both Pdot_n and H_cd are contractions of K.
Matrix coupling_matrix(const SpectralFrame& frame, const Matrix& h_dot) {
  const Matrix& v = frame.eig.vectors;
  Matrix w = v.adjoint() * h_dot * v;
  w = (w + Matrix(w.adjoint())) / 2.0;

  const int d = frame.dim();
  std::vector<int> group(d);
  std::vector<double> energy(d);
  int col = 0;
  for (int g = 0; g < frame.level_count(); ++g) {
    for (int k = 0; k < frame.levels[g].multiplicity; ++k, ++col) {
      group[col] = g;
      energy[col] = frame.levels[g].energy;
    }
  }

  Matrix k = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (group[i] != group[j]) {
        k(i, j) = w(i, j) / (energy[j] - energy[i]);
      }
    }
  }
  return k;
}

void require_open_gaps(const SpectralFrame& frame) {
  for (int g = 0; g + 1 < frame.level_count(); ++g) {
    const double gap = frame.levels[g + 1].energy - frame.levels[g].energy;
    if (gap < frame.delta_deg) {
      throw GapClosureError(
          "spectral gap below delta_deg between levels " + std::to_string(g) +
              " and " + std::to_string(g + 1) + " at t = " +
              std::to_string(frame.t),
          frame.t);
    }
  }
}

void require_level_index(const SpectralFrame& frame, int n, const char* where) {
  if (n < 0 || n >= frame.level_count()) {
    throw std::invalid_argument(std::string(where) + ": level index out of range");
  }
}

}  // namespace

int SpectralFrame::column_start(int level) const {
  int start = 0;
  for (int g = 0; g < level; ++g) start += levels[g].multiplicity;
  return start;
}

SpectralFrame spectral_frame_from(const Matrix& h, const Matrix& h_dot,
                                  double t, double delta_deg) {
  require_hermitian(h, "spectral_frame");
  require_hermitian(h_dot, "spectral_frame (h_dot)");
  if (h_dot.rows() != h.rows()) {
    throw std::invalid_argument("spectral_frame: h and h_dot dimension mismatch");
  }

  SpectralFrame frame;
  frame.t = t;
  frame.h = h;
  frame.h_dot = h_dot;
  frame.eig = hermitian_eig(h);

  const int d = static_cast<int>(h.rows());
  const double scale = frame.eig.values.cwiseAbs().maxCoeff();
  frame.delta_deg = delta_deg > 0.0 ? delta_deg : 1e-8 * scale;

  frame.min_gap = std::numeric_limits<double>::infinity();
  int start = 0;
  for (int i = 1; i <= d; ++i) {
    const bool boundary =
        i == d || frame.eig.values[i] - frame.eig.values[i - 1] > frame.delta_deg;
    if (!boundary) continue;
    const int mult = i - start;
    SpectralLevel level;
    level.multiplicity = mult;
    level.energy = frame.eig.values.segment(start, mult).mean();
    const auto cols = frame.eig.vectors.middleCols(start, mult);
    level.projector = cols * cols.adjoint();
    frame.levels.push_back(std::move(level));
    if (i < d) {
      frame.min_gap =
          std::min(frame.min_gap, frame.eig.values[i] - frame.eig.values[i - 1]);
    }
    start = i;
  }
  frame.near_crossing = frame.min_gap < 10.0 * frame.delta_deg;

  frame.projector_derivs = projector_derivative(frame, h_dot);
  frame.h_cd = cd_hamiltonian(frame);
  return frame;
}

SpectralFrame spectral_frame(const HamiltonianModel& model,
                             const ParameterSchedule& sched, double t,
                             double delta_deg) {
  return spectral_frame_from(hamiltonian_at(model, sched, t),
                             time_derivative_h(model, sched, t), t, delta_deg);
}

std::vector<Matrix> projector_derivative(const SpectralFrame& frame,
                                         const Matrix& h_dot) {
  require_hermitian(h_dot, "projector_derivative");
  require_open_gaps(frame);

  const Matrix k = coupling_matrix(frame, h_dot);
  const Matrix m = frame.eig.vectors * k;

  std::vector<Matrix> derivs;
  derivs.reserve(frame.levels.size());
  int col = 0;
  for (const auto& level : frame.levels) {
    const auto vc = frame.eig.vectors.middleCols(col, level.multiplicity);
    const Matrix a = m.middleCols(col, level.multiplicity) * vc.adjoint();
    derivs.push_back(a + Matrix(a.adjoint()));
    col += level.multiplicity;
  }
  return derivs;
}

Matrix cd_hamiltonian(const SpectralFrame& frame) {
  require_open_gaps(frame);
  const Matrix k = coupling_matrix(frame, frame.h_dot);
  // (i hbar / 2) sum_n [Pdot_n, P_n] collapses to i hbar V K V^dag.
  const Matrix& v = frame.eig.vectors;
  Matrix h_cd = kI * kHbar * (v * k * v.adjoint());
  return (h_cd + Matrix(h_cd.adjoint())) / 2.0;
}

Matrix reduced_cd_hamiltonian(const SpectralFrame& frame, int n) {
  require_level_index(frame, n, "reduced_cd_hamiltonian");
  const Matrix& p = frame.levels[n].projector;
  const Matrix& pdot = frame.projector_derivs[n];
  Matrix h_cd = kI * kHbar * commutator(pdot, p);
  return (h_cd + Matrix(h_cd.adjoint())) / 2.0;
}

double qgt_norm(const SpectralFrame& frame, int m) {
  require_level_index(frame, m, "qgt_norm");
  const int d = frame.dim();
  const Matrix rest = Matrix::Identity(d, d) - frame.levels[m].projector;
  return operator_norm(rest * frame.projector_derivs[m]);
}

}  // namespace nadbound
