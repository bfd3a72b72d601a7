#pragma once

#include "nadbound/model.hpp"
#include "nadbound/operator_core.hpp"

#include <vector>

namespace nadbound {

/// One degeneracy-grouped level: cluster mean energy, multiplicity, and the
/// gauge-free projector onto the cluster's eigenspace.
struct SpectralLevel {
  double energy;
  int multiplicity;
  Matrix projector;
};

/// Instantaneous spectral data of H(lambda_t) at one time. Eigenvalues are
/// ascending; consecutive eigenvalues within delta_deg of each other are
/// merged into one level, so level g occupies the contiguous eigenvector
/// columns [column_start(g), column_start(g) + multiplicity).
///
/// min_gap is the smallest eigenvalue gap across adjacent level boundaries
/// (+inf when there is a single level). near_crossing is set when min_gap
/// falls below 10 * delta_deg; bounds stay valid but integrands get large.
struct SpectralFrame {
  double t = 0.0;
  double delta_deg = 0.0;
  Matrix h;
  Matrix h_dot;
  HermitianEig eig;
  std::vector<SpectralLevel> levels;
  std::vector<Matrix> projector_derivs;
  Matrix h_cd;
  double min_gap = 0.0;
  bool near_crossing = false;

  int dim() const { return static_cast<int>(h.rows()); }
  int level_count() const { return static_cast<int>(levels.size()); }
  int column_start(int level) const;
};

/// Builds the frame from raw matrices. delta_deg <= 0 selects the default
/// 1e-8 * ||H||. Fills projectors, projector derivatives, and h_cd.
SpectralFrame spectral_frame_from(const Matrix& h, const Matrix& h_dot,
                                  double t, double delta_deg = -1.0);

SpectralFrame spectral_frame(const HamiltonianModel& model,
                             const ParameterSchedule& sched, double t,
                             double delta_deg = -1.0);

/// Pdot_n = sum_{m != n} [P_m h_dot P_n + P_n h_dot P_m] / (E_n - E_m),
/// one matrix per level. Rejects frames whose level energies sit closer
/// than delta_deg (gap closure).
std::vector<Matrix> projector_derivative(const SpectralFrame& frame,
                                         const Matrix& h_dot);

/// H_cd = (i hbar / 2) sum_n [Pdot_n, P_n]. Hermitian and block-off-diagonal.
Matrix cd_hamiltonian(const SpectralFrame& frame);

/// H_cd^(n) = i hbar [Pdot_n, P_n]: transports only level n.
Matrix reduced_cd_hamiltonian(const SpectralFrame& frame, int n);

/// ||(1 - P_m) Pdot_m||, the speed of the level-m eigenspace. The operator
/// norm takes the max over in-level states, which covers degenerate levels.
double qgt_norm(const SpectralFrame& frame, int m);

}  // namespace nadbound
