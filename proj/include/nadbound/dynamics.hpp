#pragma once

#include "nadbound/spectral.hpp"

#include <vector>

namespace nadbound {

/// Generator choice for unitary stepping: H, H + H_cd, or H + H_cd^(n).
enum class PropagationMode { Dynamical, Adiabatic, ReducedAdiabatic };

struct PropagateOptions {
  double dt_max = -1.0;     // <= 0: defaults to T / 2000
  double delta_deg = -1.0;  // <= 0: per-frame default 1e-8 * ||H||
  int reduced_level = 0;    // level n for ReducedAdiabatic
};

/// Dynamical and adiabatic propagators on a shared grid. U_D[0] = U_A[0] = 1;
/// each stored matrix is unitary within 1e-10 * d. U_A transports every
/// projector: ||U_A[k] P_n(0) U_A[k]^dag - P_n(t_k)|| = O(dt_max^2).
struct PropagatorPair {
  std::vector<double> grid;
  std::vector<Matrix> u_d;
  std::vector<Matrix> u_a;
  double dt_max = 0.0;
};

/// K+1 equally spaced nodes covering [0, T].
std::vector<double> uniform_grid(double T, int segments);

/// Worker count for data-parallel loops: hardware concurrency, capped by the
/// NADBOUND_THREADS environment variable and by the job count.
int worker_count(int jobs);

/// Spectral frames at the given (increasing) times, built in parallel. With
/// check_tracking set, verifies that adjacent frames keep the same level
/// structure and that each projector overlaps its successor
/// (Tr[P_n(t_k) P_n(t_{k+1})] >= multiplicity / 2); a violation means a level
/// crossing slipped between grid points, and raises GapClosureError with a
/// refine-grid diagnostic.
std::vector<SpectralFrame> frames_on_grid(const HamiltonianModel& model,
                                          const ParameterSchedule& sched,
                                          const std::vector<double>& times,
                                          double delta_deg = -1.0,
                                          bool check_tracking = true);

void check_level_tracking(const std::vector<SpectralFrame>& frames);

/// Midpoint-exponential stepping U[k+1] = expi_step(G(t_mid), dt) U[k] along
/// the grid, subdividing each grid interval so no substep exceeds dt_max.
/// Returns the propagator at every grid node; global error O(dt_max^2).
std::vector<Matrix> propagate(const HamiltonianModel& model,
                              const ParameterSchedule& sched,
                              const std::vector<double>& grid,
                              PropagationMode mode,
                              const PropagateOptions& opts = {});

PropagatorPair make_propagator_pair(const HamiltonianModel& model,
                                    const ParameterSchedule& sched,
                                    const std::vector<double>& grid,
                                    const PropagateOptions& opts = {});

/// p_nm(t) = ||P_m(lambda_t) U_D(t) P_n(lambda_0)||^2: the maximal
/// level-to-level transfer probability (max over in-level initial states).
double transition_rate(const Matrix& u_d, const SpectralFrame& frame0,
                       const SpectralFrame& frame_t, int n, int m);

double transition_rate(const PropagatorPair& pair,
                       const std::vector<SpectralFrame>& frames, int n, int m,
                       int k);

/// ||(U_A^dag U_D)^dag (U_A^dag U_D) - 1|| at grid node k. Zero for exact
/// unitaries; doubles as the consistency check of the intertwiner equation.
double intertwiner_residual(const PropagatorPair& pair, int k);

}  // namespace nadbound
