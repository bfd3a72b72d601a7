#pragma once

#include "nadbound/bounds.hpp"

namespace nadbound {

/// ||(1 - P_pm) Pdot_pm|| for H = h . sigma, evaluated as |h x h_dot| / 2|h|^2.
/// Rejects h = 0 (level degeneracy, direction undefined).
double bloch_rate(const Eigen::Vector3d& h, const Eigen::Vector3d& h_dot);

/// Spherical-coordinate samples of a 3-parameter schedule (hx, hy, hz):
/// radius |h| > 0, polar theta in [0, pi], azimuth phi unwrapped to stay
/// continuous, and the angular velocities. At the poles phi continues its
/// previous value and phi_dot is set to 0 (sin(theta) kills the term).
struct BlochPath {
  std::vector<double> t;
  std::vector<double> radius;
  std::vector<double> theta;
  std::vector<double> phi;
  std::vector<double> theta_dot;
  std::vector<double> phi_dot;
};

BlochPath bloch_path(const ParameterSchedule& sched, int samples = 2001);

/// Half the Bloch-sphere arc length: (1/2) integral sqrt(theta_dot^2 +
/// phi_dot^2 sin^2 theta) dt. Reparameterization-invariant.
double trajectory_length(const BlochPath& path);

struct AnnealingCheck {
  double length_half;  // half trajectory length
  double bound;        // length_half^2
  double measured_p;   // p_{-+}(T) from full propagation
  bool certified;      // measured_p <= bound + 1e-3
};

/// Propagates H = h_t . sigma over the schedule and compares p_{-+}(T)
/// against the squared half-length bound. The schedule must run between an
/// x-axis start (hy = hz = 0) and a z-axis end (hx = hy = 0).
AnnealingCheck annealing_bound_check(const ParameterSchedule& sched,
                                     int grid_segments = 2000,
                                     double dt_max = -1.0);

/// Projected two-level Hamiltonian on the bottom pair of levels, queried at
/// non-decreasing times. The eigenvector gauge is fixed by parallel transport
/// against the previous query (first query: largest entry real positive), so
/// H~(t) is smooth and its propagation meaningful.
class TwoLevelReduction {
 public:
  TwoLevelReduction(const HamiltonianModel& model,
                    const ParameterSchedule& sched, double delta_deg = -1.0);

  /// H~ = Im<0|d_t 1> X + Re<0|d_t 1> Y + ((E_0 - E_1)/2) Z with
  /// <0|d_t 1> = <0|Hdot|1> / (E_1 - E_0). Rejects a degenerate bottom pair.
  Matrix projected_h(double t);

 private:
  const HamiltonianModel& model_;
  const ParameterSchedule& sched_;
  double delta_deg_;
  double last_t_;
  bool primed_ = false;
  ComplexVector gauge0_;
  ComplexVector gauge1_;
};

/// One-shot projection at time t with the canonical (first-query) gauge.
Matrix project_two_level(const HamiltonianModel& model,
                         const ParameterSchedule& sched, double t);

struct ReductionResult {
  double p01_reduced;  // transition probability from propagating H~
  double p01_full;     // p_01 from the full model
  double leakage;      // 1 - p_00 - p_01 in the full model at t = T
};

/// Runs the projected two-level system alongside the full model on the same
/// grid. Validity of the reduction is reported via leakage, not enforced.
ReductionResult reduce_two_level_run(const HamiltonianModel& model,
                                     const ParameterSchedule& sched,
                                     const std::vector<double>& grid,
                                     const PropagateOptions& opts = {});

}  // namespace nadbound
