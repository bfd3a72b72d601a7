#pragma once

#include "nadbound/bounds.hpp"

#include <cstdint>
#include <utility>

namespace nadbound {

/// A candidate parameter path: fixed endpoints, movable interior knots on a
/// uniform time grid, and the best objective seen when it was produced.
/// trace records (evaluation count, best objective so far); monotone.
struct PathCandidate {
  RealVector from;
  RealVector to;
  double T = 1.0;
  std::vector<RealVector> interior;
  double objective = 0.0;
  std::vector<std::pair<int, double>> trace;
};

/// Piecewise-cubic schedule through the candidate's knots, endpoints frozen,
/// knot times uniform on [0, T].
ParameterSchedule path_schedule(const RealVector& from, const RealVector& to,
                                const std::vector<RealVector>& interior,
                                double T);

struct OptimizeOptions {
  int n_knots = 6;           // interior knots
  int budget = 2000;         // total objective evaluations
  int restarts = 3;          // simplex restarts (first starts from the chord)
  std::uint64_t seed = 1;
  int grid_segments = 200;   // quadrature resolution of the objective
  double delta_deg = -1.0;
  double T = 1.0;
};

/// Minimizes the path length integral ||(1 - P_m) Pdot_m|| dt over interior
/// knots with a Nelder-Mead simplex. The objective is the square root of the
/// transition bound and is reparameterization-invariant, so only the path
/// geometry is optimized; probed paths that close a gap (or lose level m)
/// score +inf and are stepped around, not fatal.
PathCandidate optimize_schedule(const HamiltonianModel& model,
                                const RealVector& from, const RealVector& to,
                                int m, const OptimizeOptions& opts = {});

/// Re-times a schedule so the integrand ||(1 - P_m) Pdot_m|| is constant in
/// t, preserving the geometric path and the total duration. Returns a
/// tabulated schedule with `knots` control points. Rejects zero-length paths.
ParameterSchedule arc_length_reparameterize(const HamiltonianModel& model,
                                            const ParameterSchedule& sched,
                                            int m, int samples = 2001,
                                            int knots = 401,
                                            double delta_deg = -1.0);

}  // namespace nadbound
