#include "nadbound/twolevel.hpp"

#include <cmath>
#include <limits>

namespace nadbound {

namespace {

const Complex kI(0.0, 1.0);

Matrix pauli(double x, double y, double z) {
  Matrix m(2, 2);
  m << Complex(z, 0), Complex(x, -y), Complex(x, y), Complex(-z, 0);
  return m;
}

/// Multiplies v by a unit phase so that entry `idx` becomes real positive.
void fix_phase(ComplexVector& v, Eigen::Index idx) {
  const Complex pivot = v[idx];
  if (std::abs(pivot) > 0.0) v *= std::conj(pivot) / std::abs(pivot);
}

Eigen::Index largest_entry(const ComplexVector& v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  return idx;
}

}  // namespace

double bloch_rate(const Eigen::Vector3d& h, const Eigen::Vector3d& h_dot) {
  const double r2 = h.squaredNorm();
  if (!(r2 > 0.0)) {
    throw std::invalid_argument("bloch_rate: h = 0 is a degenerate point");
  }
  return h.cross(h_dot).norm() / (2.0 * r2);
}

BlochPath bloch_path(const ParameterSchedule& sched, int samples) {
  if (sched.param_count() != 3) {
    throw std::invalid_argument("bloch_path: schedule must carry (hx, hy, hz)");
  }
  if (samples < 2) {
    throw std::invalid_argument("bloch_path: need at least two samples");
  }
  const double T = sched.duration();
  BlochPath path;
  path.t.resize(samples);
  path.radius.resize(samples);
  path.theta.resize(samples);
  path.phi.resize(samples);
  path.theta_dot.resize(samples);
  path.phi_dot.resize(samples);

  double phi_prev = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double t = T * static_cast<double>(k) / (samples - 1);
    const RealVector h = sched.value(t);
    const RealVector hd = sched.derivative(t);
    const double x = h[0], y = h[1], z = h[2];
    const double r = h.norm();
    if (!(r > 0.0)) {
      throw std::invalid_argument("bloch_path: |h| = 0 at t = " + std::to_string(t));
    }
    const double rho = std::hypot(x, y);
    path.t[k] = t;
    path.radius[k] = r;
    path.theta[k] = std::atan2(rho, z);

    if (rho < 1e-12 * r) {
      // Pole: phi is undefined; keep it continuous and let sin(theta) = 0
      // suppress the azimuthal term. theta moves at the transverse speed.
      path.phi[k] = phi_prev;
      path.phi_dot[k] = 0.0;
      const double transverse = std::hypot(hd[0], hd[1]);
      path.theta_dot[k] = (z > 0.0 ? transverse : -transverse) / r;
    } else {
      double phi = std::atan2(y, x);
      if (k > 0) {
        phi += 2.0 * M_PI * std::round((phi_prev - phi) / (2.0 * M_PI));
      }
      path.phi[k] = phi;
      const double rho_dot = (x * hd[0] + y * hd[1]) / rho;
      path.theta_dot[k] = (rho_dot * z - rho * hd[2]) / (r * r);
      path.phi_dot[k] = (x * hd[1] - y * hd[0]) / (rho * rho);
    }
    phi_prev = path.phi[k];
  }
  return path;
}

double trajectory_length(const BlochPath& path) {
  const std::size_t n = path.t.size();
  if (n < 2 || path.theta.size() != n || path.phi_dot.size() != n ||
      path.theta_dot.size() != n) {
    throw std::invalid_argument("trajectory_length: malformed path");
  }
  std::vector<double> speed(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = std::sin(path.theta[k]);
    speed[k] = std::hypot(path.theta_dot[k], path.phi_dot[k] * s);
  }
  return 0.5 * simpson_integral(path.t, speed);
}

AnnealingCheck annealing_bound_check(const ParameterSchedule& sched,
                                     int grid_segments, double dt_max) {
  if (sched.param_count() != 3) {
    throw std::invalid_argument("annealing_bound_check: schedule must carry (hx, hy, hz)");
  }
  const double T = sched.duration();
  const RealVector a = sched.value(0.0);
  const RealVector b = sched.value(T);
  const double tol_a = 1e-9 * a.norm();
  const double tol_b = 1e-9 * b.norm();
  if (std::abs(a[1]) > tol_a || std::abs(a[2]) > tol_a || a[0] == 0.0 ||
      std::abs(b[0]) > tol_b || std::abs(b[1]) > tol_b || b[2] == 0.0) {
    throw std::invalid_argument(
        "annealing_bound_check: endpoints must run from the x axis to the z axis");
  }

  const BlochPath path = bloch_path(sched, std::max(grid_segments + 1, 2001));
  AnnealingCheck result;
  result.length_half = trajectory_length(path);
  result.bound = result.length_half * result.length_half;

  TwoLevelFieldModel model;
  const std::vector<double> grid = uniform_grid(T, grid_segments);
  PropagateOptions opts;
  opts.dt_max = dt_max;
  const std::vector<Matrix> u =
      propagate(model, sched, grid, PropagationMode::Dynamical, opts);
  const SpectralFrame f0 = spectral_frame(model, sched, 0.0);
  const SpectralFrame fT = spectral_frame(model, sched, T);
  result.measured_p = transition_rate(u.back(), f0, fT, 0, 1);
  result.certified = result.measured_p <= result.bound + 1e-3;
  return result;
}

TwoLevelReduction::TwoLevelReduction(const HamiltonianModel& model,
                                     const ParameterSchedule& sched,
                                     double delta_deg)
    : model_(model),
      sched_(sched),
      delta_deg_(delta_deg),
      last_t_(-std::numeric_limits<double>::infinity()) {}

Matrix TwoLevelReduction::projected_h(double t) {
  if (primed_ && t < last_t_) {
    throw std::invalid_argument("projected_h: queries must be non-decreasing");
  }
  const SpectralFrame frame = spectral_frame(model_, sched_, t, delta_deg_);
  if (frame.level_count() < 2 || frame.levels[0].multiplicity != 1 ||
      frame.levels[1].multiplicity != 1) {
    throw GapClosureError(
        "projected_h: bottom level pair is degenerate at t = " +
            std::to_string(t),
        t);
  }
  ComplexVector v0 = frame.eig.vectors.col(0);
  ComplexVector v1 = frame.eig.vectors.col(1);
  if (!primed_) {
    fix_phase(v0, largest_entry(v0));
    fix_phase(v1, largest_entry(v1));
  } else {
    const Complex c0 = (gauge0_.adjoint() * v0)(0);
    const Complex c1 = (gauge1_.adjoint() * v1)(0);
    if (std::abs(c0) < 0.5 || std::abs(c1) < 0.5) {
      throw GapClosureError(
          "projected_h: eigenvector tracking lost at t = " + std::to_string(t) +
              "; refine the grid",
          t);
    }
    v0 *= std::conj(c0) / std::abs(c0);
    v1 *= std::conj(c1) / std::abs(c1);
  }

  const double e0 = frame.levels[0].energy;
  const double e1 = frame.levels[1].energy;
  const Complex overlap =
      (v0.adjoint() * frame.h_dot * v1)(0) / Complex(e1 - e0, 0.0);

  gauge0_ = std::move(v0);
  gauge1_ = std::move(v1);
  last_t_ = t;
  primed_ = true;
  return kHbar * pauli(overlap.imag(), overlap.real(), 0.0) +
         pauli(0.0, 0.0, (e0 - e1) / 2.0);
}

Matrix project_two_level(const HamiltonianModel& model,
                         const ParameterSchedule& sched, double t) {
  TwoLevelReduction reduction(model, sched);
  return reduction.projected_h(t);
}

ReductionResult reduce_two_level_run(const HamiltonianModel& model,
                                     const ParameterSchedule& sched,
                                     const std::vector<double>& grid,
                                     const PropagateOptions& opts) {
  const std::vector<Matrix> u_full =
      propagate(model, sched, grid, PropagationMode::Dynamical, opts);
  const SpectralFrame f0 =
      spectral_frame(model, sched, grid.front(), opts.delta_deg);
  const SpectralFrame fT =
      spectral_frame(model, sched, grid.back(), opts.delta_deg);

  ReductionResult result;
  result.p01_full = transition_rate(u_full.back(), f0, fT, 0, 1);
  const double p00_full = transition_rate(u_full.back(), f0, fT, 0, 0);
  result.leakage = 1.0 - p00_full - result.p01_full;

  // The projected system lives in the adiabatic-frame amplitudes (a_0, a_1),
  // so the transition probability is the (1,0) entry of its propagator.
  TwoLevelReduction reduction(model, sched, opts.delta_deg);
  reduction.projected_h(0.0);
  const double dt_max =
      opts.dt_max > 0.0 ? opts.dt_max : sched.duration() / 2000.0;
  Matrix u2 = Matrix::Identity(2, 2);
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double span = grid[k + 1] - grid[k];
    const int ns = std::max(1, static_cast<int>(std::ceil(span / dt_max)));
    const double h = span / ns;
    for (int s = 0; s < ns; ++s) {
      const double t_mid = grid[k] + (s + 0.5) * h;
      u2 = expi_step(reduction.projected_h(t_mid), h) * u2;
    }
  }
  result.p01_reduced = std::norm(u2(1, 0));
  return result;
}

}  // namespace nadbound
