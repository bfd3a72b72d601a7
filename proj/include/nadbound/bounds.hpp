#pragma once

#include "nadbound/dynamics.hpp"

#include <string>
#include <vector>

namespace nadbound {

/// Composite Simpson over samples f on the (increasing, possibly non-uniform)
/// grid t. An odd interval count gets a quadratic end correction, so the rule
/// stays second order. Two points fall back to the trapezoid.
double simpson_integral(const std::vector<double>& t,
                        const std::vector<double>& f);

/// Simpson restricted to the prefix t[0..k_end].
double simpson_integral_prefix(const std::vector<double>& t,
                               const std::vector<double>& f, int k_end);

/// One Richardson level: compares Simpson on all nodes against every other
/// node; true when they agree within rel_tol (relative to the fine value).
bool quadrature_converged(const std::vector<double>& t,
                          const std::vector<double>& f, double rel_tol);

/// [ integral_0^t ||(1 - P_m) Pdot_m|| dt' ]^2, the transition-rate bound.
double qgt_bound_integral(const std::vector<SpectralFrame>& frames, int m);

/// 1 - qgt_bound_integral(frames, n). Can go negative (then vacuous).
double remaining_bound(const std::vector<SpectralFrame>& frames, int n);

struct UniversalBounds {
  double transition;  // [(1/hbar) integral ||H_cd||]^2
  double remaining;   // 1 - transition
};

UniversalBounds universal_bounds(const std::vector<SpectralFrame>& frames);

struct AptRates {
  double pair_rate;   // dt^2 ||P_n Pdot_m||^2
  double level_rate;  // dt^2 ||(1 - P_m) Pdot_m||^2 >= pair_rate
};

AptRates apt_instantaneous_rates(const SpectralFrame& frame, double delta_t,
                                 int n, int m);

/// ||P_m(t + dt) P_n(t) P_m(t + dt)||, the exact quench transfer between two
/// frames; agrees with dt^2 ||P_n Pdot_m||^2 up to O(dt^3).
double quench_transfer(const SpectralFrame& frame_a,
                       const SpectralFrame& frame_b, int n, int m);

/// Bures angle arccos(sqrt(F)) with Uhlmann fidelity
/// F = (Tr sqrt(sqrt(rho_i) rho_f sqrt(rho_i)))^2. Inputs must be states:
/// Hermitian, PSD and unit trace within 1e-10. Pure states take the fast
/// path F = Tr(rho_i rho_f).
double bures_angle(const Matrix& rho_i, const Matrix& rho_f);

struct QslChain {
  double bures_angle;      // L between rho_m(0) and U_A rho_m(0) U_A^dag
  double cd_std_integral;  // (1/hbar) integral of Delta H_cd under rho_m(t)
  double qgt_integral;     // integral of ||(1 - P_m) Pdot_m||
};

/// Evaluates the speed-limit chain L <= cd_std_integral <= qgt_integral for a
/// state rho_m0 supported in level m at t = 0 (leakage beyond 1e-10 rejects).
QslChain qsl_chain(const std::vector<SpectralFrame>& frames,
                   const PropagatorPair& pair, int m, const Matrix& rho_m0);

/// One certified (n, m, t) record. Off-diagonal rows carry the transition
/// bounds and margin = qgt_bound - p; diagonal rows carry the remaining
/// bounds and margin = p - remaining_bound. Unused bound cells are NaN.
struct RateRecord {
  double t = 0.0;
  int n = 0;
  int m = 0;
  double p = 0.0;
  double qgt_bound = 0.0;
  double universal_bound = 0.0;
  double remaining_bound = 0.0;
  double margin = 0.0;
  std::string warn;
};

struct AptRecord {
  double t = 0.0;
  int n = 0;
  int m = 0;
  double pair_rate = 0.0;
  double level_rate = 0.0;
};

struct QslRecord {
  int m = 0;
  double bures_angle = 0.0;
  double cd_std_integral = 0.0;
  double qgt_integral = 0.0;
};

struct BoundWarning {
  double t = 0.0;
  std::string message;
};

struct BoundReport {
  std::string run_id = "run";
  double epsilon_num = 1e-3;
  std::vector<RateRecord> records;
  std::vector<AptRecord> apt;
  std::vector<QslRecord> qsl;
  std::vector<BoundWarning> warnings;
};

struct ReportOptions {
  std::vector<int> levels;       // empty: every level of the initial frame
  std::vector<int> checkpoints;  // grid indices; empty: every node
  double epsilon_num = 1e-3;
  std::string run_id = "run";
};

/// Measures p_nm at the checkpoints and pairs each value with its bounds.
/// Near-crossing frames and non-converged quadratures become warnings.
BoundReport assemble_report(const std::vector<SpectralFrame>& frames,
                            const PropagatorPair& pair,
                            const ReportOptions& opts = {});

/// Records whose signed margin is below -epsilon_num.
std::vector<RateRecord> failed_certifications(const BoundReport& report);

std::string report_to_json(const BoundReport& report);

/// Long-format CSV: run_id,t,n,m,p,qgt_bound,universal_bound,
/// remaining_bound,margin,warn. NaN cells are left empty; numbers use %.17g
/// so identical runs are bit-identical.
std::string report_to_csv(const BoundReport& report);

std::vector<RateRecord> read_timeseries_csv(const std::string& text);

}  // namespace nadbound
