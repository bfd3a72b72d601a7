#include "nadbound/twolevel.hpp"

#include <doctest.h>

#include "helpers.hpp"

using namespace nadbound;
using namespace nadbound::testing;

namespace {

constexpr double kPi = 3.14159265358979323846;

RealVector vec3(double x, double y, double z) {
  RealVector v(3);
  v << x, y, z;
  return v;
}

Matrix field_matrix(const Eigen::Vector3d& h) {
  Matrix m(2, 2);
  m << Complex(h.z(), 0), Complex(h.x(), -h.y()), Complex(h.x(), h.y()),
      Complex(-h.z(), 0);
  return m;
}

}  // namespace

TEST_CASE("bloch rate on fixed fields") {
  CHECK(bloch_rate({1, 0, 0}, {2, 0, 0}) == 0.0);  // radial motion only
  CHECK(bloch_rate({1, 0, 0}, {0, 1.6, 0}) == doctest::Approx(0.8));
  // Doubling the field halves nothing: rate depends on direction speed.
  CHECK(bloch_rate({2, 0, 0}, {0, 3.2, 0}) == doctest::Approx(0.8));
  CHECK_THROWS_AS(bloch_rate({0, 0, 0}, {1, 0, 0}), std::invalid_argument);
}

TEST_CASE("bloch rate agrees with the spectral qgt on random draws") {
  auto rng = make_rng(311);
  std::normal_distribution<double> gauss(0.0, 1.0);
  int used = 0;
  for (int rep = 0; rep < 1000; ++rep) {
    const Eigen::Vector3d h(gauss(rng), gauss(rng), gauss(rng));
    const Eigen::Vector3d hd(gauss(rng), gauss(rng), gauss(rng));
    if (h.norm() < 1e-3) continue;
    const SpectralFrame frame =
        spectral_frame_from(field_matrix(h), field_matrix(hd), 0.0);
    if (frame.level_count() != 2) continue;
    ++used;
    const double rate = bloch_rate(h, hd);
    CHECK(std::abs(qgt_norm(frame, 0) - rate) <= 1e-10 * std::max(1.0, rate));
    CHECK(std::abs(qgt_norm(frame, 1) - rate) <= 1e-10 * std::max(1.0, rate));
  }
  CHECK(used >= 990);
}

TEST_CASE("bloch path coordinates on the annealing preset") {
  const auto sched = ParameterSchedule::annealing_preset(2.0);
  const BlochPath path = bloch_path(sched, 501);
  REQUIRE(path.t.size() == 501);
  // Start: h = (-1, 0, 0) is on the equator at phi = pi.
  CHECK(path.theta.front() == doctest::Approx(kPi / 2.0));
  CHECK(path.phi.front() == doctest::Approx(kPi));
  // End: h = (0, 0, -1) is the south pole; phi_dot is forced to 0 there.
  CHECK(path.theta.back() == doctest::Approx(kPi));
  CHECK(path.phi_dot.back() == 0.0);
  for (std::size_t k = 0; k < path.t.size(); ++k) {
    CHECK(path.radius[k] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(path.theta[k] >= kPi / 2.0 - 1e-12);  // monotone descent to the pole
  }
}

TEST_CASE("bloch path unwraps phi across the branch cut") {
  const auto sched = ParameterSchedule::linear(1.0, vec3(-1, -0.2, 0), vec3(-1, 0.2, 0));
  const BlochPath path = bloch_path(sched, 401);
  for (std::size_t k = 1; k < path.t.size(); ++k) {
    CHECK(std::abs(path.phi[k] - path.phi[k - 1]) < 0.05);
  }
  const double total = path.phi.back() - path.phi.front();
  const double expect = -2.0 * std::atan(0.2);  // continuous sweep past -pi
  CHECK(total == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("trajectory length of canonical paths") {
  // Constant path.
  const auto constant = ParameterSchedule::linear(1.0, vec3(0.3, 0.1, 0.7), vec3(0.3, 0.1, 0.7));
  CHECK(trajectory_length(bloch_path(constant)) <= 1e-12);

  // Quarter great circle, trig time law.
  const auto quarter = ParameterSchedule::annealing_preset(1.0);
  CHECK(trajectory_length(bloch_path(quarter)) ==
        doctest::Approx(kPi / 4.0).epsilon(1e-8));

  // Full equator loop from dense piecewise-cubic samples.
  std::vector<ScheduleKnot> knots;
  const int n = 200;
  for (int i = 0; i <= n; ++i) {
    const double phi = 2.0 * kPi * i / n;
    knots.push_back({static_cast<double>(i) / n, vec3(std::cos(phi), std::sin(phi), 0.0)});
  }
  const auto equator = ParameterSchedule::piecewise_cubic(knots);
  CHECK(trajectory_length(bloch_path(equator)) ==
        doctest::Approx(kPi).epsilon(1e-4));
}

TEST_CASE("trajectory length is reparameterization invariant") {
  // The same quarter great circle traversed with the trig law and along the
  // straight chord (radius varies, time law wildly different).
  const double trig = trajectory_length(bloch_path(ParameterSchedule::annealing_preset(3.0)));
  const auto chord = ParameterSchedule::linear(1.0, vec3(-1, 0, 0), vec3(0, 0, -1));
  const double lin = trajectory_length(bloch_path(chord));
  CHECK(std::abs(trig - lin) <= 1e-6);

  // qgt_bound_integral equals trajectory_length^2 for two-level runs.
  TwoLevelFieldModel model;
  const auto frames = frames_on_grid(model, chord, uniform_grid(1.0, 400));
  CHECK(qgt_bound_integral(frames, 0) ==
        doctest::Approx(lin * lin).epsilon(1e-8));
}

TEST_CASE("annealing bound check certifies the geodesic preset") {
  const AnnealingCheck slow = annealing_bound_check(ParameterSchedule::annealing_preset(10.0));
  CHECK(slow.length_half == doctest::Approx(kPi / 4.0).epsilon(1e-6));
  CHECK(slow.bound == doctest::Approx(0.616850).epsilon(1e-5));
  CHECK(slow.certified);
  CHECK(slow.measured_p <= slow.bound);
}

TEST_CASE("annealing bound check reproduces the quench limit") {
  const AnnealingCheck quench = annealing_bound_check(ParameterSchedule::annealing_preset(1e-4));
  CHECK(quench.measured_p == doctest::Approx(0.5).epsilon(2e-3));
  CHECK(quench.certified);
}

TEST_CASE("annealing bound check in the adiabatic limit") {
  const AnnealingCheck adiabatic = annealing_bound_check(ParameterSchedule::annealing_preset(50.0));
  CHECK(adiabatic.measured_p <= 1e-2);
  CHECK(adiabatic.certified);
}

TEST_CASE("annealing bound check rejects off-axis endpoints") {
  const auto bad = ParameterSchedule::linear(1.0, vec3(0, 1, 0), vec3(0, 0, -1));
  CHECK_THROWS_AS(annealing_bound_check(bad), std::invalid_argument);
}

TEST_CASE("projected Hamiltonian of a constant schedule is diagonal") {
  TransverseFieldIsingModel model(2);
  RealVector lambda(2);
  lambda << 1.0, 0.4;
  const auto sched = ParameterSchedule::linear(
      1.0, lambda, lambda);
  const Matrix ht = project_two_level(model, sched, 0.5);
  CHECK(std::abs(ht(0, 1)) <= 1e-12);
  CHECK(std::abs(ht(1, 0)) <= 1e-12);
  const SpectralFrame frame = spectral_frame(model, sched, 0.5);
  const double gap = frame.levels[1].energy - frame.levels[0].energy;
  CHECK(ht(0, 0).real() == doctest::Approx(-gap / 2.0).epsilon(1e-10));
  CHECK(ht(1, 1).real() == doctest::Approx(gap / 2.0).epsilon(1e-10));
}

TEST_CASE("projected reduction is exact for a two-level model") {
  TwoLevelFieldModel model;
  const double T = 2.0;
  const auto sched = ParameterSchedule::annealing_preset(T);
  PropagateOptions opts;
  opts.dt_max = 2e-5;
  const ReductionResult res =
      reduce_two_level_run(model, sched, uniform_grid(T, 100), opts);
  CHECK(res.leakage <= 1e-10);
  CHECK(std::abs(res.p01_reduced - res.p01_full) <= 1e-8);
  CHECK(res.p01_full > 1e-3);  // diabatic enough to be a real comparison
}

TEST_CASE("projected reduction rejects a degenerate bottom pair") {
  // Exactly doubly degenerate ground level at every lambda.
  class DegeneratePair final : public HamiltonianModel {
   public:
    int dim() const override { return 4; }
    int param_count() const override { return 1; }
    std::string family() const override { return "degenerate-pair"; }
    Matrix evaluate(const RealVector& lambda) const override {
      Matrix h = Matrix::Zero(4, 4);
      h(2, 2) = 2.0 + lambda[0];
      h(3, 3) = 3.0;
      return h;
    }
  };
  DegeneratePair model;
  const auto sched = ParameterSchedule::linear(1.0, RealVector::Zero(1), RealVector::Ones(1));
  TwoLevelReduction reduction(model, sched);
  CHECK_THROWS_AS(reduction.projected_h(0.0), GapClosureError);
}

TEST_CASE("reduction on a gapped Ising chain tracks the full dynamics") {
  // N=3 with a longitudinal field: bottom pair well separated from the rest.
  TransverseFieldIsingModel model(3, true);
  RealVector from(3), to(3);
  from << 1.0, 1.8, 0.4;
  to << 1.0, 0.4, 0.4;
  const double T = 6.0;
  const auto sched = ParameterSchedule::trig_annealing(T, from, to);
  PropagateOptions opts;
  opts.dt_max = 1e-3;
  const ReductionResult res =
      reduce_two_level_run(model, sched, uniform_grid(T, 300), opts);
  CHECK(res.leakage <= 0.01);
  CHECK(res.p01_full > 1e-6);
  CHECK(std::abs(res.p01_reduced - res.p01_full) <= 0.2 * res.p01_full);
}
