#include "nadbound/bounds.hpp"

#include <doctest.h>
#include <json.hpp>

#include "helpers.hpp"

using namespace nadbound;
using namespace nadbound::testing;

namespace {

RealVector vec3(double x, double y, double z) {
  RealVector v(3);
  v << x, y, z;
  return v;
}

RealVector vec1(double x) {
  RealVector v(1);
  v << x;
  return v;
}

constexpr double kPi = 3.14159265358979323846;

// Two 2-level blocks rotating on the equator at different speeds but with
// identical spectra +-1, so both levels stay exactly doubly degenerate while
// the in-level dynamics is asymmetric.
class TwinRotorModel final : public HamiltonianModel {
 public:
  TwinRotorModel(double wa, double wb) : wa_(wa), wb_(wb) {}
  int dim() const override { return 4; }
  int param_count() const override { return 1; }
  std::string family() const override { return "twin-rotor"; }
  Matrix evaluate(const RealVector& lambda) const override {
    auto block = [](double angle) {
      Matrix b(2, 2);
      b << 0.0, std::polar(1.0, -angle), std::polar(1.0, angle), 0.0;
      return b;
    };
    Matrix h = Matrix::Zero(4, 4);
    h.block(0, 0, 2, 2) = block(wa_ * lambda[0]);
    h.block(2, 2, 2, 2) = block(wb_ * lambda[0] + 0.3);
    return h;
  }

 private:
  double wa_;
  double wb_;
};

}  // namespace

TEST_CASE("simpson integral on fixed grids") {
  // Two points: trapezoid.
  CHECK(simpson_integral({0.0, 2.0}, {1.0, 3.0}) == doctest::Approx(4.0));

  // Uniform even panel count integrates cubics exactly.
  std::vector<double> t, f;
  for (int i = 0; i <= 8; ++i) {
    const double x = i / 8.0;
    t.push_back(x);
    f.push_back(x * x * x - 2.0 * x + 1.0);
  }
  CHECK(simpson_integral(t, f) == doctest::Approx(0.25).epsilon(1e-14));

  // Odd interval count: the half-panel tail is exact for quadratics.
  std::vector<double> tq, fq;
  for (int i = 0; i <= 9; ++i) {
    const double x = (i < 9) ? i / 8.0 : 1.25;
    tq.push_back(x);
    fq.push_back(3.0 * x * x - x + 0.5);
  }
  const double exact = std::pow(1.25, 3) - 1.25 * 1.25 / 2.0 + 0.5 * 1.25;
  CHECK(simpson_integral(tq, fq) == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("simpson converges at fourth order on smooth integrands") {
  auto integral = [](int n) {
    std::vector<double> t, f;
    for (int i = 0; i <= n; ++i) {
      const double x = kPi * i / n;
      t.push_back(x);
      f.push_back(std::sin(x));
    }
    return simpson_integral(t, f);
  };
  const double e1 = std::abs(integral(16) - 2.0);
  const double e2 = std::abs(integral(32) - 2.0);
  CHECK(e1 / e2 >= 14.0);
  CHECK(e2 <= 2e-6);
}

TEST_CASE("simpson handles non-uniform grids") {
  // Jittered nodes against the analytic integral of exp.
  auto rng = make_rng(211);
  std::uniform_real_distribution<double> jitter(-0.3, 0.3);
  std::vector<double> t, f;
  const int n = 200;
  for (int i = 0; i <= n; ++i) {
    double x = i / static_cast<double>(n);
    if (i > 0 && i < n) x += jitter(rng) / n;
    t.push_back(x);
    f.push_back(std::exp(x));
  }
  CHECK(simpson_integral(t, f) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-8));
}

TEST_CASE("simpson prefix is consistent with full evaluation") {
  std::vector<double> t, f;
  for (int i = 0; i <= 10; ++i) {
    t.push_back(0.2 * i);
    f.push_back(std::cos(0.2 * i));
  }
  CHECK(simpson_integral_prefix(t, f, 10) ==
        doctest::Approx(simpson_integral(t, f)));
  CHECK(simpson_integral_prefix(t, f, 0) == 0.0);
  const std::vector<double> t5(t.begin(), t.begin() + 6);
  const std::vector<double> f5(f.begin(), f.begin() + 6);
  CHECK(simpson_integral_prefix(t, f, 5) ==
        doctest::Approx(simpson_integral(t5, f5)));
}

TEST_CASE("quadrature convergence flag") {
  std::vector<double> t, smooth, rough;
  for (int i = 0; i <= 64; ++i) {
    const double x = i / 64.0;
    t.push_back(x);
    smooth.push_back(std::sin(3.0 * x));
    // Aliasing: vanishes on the coarse (stride-2) subset but not between.
    rough.push_back(i % 2 == 0 ? 0.0 : 1.0);
  }
  CHECK(quadrature_converged(t, smooth, 1e-4));
  CHECK(!quadrature_converged(t, rough, 1e-4));
}

TEST_CASE("qgt bound of a constant schedule is zero") {
  TwoLevelFieldModel model;
  const auto sched = ParameterSchedule::linear(1.0, vec3(0.7, 0, 0.2), vec3(0.7, 0, 0.2));
  const auto frames = frames_on_grid(model, sched, uniform_grid(1.0, 20));
  CHECK(qgt_bound_integral(frames, 0) <= 1e-20);
  CHECK(remaining_bound(frames, 0) == doctest::Approx(1.0));
  const auto u = universal_bounds(frames);
  CHECK(u.transition <= 1e-20);
  CHECK(u.remaining == doctest::Approx(1.0));
}

TEST_CASE("quarter great circle gives the squared pi/4 bound") {
  TwoLevelFieldModel model;
  const auto sched = ParameterSchedule::annealing_preset(3.0);
  const auto frames = frames_on_grid(model, sched, uniform_grid(3.0, 800));
  const double expect = (kPi / 4.0) * (kPi / 4.0);  // 0.616850...
  CHECK(qgt_bound_integral(frames, 0) == doctest::Approx(expect).epsilon(1e-8));
  CHECK(qgt_bound_integral(frames, 1) == doctest::Approx(expect).epsilon(1e-8));
  CHECK(remaining_bound(frames, 0) == doctest::Approx(1.0 - expect).epsilon(1e-8));
  CHECK(qgt_bound_integral(frames, 0) == doctest::Approx(0.616850).epsilon(1e-5));
}

TEST_CASE("two-level universal bound coincides with the qgt bound") {
  auto rng = make_rng(223);
  TwoLevelFieldModel model;
  for (int rep = 0; rep < 10; ++rep) {
    const auto sched = random_smooth_schedule(rng, 1.0, 3, 3, 0.8);
    // Reject draws whose field passes too close to zero for clean frames.
    bool ok = true;
    for (int i = 0; i <= 100; ++i) {
      if (sched.value(i / 100.0).norm() < 0.2) ok = false;
    }
    if (!ok) continue;
    const auto frames = frames_on_grid(model, sched, uniform_grid(1.0, 150));
    const auto u = universal_bounds(frames);
    for (int m = 0; m < 2; ++m) {
      const double qgt = qgt_bound_integral(frames, m);
      CHECK(std::abs(qgt - u.transition) <= 1e-10 * std::max(1.0, qgt));
    }
  }
}

TEST_CASE("universal bound dominates per-level qgt bounds") {
  RandomSmoothModel model(601, 4, 1);
  const auto sched = ParameterSchedule::linear(1.0, vec1(0.0), vec1(1.0));
  const auto frames = frames_on_grid(model, sched, uniform_grid(1.0, 200));
  const auto u = universal_bounds(frames);
  for (int m = 0; m < 4; ++m) {
    CHECK(qgt_bound_integral(frames, m) <= u.transition + 1e-12);
  }
}

TEST_CASE("apt instantaneous rates") {
  // Rotating field at unit angular velocity: qgt = 1/2, so the level rate is
  // (dt^2)/4 and equals the pair rate for two levels.
  Matrix x(2, 2), y(2, 2);
  x << 0, 1, 1, 0;
  y << 0, Complex(0, -1), Complex(0, 1), 0;
  const SpectralFrame frame = spectral_frame_from(x, y, 0.0);
  const double dt = 1e-3;
  const AptRates rates = apt_instantaneous_rates(frame, dt, 0, 1);
  CHECK(rates.level_rate == doctest::Approx(2.5e-7).epsilon(1e-10));
  CHECK(rates.pair_rate == doctest::Approx(2.5e-7).epsilon(1e-10));

  const SpectralFrame still = spectral_frame_from(x, Matrix::Zero(2, 2), 0.0);
  const AptRates zero = apt_instantaneous_rates(still, dt, 0, 1);
  CHECK(zero.level_rate == 0.0);
  CHECK(zero.pair_rate == 0.0);

  // Pair rate never exceeds the level rate.
  auto rng = make_rng(229);
  for (int rep = 0; rep < 10; ++rep) {
    const SpectralFrame f = spectral_frame_from(random_hermitian(rng, 5),
                                                random_hermitian(rng, 5), 0.0);
    for (int n = 0; n < 5; ++n) {
      for (int m = 0; m < 5; ++m) {
        if (n == m) continue;
        const AptRates r = apt_instantaneous_rates(f, 0.01, n, m);
        CHECK(r.pair_rate <= r.level_rate + 1e-15);
      }
    }
  }
}

TEST_CASE("quench transfer between rotated frames") {
  auto frame_at = [](double angle) {
    Matrix h(2, 2), hd(2, 2);
    h << 0, std::polar(1.0, -angle), std::polar(1.0, angle), 0;
    hd << 0, Complex(0, -1) * std::polar(1.0, -angle),
        Complex(0, 1) * std::polar(1.0, angle), 0;
    return spectral_frame_from(h, hd, angle);
  };
  const SpectralFrame f0 = frame_at(0.0);
  CHECK(quench_transfer(f0, f0, 0, 1) <= 1e-15);

  // Equator rotation by dt: exact transfer sin^2(dt/2).
  const double dt = 1e-2;
  const SpectralFrame f1 = frame_at(dt);
  const double q = quench_transfer(f0, f1, 0, 1);
  CHECK(std::abs(q - dt * dt / 4.0) <= 1e-9);
  CHECK(q == doctest::Approx(std::pow(std::sin(dt / 2.0), 2)).epsilon(1e-10));
}

TEST_CASE("quench transfer approaches the dt^2 law at third order") {
  // Generic three-level family: the residual against dt^2 ||P_n Pdot_m||^2
  // carries a dt^3 term, so halving dt shrinks it by about 8.
  RandomSmoothModel model(607, 3, 1);
  const double t0 = 0.3;
  auto residual = [&](double dt) {
    const Matrix b = model.evaluate_param_deriv(vec1(0.0), 0);
    const SpectralFrame fa =
        spectral_frame_from(model.evaluate(vec1(t0)), b, t0);
    const SpectralFrame fb =
        spectral_frame_from(model.evaluate(vec1(t0 + dt)), b, t0 + dt);
    const AptRates rates = apt_instantaneous_rates(fa, dt, 0, 1);
    return std::abs(quench_transfer(fa, fb, 0, 1) - rates.pair_rate);
  };
  const double r1 = residual(1e-2);
  const double r2 = residual(5e-3);
  CHECK(r1 / r2 == doctest::Approx(8.0).epsilon(0.2));
}

TEST_CASE("bures angle on pure states") {
  const int d = 3;
  ComplexVector psi = ComplexVector::Zero(d);
  psi[0] = 1.0;
  ComplexVector perp = ComplexVector::Zero(d);
  perp[1] = 1.0;
  const Matrix rho = psi * psi.adjoint();
  CHECK(bures_angle(rho, rho) == doctest::Approx(0.0));
  CHECK(bures_angle(rho, perp * perp.adjoint()) == doctest::Approx(kPi / 2.0));
  const double alpha = 0.4;
  const ComplexVector mix = std::cos(alpha) * psi + std::sin(alpha) * perp;
  CHECK(bures_angle(rho, mix * mix.adjoint()) ==
        doctest::Approx(alpha).epsilon(1e-10));
}

TEST_CASE("bures angle matches the purification-sampling oracle") {
  auto rng = make_rng(233);
  const Matrix rho_i = random_density(rng, 4, 3);
  const Matrix rho_f = random_density(rng, 4, 4);
  const double fid_oracle = mc_uhlmann_fidelity(rho_i, rho_f, rng);
  const double angle = bures_angle(rho_i, rho_f);
  CHECK(std::acos(std::sqrt(fid_oracle)) == doctest::Approx(angle).epsilon(1e-3));
}

TEST_CASE("bures angle validates its inputs") {
  Matrix not_state = Matrix::Identity(2, 2);  // trace 2
  const Matrix pure = 0.5 * (Matrix::Identity(2, 2) + (Matrix(2, 2) << 1, 0, 0, -1).finished());
  CHECK_THROWS_AS(bures_angle(not_state, pure), std::invalid_argument);
  Matrix negative(2, 2);
  negative << 1.5, 0, 0, -0.5;
  CHECK_THROWS_AS(bures_angle(negative, pure), std::invalid_argument);
}

TEST_CASE("qsl chain on the two-level annealing path") {
  TwoLevelFieldModel model;
  const double T = 4.0;
  const auto sched = ParameterSchedule::annealing_preset(T);
  const auto grid = uniform_grid(T, 2000);
  const auto frames = frames_on_grid(model, sched, grid);
  const auto pair = make_propagator_pair(model, sched, grid);
  const Matrix rho0 = frames.front().levels[0].projector;
  const QslChain chain = qsl_chain(frames, pair, 0, rho0);

  // Pure non-degenerate transport: the two integrals coincide and equal the
  // quarter-circle length pi/4; the Bures angle obeys the chain.
  CHECK(chain.qgt_integral == doctest::Approx(kPi / 4.0).epsilon(1e-8));
  CHECK(std::abs(chain.cd_std_integral - chain.qgt_integral) <= 1e-8);
  CHECK(chain.bures_angle <= chain.cd_std_integral + 1e-8);
  CHECK(chain.cd_std_integral <= chain.qgt_integral + 1e-12);
  // The geodesic saturates the bound up to grid resolution.
  CHECK(chain.bures_angle == doctest::Approx(kPi / 4.0).epsilon(1e-5));
}

TEST_CASE("qsl chain is strict for asymmetric degenerate transport") {
  TwinRotorModel model(1.0, 0.35);
  const double T = 1.2;
  const auto sched = ParameterSchedule::linear(T, vec1(0.0), vec1(T));
  const auto grid = uniform_grid(T, 1200);
  const auto frames = frames_on_grid(model, sched, grid);
  REQUIRE(frames.front().level_count() == 2);
  REQUIRE(frames.front().levels[0].multiplicity == 2);
  const auto pair = make_propagator_pair(model, sched, grid);
  const Matrix rho0 = frames.front().levels[0].projector / 2.0;
  const QslChain chain = qsl_chain(frames, pair, 0, rho0);

  CHECK(chain.bures_angle <= chain.cd_std_integral + 1e-8);
  CHECK(chain.cd_std_integral <= chain.qgt_integral + 1e-8);
  // Asymmetric block speeds make the middle link strictly smaller: the
  // variance averages the two block rates while qgt takes the max.
  CHECK(chain.cd_std_integral <= 0.9 * chain.qgt_integral);

  // The CD drive is traceless inside each level along the exact transport.
  for (std::size_t k = 0; k < grid.size(); k += 300) {
    const Matrix rho_t = pair.u_a[k] * rho0 * pair.u_a[k].adjoint();
    const Matrix p = frames[k].levels[0].projector;
    const Matrix in_level = p * rho_t * p / (p * rho_t).trace().real();
    CHECK(std::abs((frames[k].h_cd * in_level).trace()) <= 1e-8);
  }
}

TEST_CASE("qsl chain rejects initial states outside the level") {
  TwoLevelFieldModel model;
  const auto sched = ParameterSchedule::annealing_preset(1.0);
  const auto grid = uniform_grid(1.0, 50);
  const auto frames = frames_on_grid(model, sched, grid);
  const auto pair = make_propagator_pair(model, sched, grid);
  const Matrix wrong = frames.front().levels[1].projector;
  CHECK_THROWS_AS(qsl_chain(frames, pair, 0, wrong), std::invalid_argument);
}

TEST_CASE("assembled report certifies a generic three-level run") {
  RandomSmoothModel model(613, 3, 1);
  const auto sched = ParameterSchedule::linear(1.0, vec1(0.0), vec1(1.0));
  const auto grid = uniform_grid(1.0, 120);
  const auto frames = frames_on_grid(model, sched, grid);
  const auto pair = make_propagator_pair(model, sched, grid);
  ReportOptions opts;
  opts.checkpoints = {0, 40, 80, 120};
  opts.run_id = "report-test";
  const BoundReport report = assemble_report(frames, pair, opts);

  REQUIRE(report.records.size() == 4 * 9);  // 4 checkpoints, 3x3 level pairs
  for (const auto& rec : report.records) {
    CHECK(rec.margin >= -report.epsilon_num);
    if (rec.n != rec.m) {
      CHECK(rec.qgt_bound <= rec.universal_bound + 1e-12);
      CHECK(rec.margin == doctest::Approx(rec.qgt_bound - rec.p));
      CHECK(std::isnan(rec.remaining_bound));
    } else {
      CHECK(rec.remaining_bound >= rec.universal_bound - 1e-12);
      CHECK(rec.margin == doctest::Approx(rec.p - rec.remaining_bound));
      CHECK(std::isnan(rec.qgt_bound));
    }
  }
  CHECK(failed_certifications(report).empty());

  // The level filter keeps only pairs among the levels of interest.
  ReportOptions filtered = opts;
  filtered.levels = {0, 2};
  const BoundReport small = assemble_report(frames, pair, filtered);
  CHECK(small.records.size() == 4 * 4);
  for (const auto& rec : small.records) {
    CHECK((rec.n == 0 || rec.n == 2));
    CHECK((rec.m == 0 || rec.m == 2));
  }
}

TEST_CASE("near-crossing frames produce warnings") {
  LandauZenerModel model(0.05);
  const auto sched = ParameterSchedule::linear(1.0, vec1(-1.0), vec1(1.0));
  const auto grid = uniform_grid(1.0, 100);
  const auto frames = frames_on_grid(model, sched, grid, 0.03);
  const auto pair = make_propagator_pair(model, sched, grid);
  bool any_near = false;
  for (const auto& f : frames) any_near = any_near || f.near_crossing;
  REQUIRE(any_near);
  const BoundReport report = assemble_report(frames, pair);
  bool warned = false;
  for (const auto& w : report.warnings) {
    if (w.message.find("near") != std::string::npos) warned = true;
  }
  CHECK(warned);
}

TEST_CASE("failed certifications pick out negative margins") {
  BoundReport report;
  report.epsilon_num = 1e-3;
  RateRecord ok;
  ok.margin = -5e-4;
  RateRecord bad;
  bad.t = 0.7;
  bad.margin = -2e-3;
  RateRecord nan_rec;
  nan_rec.margin = std::numeric_limits<double>::quiet_NaN();
  report.records = {ok, bad, nan_rec};
  const auto failed = failed_certifications(report);
  REQUIRE(failed.size() == 1);
  CHECK(failed[0].t == doctest::Approx(0.7));
}

TEST_CASE("CSV serialization round-trips and JSON parses") {
  BoundReport report;
  report.run_id = "abc123";
  RateRecord rec;
  rec.t = 0.125;
  rec.n = 0;
  rec.m = 1;
  rec.p = 1.0 / 3.0;
  rec.qgt_bound = 0.6168502750680849;
  rec.universal_bound = 0.62;
  rec.remaining_bound = std::numeric_limits<double>::quiet_NaN();
  rec.margin = rec.qgt_bound - rec.p;
  rec.warn = "near-crossing, refine";
  report.records = {rec};

  const std::string csv = report_to_csv(report);
  CHECK(csv.find("run_id,t,n,m,p,qgt_bound,universal_bound,remaining_bound,"
                 "margin,warn") == 0);
  const auto back = read_timeseries_csv(csv);
  REQUIRE(back.size() == 1);
  CHECK(back[0].t == rec.t);
  CHECK(back[0].n == rec.n);
  CHECK(back[0].m == rec.m);
  CHECK(back[0].p == rec.p);  // %.17g round-trips doubles exactly
  CHECK(back[0].qgt_bound == rec.qgt_bound);
  CHECK(std::isnan(back[0].remaining_bound));
  CHECK(back[0].margin == rec.margin);
  // The comma in the warn text must not add a column.
  CHECK(back[0].warn.find(';') != std::string::npos);

  const auto parsed = nlohmann::json::parse(report_to_json(report));
  CHECK(parsed.at("run_id") == "abc123");
  CHECK(parsed.at("records").size() == 1);
  CHECK(parsed.at("records")[0].at("remaining_bound").is_null());
}
