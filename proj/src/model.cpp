#include "nadbound/model.hpp"

#include "nadbound/operator_core.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nadbound {

namespace {

using nlohmann::json;

const Complex kI(0.0, 1.0);

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_y() {
  Matrix m(2, 2);
  m << 0, -kI, kI, 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// op acting on `site` of an n-site chain, identity elsewhere. Site 0 is the
// leftmost Kronecker factor.
Matrix site_operator(const Matrix& op, int site, int n) {
  Matrix out = Matrix::Identity(1, 1);
  for (int i = 0; i < n; ++i) {
    out = kron(out, i == site ? op : Matrix::Identity(2, 2));
  }
  return out;
}

// Fritsch-Carlson monotone tangents for one scalar sequence.
std::vector<double> monotone_tangents(const std::vector<double>& t,
                                      const std::vector<double>& y) {
  const std::size_t n = t.size();
  std::vector<double> h(n - 1), d(n - 1), m(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = t[i + 1] - t[i];
    d[i] = (y[i + 1] - y[i]) / h[i];
  }
  // Second-order one-sided endpoint tangents, clamped for shape.
  auto end_tangent = [](double h0, double h1, double d0, double d1) {
    double tangent = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (tangent * d0 <= 0.0) {
      tangent = 0.0;
    } else if (d0 * d1 <= 0.0 && std::abs(tangent) > 3.0 * std::abs(d0)) {
      tangent = 3.0 * d0;
    }
    return tangent;
  };
  if (n == 2) {
    m[0] = d[0];
    m[1] = d[0];
  } else {
    m[0] = end_tangent(h[0], h[1], d[0], d[1]);
    m[n - 1] = end_tangent(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) {
      m[i] = 0.0;
    } else {
      m[i] = 0.5 * (d[i - 1] + d[i]);
    }
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (d[i] == 0.0) {
      m[i] = 0.0;
      m[i + 1] = 0.0;
      continue;
    }
    const double alpha = m[i] / d[i];
    const double beta = m[i + 1] / d[i];
    const double s = alpha * alpha + beta * beta;
    if (s > 9.0) {
      const double tau = 3.0 / std::sqrt(s);
      m[i] = tau * alpha * d[i];
      m[i + 1] = tau * beta * d[i];
    }
  }
  return m;
}

json knots_to_json(const std::vector<ScheduleKnot>& knots) {
  json arr = json::array();
  for (const auto& k : knots) {
    json lam = json::array();
    for (Eigen::Index i = 0; i < k.lambda.size(); ++i) lam.push_back(k.lambda[i]);
    arr.push_back(json{{"t", k.t}, {"lambda", lam}});
  }
  return arr;
}

RealVector vector_from_json(const json& arr, const char* what) {
  if (!arr.is_array() || arr.empty()) {
    throw ConfigError(std::string(what) + ": expected a non-empty array");
  }
  RealVector v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) {
      throw ConfigError(std::string(what) + ": expected numbers");
    }
    v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  }
  return v;
}

}  // namespace

std::string schedule_kind_name(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::Linear: return "linear";
    case ScheduleKind::TrigAnnealing: return "trig-annealing";
    case ScheduleKind::PiecewiseCubic: return "piecewise-cubic";
    case ScheduleKind::Tabulated: return "tabulated";
  }
  throw std::logic_error("schedule_kind_name: unknown kind");
}

ScheduleKind schedule_kind_from_name(const std::string& name) {
  if (name == "linear") return ScheduleKind::Linear;
  if (name == "trig-annealing") return ScheduleKind::TrigAnnealing;
  if (name == "piecewise-cubic") return ScheduleKind::PiecewiseCubic;
  if (name == "tabulated") return ScheduleKind::Tabulated;
  throw ConfigError("unknown schedule kind: " + name);
}

ParameterSchedule::ParameterSchedule(ScheduleKind kind,
                                     std::vector<ScheduleKnot> knots)
    : kind_(kind), knots_(std::move(knots)) {
  if (knots_.size() < 2) {
    throw std::invalid_argument("ParameterSchedule: need at least two knots");
  }
  if ((kind_ == ScheduleKind::Linear || kind_ == ScheduleKind::TrigAnnealing) &&
      knots_.size() != 2) {
    throw std::invalid_argument(
        "ParameterSchedule: linear/trig-annealing take exactly two knots");
  }
  const Eigen::Index p = knots_.front().lambda.size();
  if (p < 1) {
    throw std::invalid_argument("ParameterSchedule: empty parameter vector");
  }
  if (knots_.front().t != 0.0) {
    throw std::invalid_argument("ParameterSchedule: first knot must be at t=0");
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (knots_[i].lambda.size() != p || !knots_[i].lambda.allFinite() ||
        !std::isfinite(knots_[i].t)) {
      throw std::invalid_argument("ParameterSchedule: malformed knot");
    }
    if (i > 0 && knots_[i].t <= knots_[i - 1].t) {
      throw std::invalid_argument(
          "ParameterSchedule: knot times must be strictly increasing");
    }
  }
  if (duration() <= 0.0) {
    throw std::invalid_argument("ParameterSchedule: duration must be positive");
  }

  if (kind_ == ScheduleKind::PiecewiseCubic) {
    // Catmull-Rom tangents, one-sided at the ends.
    const std::size_t n = knots_.size();
    tangents_.resize(n);
    tangents_[0] = (knots_[1].lambda - knots_[0].lambda) /
                   (knots_[1].t - knots_[0].t);
    tangents_[n - 1] = (knots_[n - 1].lambda - knots_[n - 2].lambda) /
                       (knots_[n - 1].t - knots_[n - 2].t);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      tangents_[i] = (knots_[i + 1].lambda - knots_[i - 1].lambda) /
                     (knots_[i + 1].t - knots_[i - 1].t);
    }
  } else if (kind_ == ScheduleKind::Tabulated) {
    const std::size_t n = knots_.size();
    std::vector<double> ts(n);
    for (std::size_t i = 0; i < n; ++i) ts[i] = knots_[i].t;
    tangents_.assign(n, RealVector::Zero(p));
    std::vector<double> ys(n);
    for (Eigen::Index c = 0; c < p; ++c) {
      for (std::size_t i = 0; i < n; ++i) ys[i] = knots_[i].lambda[c];
      const std::vector<double> m = monotone_tangents(ts, ys);
      for (std::size_t i = 0; i < n; ++i) tangents_[i][c] = m[i];
    }
  }
}

int ParameterSchedule::segment_index(double t) const {
  const double T = duration();
  const double slack = 1e-9 * std::max(T, 1.0);
  if (t < -slack || t > T + slack) {
    throw std::invalid_argument("ParameterSchedule: t outside [0, T]");
  }
  t = std::clamp(t, 0.0, T);
  auto it = std::upper_bound(
      knots_.begin(), knots_.end(), t,
      [](double value, const ScheduleKnot& k) { return value < k.t; });
  int idx = static_cast<int>(it - knots_.begin()) - 1;
  return std::clamp(idx, 0, static_cast<int>(knots_.size()) - 2);
}

RealVector ParameterSchedule::value(double t) const {
  const int i = segment_index(t);
  t = std::clamp(t, 0.0, duration());
  // Returns knot values exactly at the knots.
  if (t == knots_[i].t) return knots_[i].lambda;
  if (t == knots_[i + 1].t) return knots_[i + 1].lambda;

  switch (kind_) {
    case ScheduleKind::Linear: {
      const double s = (t - knots_[0].t) / (knots_[1].t - knots_[0].t);
      return (1.0 - s) * knots_[0].lambda + s * knots_[1].lambda;
    }
    case ScheduleKind::TrigAnnealing: {
      const double w = M_PI / (2.0 * duration());
      return std::cos(w * t) * knots_[0].lambda +
             std::sin(w * t) * knots_[1].lambda;
    }
    case ScheduleKind::PiecewiseCubic:
    case ScheduleKind::Tabulated: {
      const double h = knots_[i + 1].t - knots_[i].t;
      const double s = (t - knots_[i].t) / h;
      const double s2 = s * s, s3 = s2 * s;
      const double h00 = 2 * s3 - 3 * s2 + 1;
      const double h10 = s3 - 2 * s2 + s;
      const double h01 = -2 * s3 + 3 * s2;
      const double h11 = s3 - s2;
      return h00 * knots_[i].lambda + h10 * h * tangents_[i] +
             h01 * knots_[i + 1].lambda + h11 * h * tangents_[i + 1];
    }
  }
  throw std::logic_error("ParameterSchedule::value: unknown kind");
}

RealVector ParameterSchedule::derivative(double t) const {
  const int i = segment_index(t);
  t = std::clamp(t, 0.0, duration());

  switch (kind_) {
    case ScheduleKind::Linear:
      return (knots_[1].lambda - knots_[0].lambda) /
             (knots_[1].t - knots_[0].t);
    case ScheduleKind::TrigAnnealing: {
      const double w = M_PI / (2.0 * duration());
      return w * (-std::sin(w * t) * knots_[0].lambda +
                  std::cos(w * t) * knots_[1].lambda);
    }
    case ScheduleKind::PiecewiseCubic:
    case ScheduleKind::Tabulated: {
      const double h = knots_[i + 1].t - knots_[i].t;
      const double s = (t - knots_[i].t) / h;
      const double s2 = s * s;
      const double d00 = (6 * s2 - 6 * s) / h;
      const double d10 = 3 * s2 - 4 * s + 1;
      const double d01 = (-6 * s2 + 6 * s) / h;
      const double d11 = 3 * s2 - 2 * s;
      return d00 * knots_[i].lambda + d10 * tangents_[i] +
             d01 * knots_[i + 1].lambda + d11 * tangents_[i + 1];
    }
  }
  throw std::logic_error("ParameterSchedule::derivative: unknown kind");
}

ParameterSchedule ParameterSchedule::linear(double T, const RealVector& from,
                                            const RealVector& to) {
  return ParameterSchedule(ScheduleKind::Linear, {{0.0, from}, {T, to}});
}

ParameterSchedule ParameterSchedule::trig_annealing(double T,
                                                    const RealVector& start,
                                                    const RealVector& end) {
  return ParameterSchedule(ScheduleKind::TrigAnnealing,
                           {{0.0, start}, {T, end}});
}

ParameterSchedule ParameterSchedule::piecewise_cubic(
    std::vector<ScheduleKnot> knots) {
  return ParameterSchedule(ScheduleKind::PiecewiseCubic, std::move(knots));
}

ParameterSchedule ParameterSchedule::tabulated(std::vector<ScheduleKnot> knots) {
  return ParameterSchedule(ScheduleKind::Tabulated, std::move(knots));
}

ParameterSchedule ParameterSchedule::annealing_preset(double T, double h0x,
                                                      double hTz) {
  if (h0x == 0.0 || hTz == 0.0) {
    throw std::invalid_argument("annealing_preset: endpoint fields must be nonzero");
  }
  RealVector start(3), end(3);
  start << h0x, 0.0, 0.0;
  end << 0.0, 0.0, hTz;
  return trig_annealing(T, start, end);
}

std::string ParameterSchedule::to_json_string() const {
  json doc{{"kind", schedule_kind_name(kind_)},
           {"T", duration()},
           {"knots", knots_to_json(knots_)}};
  return doc.dump(2);
}

ParameterSchedule ParameterSchedule::from_json_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("schedule JSON parse error: ") + e.what());
  }
  if (!doc.contains("kind") || !doc.contains("T") || !doc.contains("knots")) {
    throw ConfigError("schedule JSON: missing kind/T/knots");
  }
  const ScheduleKind kind = schedule_kind_from_name(doc["kind"].get<std::string>());
  std::vector<ScheduleKnot> knots;
  for (const auto& k : doc["knots"]) {
    if (!k.contains("t") || !k.contains("lambda")) {
      throw ConfigError("schedule JSON: knot needs t and lambda");
    }
    knots.push_back({k["t"].get<double>(),
                     vector_from_json(k["lambda"], "schedule knot lambda")});
  }
  ParameterSchedule sched(kind, std::move(knots));
  const double T = doc["T"].get<double>();
  if (std::abs(T - sched.duration()) > 1e-12 * std::max(1.0, T)) {
    throw ConfigError("schedule JSON: T does not match the last knot time");
  }
  return sched;
}

void ParameterSchedule::save_json(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write schedule file: " + path);
  out << to_json_string() << "\n";
}

ParameterSchedule ParameterSchedule::load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open schedule file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_string(buf.str());
}

Matrix HamiltonianModel::evaluate_param_deriv(const RealVector& lambda,
                                              int k) const {
  return finite_difference_deriv(lambda, k);
}

Matrix HamiltonianModel::finite_difference_deriv(const RealVector& lambda,
                                                 int k) const {
  if (k < 0 || k >= param_count()) {
    throw std::invalid_argument("evaluate_param_deriv: parameter index out of range");
  }
  const double h = std::max(1e-5, 1e-5 * lambda.norm());
  RealVector plus = lambda, minus = lambda;
  plus[k] += h;
  minus[k] -= h;
  return (evaluate(plus) - evaluate(minus)) / (2.0 * h);
}

Matrix TwoLevelFieldModel::evaluate(const RealVector& lambda) const {
  if (lambda.size() != 3) {
    throw std::invalid_argument("two-level-field: lambda must be (hx, hy, hz)");
  }
  return lambda[0] * pauli_x() + lambda[1] * pauli_y() + lambda[2] * pauli_z();
}

Matrix TwoLevelFieldModel::evaluate_param_deriv(const RealVector& lambda,
                                                int k) const {
  (void)lambda;
  switch (k) {
    case 0: return pauli_x();
    case 1: return pauli_y();
    case 2: return pauli_z();
    default:
      throw std::invalid_argument("two-level-field: parameter index out of range");
  }
}

Matrix LandauZenerModel::evaluate(const RealVector& lambda) const {
  if (lambda.size() != 1) {
    throw std::invalid_argument("landau-zener: lambda must be (eps)");
  }
  return lambda[0] * pauli_z() + delta_ * pauli_x();
}

Matrix LandauZenerModel::evaluate_param_deriv(const RealVector& lambda,
                                              int k) const {
  (void)lambda;
  if (k != 0) {
    throw std::invalid_argument("landau-zener: parameter index out of range");
  }
  return pauli_z();
}

TransverseFieldIsingModel::TransverseFieldIsingModel(int spins,
                                                     bool longitudinal)
    : spins_(spins), longitudinal_(longitudinal) {
  if (spins < 1 || spins > 8) {
    throw std::invalid_argument("transverse-field-ising: spins must be in [1, 8]");
  }
  dim_ = 1 << spins;
  zz_sum_ = Matrix::Zero(dim_, dim_);
  x_sum_ = Matrix::Zero(dim_, dim_);
  z_sum_ = Matrix::Zero(dim_, dim_);
  const Matrix x = pauli_x(), z = pauli_z();
  for (int i = 0; i < spins; ++i) {
    x_sum_ += site_operator(x, i, spins);
    z_sum_ += site_operator(z, i, spins);
    if (i + 1 < spins) {
      zz_sum_ += site_operator(z, i, spins) * site_operator(z, i + 1, spins);
    }
  }
}

Matrix TransverseFieldIsingModel::evaluate(const RealVector& lambda) const {
  if (lambda.size() != param_count()) {
    throw std::invalid_argument("transverse-field-ising: wrong lambda size");
  }
  Matrix h = -lambda[0] * zz_sum_ - lambda[1] * x_sum_;
  if (longitudinal_) h -= lambda[2] * z_sum_;
  return h;
}

Matrix TransverseFieldIsingModel::evaluate_param_deriv(const RealVector& lambda,
                                                       int k) const {
  (void)lambda;
  if (k < 0 || k >= param_count()) {
    throw std::invalid_argument("transverse-field-ising: parameter index out of range");
  }
  if (k == 0) return -zz_sum_;
  if (k == 1) return -x_sum_;
  return -z_sum_;
}

DenseTabulatedModel::DenseTabulatedModel(std::vector<double> lambdas,
                                         std::vector<Matrix> samples)
    : lambdas_(std::move(lambdas)), samples_(std::move(samples)) {
  if (lambdas_.size() < 2 || lambdas_.size() != samples_.size()) {
    throw std::invalid_argument("dense-tabulated: need >= 2 matched samples");
  }
  dim_ = static_cast<int>(samples_.front().rows());
  for (std::size_t i = 0; i < lambdas_.size(); ++i) {
    if (!std::isfinite(lambdas_[i]) ||
        (i > 0 && lambdas_[i] <= lambdas_[i - 1])) {
      throw std::invalid_argument(
          "dense-tabulated: lambda samples must be finite and strictly increasing");
    }
    const Matrix& m = samples_[i];
    if (m.rows() != dim_ || m.cols() != dim_ || !m.allFinite()) {
      throw std::invalid_argument("dense-tabulated: malformed sample matrix");
    }
    if (hermiticity_defect(m) > 1e-10 * std::max(m.norm(), 1e-300)) {
      throw std::invalid_argument("dense-tabulated: sample matrix is not Hermitian");
    }
  }

  // Monotone tangents, entrywise on real and imaginary parts.
  const std::size_t n = lambdas_.size();
  tangents_.assign(n, Matrix::Zero(dim_, dim_));
  std::vector<double> re(n), im(n);
  for (int r = 0; r < dim_; ++r) {
    for (int c = 0; c < dim_; ++c) {
      for (std::size_t i = 0; i < n; ++i) {
        re[i] = samples_[i](r, c).real();
        im[i] = samples_[i](r, c).imag();
      }
      const std::vector<double> mre = monotone_tangents(lambdas_, re);
      const std::vector<double> mim = monotone_tangents(lambdas_, im);
      for (std::size_t i = 0; i < n; ++i) {
        tangents_[i](r, c) = Complex(mre[i], mim[i]);
      }
    }
  }
}

Matrix DenseTabulatedModel::interpolate(double x, bool derivative) const {
  if (x < lambdas_.front() - 1e-12 || x > lambdas_.back() + 1e-12) {
    throw std::invalid_argument("dense-tabulated: lambda outside the tabulated range");
  }
  x = std::clamp(x, lambdas_.front(), lambdas_.back());
  auto it = std::upper_bound(lambdas_.begin(), lambdas_.end(), x);
  int i = static_cast<int>(it - lambdas_.begin()) - 1;
  i = std::clamp(i, 0, static_cast<int>(lambdas_.size()) - 2);
  const double h = lambdas_[i + 1] - lambdas_[i];
  const double s = (x - lambdas_[i]) / h;
  const double s2 = s * s, s3 = s2 * s;
  if (!derivative) {
    const double h00 = 2 * s3 - 3 * s2 + 1;
    const double h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2;
    const double h11 = s3 - s2;
    return h00 * samples_[i] + h10 * h * tangents_[i] + h01 * samples_[i + 1] +
           h11 * h * tangents_[i + 1];
  }
  const double d00 = (6 * s2 - 6 * s) / h;
  const double d10 = 3 * s2 - 4 * s + 1;
  const double d01 = (-6 * s2 + 6 * s) / h;
  const double d11 = 3 * s2 - 2 * s;
  return d00 * samples_[i] + d10 * tangents_[i] + d01 * samples_[i + 1] +
         d11 * tangents_[i + 1];
}

Matrix DenseTabulatedModel::evaluate(const RealVector& lambda) const {
  if (lambda.size() != 1) {
    throw std::invalid_argument("dense-tabulated: lambda must be scalar");
  }
  return interpolate(lambda[0], false);
}

Matrix DenseTabulatedModel::evaluate_param_deriv(const RealVector& lambda,
                                                 int k) const {
  if (lambda.size() != 1 || k != 0) {
    throw std::invalid_argument("dense-tabulated: parameter index out of range");
  }
  return interpolate(lambda[0], true);
}

std::string DenseTabulatedModel::to_json_string() const {
  json mats = json::array();
  for (std::size_t i = 0; i < lambdas_.size(); ++i) {
    json entries = json::array();
    for (int r = 0; r < dim_; ++r) {
      for (int c = 0; c < dim_; ++c) {
        const Complex v = samples_[i](r, c);
        entries.push_back(json::array({v.real(), v.imag()}));
      }
    }
    mats.push_back(json{{"lambda", json::array({lambdas_[i]})}, {"H", entries}});
  }
  json doc{{"dim", dim_}, {"params", 1}, {"matrices", mats}};
  return doc.dump(2);
}

DenseTabulatedModel DenseTabulatedModel::from_json_string(
    const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("model JSON parse error: ") + e.what());
  }
  if (!doc.contains("dim") || !doc.contains("params") ||
      !doc.contains("matrices")) {
    throw ConfigError("model JSON: missing dim/params/matrices");
  }
  const int d = doc["dim"].get<int>();
  if (d < 1) throw ConfigError("model JSON: dim must be positive");
  if (doc["params"].get<int>() != 1) {
    throw ConfigError("model JSON: only scalar-parameter tables are supported");
  }
  std::vector<double> lambdas;
  std::vector<Matrix> samples;
  for (const auto& rec : doc["matrices"]) {
    if (!rec.contains("lambda") || !rec.contains("H")) {
      throw ConfigError("model JSON: matrix record needs lambda and H");
    }
    const auto& lam = rec["lambda"];
    if (!lam.is_array() || lam.size() != 1) {
      throw ConfigError("model JSON: lambda must be a 1-element array");
    }
    lambdas.push_back(lam[0].get<double>());
    const auto& entries = rec["H"];
    if (!entries.is_array() ||
        entries.size() != static_cast<std::size_t>(d) * d) {
      throw ConfigError("model JSON: H must hold dim*dim [re, im] pairs");
    }
    Matrix m(d, d);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        const auto& pair = entries[static_cast<std::size_t>(r) * d + c];
        if (!pair.is_array() || pair.size() != 2) {
          throw ConfigError("model JSON: H entries must be [re, im] pairs");
        }
        m(r, c) = Complex(pair[0].get<double>(), pair[1].get<double>());
      }
    }
    samples.push_back(std::move(m));
  }
  try {
    return DenseTabulatedModel(std::move(lambdas), std::move(samples));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model JSON: ") + e.what());
  }
}

void DenseTabulatedModel::save_json(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write model file: " + path);
  out << to_json_string() << "\n";
}

DenseTabulatedModel DenseTabulatedModel::load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_string(buf.str());
}

Matrix hamiltonian_at(const HamiltonianModel& model,
                      const ParameterSchedule& sched, double t) {
  const double T = sched.duration();
  if (t < -1e-9 * std::max(T, 1.0) || t > T * (1.0 + 1e-9)) {
    throw std::invalid_argument("hamiltonian_at: t outside [0, T]");
  }
  return model.evaluate(sched.value(std::clamp(t, 0.0, T)));
}

Matrix time_derivative_h(const HamiltonianModel& model,
                         const ParameterSchedule& sched, double t) {
  const RealVector lambda = sched.value(t);
  const RealVector rate = sched.derivative(t);
  Matrix out = Matrix::Zero(model.dim(), model.dim());
  for (int k = 0; k < model.param_count(); ++k) {
    if (rate[k] != 0.0) {
      out += rate[k] * model.evaluate_param_deriv(lambda, k);
    }
  }
  return out;
}

}  // namespace nadbound
