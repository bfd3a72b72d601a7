#include "nadbound/bounds.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace nadbound {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void validate_samples(const std::vector<double>& t,
                      const std::vector<double>& f) {
  if (t.size() != f.size() || t.size() < 2) {
    throw std::invalid_argument("simpson_integral: need matched samples, >= 2 points");
  }
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) {
      throw std::invalid_argument("simpson_integral: grid must be strictly increasing");
    }
  }
}

/// Quadratic through (t0,f0),(t1,f1),(t2,f2) integrated over [t0, t2].
double panel(double t0, double t1, double t2, double f0, double f1,
             double f2) {
  const double h0 = t1 - t0, h1 = t2 - t1;
  return (h0 + h1) / 6.0 *
         ((2.0 - h1 / h0) * f0 + (h0 + h1) * (h0 + h1) / (h0 * h1) * f1 +
          (2.0 - h0 / h1) * f2);
}

/// Same quadratic integrated over the last interval [t1, t2] only.
double half_panel(double t0, double t1, double t2, double f0, double f1,
                  double f2) {
  const double h0 = t1 - t0, h1 = t2 - t1;
  const double w0 = -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1));
  const double w1 = h1 * (h1 + 3.0 * h0) / (6.0 * h0);
  const double w2 = h1 * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1));
  return w0 * f0 + w1 * f1 + w2 * f2;
}

void require_frame_level(const SpectralFrame& frame, int idx,
                         const char* where) {
  if (idx < 0 || idx >= frame.level_count()) {
    throw std::invalid_argument(std::string(where) + ": level index out of range");
  }
}

/// Hermitian, PSD and unit trace within 1e-10; returns the eigenvalues.
RealVector validate_state(const Matrix& rho, const char* where) {
  require_hermitian(rho, where);
  if (std::abs(rho.trace().real() - 1.0) > 1e-10) {
    throw std::invalid_argument(std::string(where) + ": state trace is not 1");
  }
  const HermitianEig eig = hermitian_eig(rho);
  if (eig.values.minCoeff() < -1e-10) {
    throw std::invalid_argument(std::string(where) + ": state is not PSD");
  }
  return eig.values;
}

Matrix hermitian_sqrt(const Matrix& a) {
  const HermitianEig eig = hermitian_eig(a);
  const int d = static_cast<int>(a.rows());
  Matrix root = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const double v = std::sqrt(std::max(eig.values[i], 0.0));
    root += v * (eig.vectors.col(i) * eig.vectors.col(i).adjoint());
  }
  return root;
}

std::vector<double> frame_times(const std::vector<SpectralFrame>& frames) {
  std::vector<double> t(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) t[k] = frames[k].t;
  return t;
}

std::string fmt17(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* kCsvHeader =
    "run_id,t,n,m,p,qgt_bound,universal_bound,remaining_bound,margin,warn";

}  // namespace

double simpson_integral(const std::vector<double>& t,
                        const std::vector<double>& f) {
  validate_samples(t, f);
  const int n = static_cast<int>(t.size()) - 1;
  if (n == 1) {
    return 0.5 * (t[1] - t[0]) * (f[0] + f[1]);
  }
  double sum = 0.0;
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    sum += panel(t[i], t[i + 1], t[i + 2], f[i], f[i + 1], f[i + 2]);
  }
  if (i == n - 1) {
    sum += half_panel(t[n - 2], t[n - 1], t[n], f[n - 2], f[n - 1], f[n]);
  }
  return sum;
}

double simpson_integral_prefix(const std::vector<double>& t,
                               const std::vector<double>& f, int k_end) {
  if (k_end < 0 || static_cast<std::size_t>(k_end) >= t.size()) {
    throw std::invalid_argument("simpson_integral_prefix: index out of range");
  }
  if (k_end == 0) return 0.0;
  return simpson_integral({t.begin(), t.begin() + k_end + 1},
                          {f.begin(), f.begin() + k_end + 1});
}

bool quadrature_converged(const std::vector<double>& t,
                          const std::vector<double>& f, double rel_tol) {
  if (t.size() < 5) return true;
  std::vector<double> tc, fc;
  for (std::size_t i = 0; i < t.size(); i += 2) {
    tc.push_back(t[i]);
    fc.push_back(f[i]);
  }
  if (tc.back() != t.back()) {
    tc.push_back(t.back());
    fc.push_back(f.back());
  }
  const double fine = simpson_integral(t, f);
  const double coarse = simpson_integral(tc, fc);
  const double denom = std::max({std::abs(fine), std::abs(coarse), 1e-300});
  return std::abs(fine - coarse) <= rel_tol * denom;
}

double qgt_bound_integral(const std::vector<SpectralFrame>& frames, int m) {
  if (frames.size() < 2) return 0.0;
  std::vector<double> g(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) g[k] = qgt_norm(frames[k], m);
  const double len = simpson_integral(frame_times(frames), g);
  return len * len;
}

double remaining_bound(const std::vector<SpectralFrame>& frames, int n) {
  return 1.0 - qgt_bound_integral(frames, n);
}

UniversalBounds universal_bounds(const std::vector<SpectralFrame>& frames) {
  if (frames.size() < 2) return {0.0, 1.0};
  std::vector<double> u(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    u[k] = operator_norm(frames[k].h_cd) / kHbar;
  }
  const double len = simpson_integral(frame_times(frames), u);
  return {len * len, 1.0 - len * len};
}

AptRates apt_instantaneous_rates(const SpectralFrame& frame, double delta_t,
                                 int n, int m) {
  if (!(delta_t > 0.0)) {
    throw std::invalid_argument("apt_instantaneous_rates: delta_t must be positive");
  }
  require_frame_level(frame, n, "apt_instantaneous_rates");
  require_frame_level(frame, m, "apt_instantaneous_rates");
  const double pair_amp =
      operator_norm(frame.levels[n].projector * frame.projector_derivs[m]);
  const double level_amp = qgt_norm(frame, m);
  return {delta_t * delta_t * pair_amp * pair_amp,
          delta_t * delta_t * level_amp * level_amp};
}

double quench_transfer(const SpectralFrame& frame_a,
                       const SpectralFrame& frame_b, int n, int m) {
  require_frame_level(frame_a, n, "quench_transfer");
  require_frame_level(frame_b, m, "quench_transfer");
  if (frame_a.dim() != frame_b.dim()) {
    throw std::invalid_argument("quench_transfer: frame dimension mismatch");
  }
  const Matrix& pn = frame_a.levels[n].projector;
  const Matrix& pm = frame_b.levels[m].projector;
  return operator_norm(pm * pn * pm);
}

double bures_angle(const Matrix& rho_i, const Matrix& rho_f) {
  const RealVector ei = validate_state(rho_i, "bures_angle");
  const RealVector ef = validate_state(rho_f, "bures_angle");
  if (rho_i.rows() != rho_f.rows()) {
    throw std::invalid_argument("bures_angle: dimension mismatch");
  }
  double fidelity;
  if (ei.maxCoeff() >= 1.0 - 1e-12 || ef.maxCoeff() >= 1.0 - 1e-12) {
    fidelity = (rho_i * rho_f).trace().real();
  } else {
    const Matrix root = hermitian_sqrt(rho_i);
    const HermitianEig inner = hermitian_eig(root * rho_f * root);
    double s = 0.0;
    for (int i = 0; i < inner.values.size(); ++i) {
      s += std::sqrt(std::max(inner.values[i], 0.0));
    }
    fidelity = s * s;
  }
  fidelity = std::clamp(fidelity, 0.0, 1.0);
  return std::acos(std::sqrt(fidelity));
}

QslChain qsl_chain(const std::vector<SpectralFrame>& frames,
                   const PropagatorPair& pair, int m, const Matrix& rho_m0) {
  if (frames.size() != pair.u_a.size() || frames.size() < 2) {
    throw std::invalid_argument("qsl_chain: frames and adiabatic propagator must share the grid");
  }
  require_frame_level(frames.front(), m, "qsl_chain");
  validate_state(rho_m0, "qsl_chain");
  const Matrix& p0 = frames.front().levels[m].projector;
  if (operator_norm(rho_m0 - p0 * rho_m0 * p0) > 1e-10) {
    throw std::invalid_argument("qsl_chain: state leaks outside level m at t = 0");
  }

  const std::size_t n = frames.size();
  std::vector<double> cd_std(n), qgt(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Matrix rho = pair.u_a[k] * rho_m0 * pair.u_a[k].adjoint();
    const Matrix& h_cd = frames[k].h_cd;
    const double mean = (h_cd * rho).trace().real();
    const double second = (h_cd * h_cd * rho).trace().real();
    cd_std[k] = std::sqrt(std::max(second - mean * mean, 0.0)) / kHbar;
    qgt[k] = qgt_norm(frames[k], m);
  }
  const std::vector<double> t = frame_times(frames);
  const Matrix rho_end = pair.u_a.back() * rho_m0 * pair.u_a.back().adjoint();
  return {bures_angle(rho_m0, rho_end), simpson_integral(t, cd_std),
          simpson_integral(t, qgt)};
}

BoundReport assemble_report(const std::vector<SpectralFrame>& frames,
                            const PropagatorPair& pair,
                            const ReportOptions& opts) {
  if (frames.size() != pair.u_d.size() || frames.size() < 2) {
    throw std::invalid_argument("assemble_report: frames and propagators must share the grid");
  }
  const int level_total = frames.front().level_count();
  std::vector<int> levels = opts.levels;
  if (levels.empty()) {
    for (int n = 0; n < level_total; ++n) levels.push_back(n);
  } else {
    for (int n : levels) require_frame_level(frames.front(), n, "assemble_report");
  }
  std::vector<int> checkpoints = opts.checkpoints;
  if (checkpoints.empty()) {
    for (std::size_t k = 0; k < frames.size(); ++k) {
      checkpoints.push_back(static_cast<int>(k));
    }
  } else {
    for (int k : checkpoints) {
      if (k < 0 || static_cast<std::size_t>(k) >= frames.size()) {
        throw std::invalid_argument("assemble_report: checkpoint out of range");
      }
    }
  }

  BoundReport report;
  report.run_id = opts.run_id;
  report.epsilon_num = opts.epsilon_num;

  const std::vector<double> t = frame_times(frames);
  std::vector<std::vector<double>> qgt_samples(levels.size());
  for (std::size_t li = 0; li < levels.size(); ++li) {
    qgt_samples[li].resize(frames.size());
    for (std::size_t k = 0; k < frames.size(); ++k) {
      qgt_samples[li][k] = qgt_norm(frames[k], levels[li]);
    }
  }
  std::vector<double> cd_samples(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    cd_samples[k] = operator_norm(frames[k].h_cd) / kHbar;
  }

  for (const auto& frame : frames) {
    if (frame.near_crossing) {
      report.warnings.push_back(
          {frame.t, "near level crossing (min gap " +
                        std::to_string(frame.min_gap) + ")"});
    }
  }
  for (std::size_t li = 0; li < levels.size(); ++li) {
    if (!quadrature_converged(t, qgt_samples[li], 1e-4)) {
      report.warnings.push_back(
          {t.back(), "qgt quadrature for level " + std::to_string(levels[li]) +
                         " not converged; refine the grid"});
    }
  }
  if (!quadrature_converged(t, cd_samples, 1e-4)) {
    report.warnings.push_back(
        {t.back(), "universal-bound quadrature not converged; refine the grid"});
  }

  // Cumulative bound integrals at the checkpoints, one pass per level.
  std::vector<std::vector<double>> qgt_len(levels.size());
  std::vector<double> cd_len(checkpoints.size());
  for (std::size_t li = 0; li < levels.size(); ++li) {
    qgt_len[li].resize(checkpoints.size());
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
      qgt_len[li][c] =
          simpson_integral_prefix(t, qgt_samples[li], checkpoints[c]);
    }
  }
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    cd_len[c] = simpson_integral_prefix(t, cd_samples, checkpoints[c]);
  }

  bool near_crossing_so_far = false;
  std::vector<bool> crossing_prefix(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    near_crossing_so_far = near_crossing_so_far || frames[k].near_crossing;
    crossing_prefix[k] = near_crossing_so_far;
  }

  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    const int k = checkpoints[c];
    const std::string warn = crossing_prefix[k] ? "near-crossing" : "";
    for (std::size_t ni = 0; ni < levels.size(); ++ni) {
      for (std::size_t mi = 0; mi < levels.size(); ++mi) {
        const int n = levels[ni], m = levels[mi];
        RateRecord rec;
        rec.t = t[k];
        rec.n = n;
        rec.m = m;
        rec.p = transition_rate(pair.u_d[k], frames.front(), frames[k], n, m);
        rec.warn = warn;
        if (n != m) {
          rec.qgt_bound = qgt_len[mi][c] * qgt_len[mi][c];
          rec.universal_bound = cd_len[c] * cd_len[c];
          rec.remaining_bound = kNaN;
          rec.margin = rec.qgt_bound - rec.p;
        } else {
          rec.qgt_bound = kNaN;
          rec.universal_bound = 1.0 - cd_len[c] * cd_len[c];
          rec.remaining_bound = 1.0 - qgt_len[ni][c] * qgt_len[ni][c];
          rec.margin = rec.p - rec.remaining_bound;
        }
        report.records.push_back(std::move(rec));
      }
    }
  }
  return report;
}

std::vector<RateRecord> failed_certifications(const BoundReport& report) {
  std::vector<RateRecord> failed;
  for (const auto& rec : report.records) {
    if (rec.margin < -report.epsilon_num) failed.push_back(rec);
  }
  return failed;
}

std::string report_to_json(const BoundReport& report) {
  using nlohmann::json;
  json records = json::array();
  for (const auto& r : report.records) {
    records.push_back(json{{"t", r.t},
                           {"n", r.n},
                           {"m", r.m},
                           {"p", r.p},
                           {"qgt_bound", r.qgt_bound},
                           {"universal_bound", r.universal_bound},
                           {"remaining_bound", r.remaining_bound},
                           {"margin", r.margin},
                           {"warn", r.warn}});
  }
  json apt = json::array();
  for (const auto& r : report.apt) {
    apt.push_back(json{{"t", r.t},
                       {"n", r.n},
                       {"m", r.m},
                       {"pair_rate", r.pair_rate},
                       {"level_rate", r.level_rate}});
  }
  json qsl = json::array();
  for (const auto& r : report.qsl) {
    qsl.push_back(json{{"m", r.m},
                       {"bures_angle", r.bures_angle},
                       {"cd_std_integral", r.cd_std_integral},
                       {"qgt_integral", r.qgt_integral}});
  }
  json warnings = json::array();
  for (const auto& w : report.warnings) {
    warnings.push_back(json{{"t", w.t}, {"message", w.message}});
  }
  json doc{{"run_id", report.run_id}, {"epsilon_num", report.epsilon_num},
           {"records", records},      {"apt", apt},
           {"qsl", qsl},              {"warnings", warnings}};
  return doc.dump(2);
}

std::string report_to_csv(const BoundReport& report) {
  std::ostringstream out;
  out << kCsvHeader << "\n";
  for (const auto& r : report.records) {
    std::string warn = r.warn;
    for (char& ch : warn) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out << report.run_id << ',' << fmt17(r.t) << ',' << r.n << ',' << r.m
        << ',' << fmt17(r.p) << ',' << fmt17(r.qgt_bound) << ','
        << fmt17(r.universal_bound) << ',' << fmt17(r.remaining_bound) << ','
        << fmt17(r.margin) << ',' << warn << "\n";
  }
  return out.str();
}

std::vector<RateRecord> read_timeseries_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw ConfigError("timeseries CSV: unexpected header");
  }
  std::vector<RateRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream row(line);
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    while (cells.size() < 10) cells.emplace_back();
    if (cells.size() != 10) {
      throw ConfigError("timeseries CSV: malformed row: " + line);
    }
    auto num = [](const std::string& s) {
      return s.empty() ? kNaN : std::stod(s);
    };
    RateRecord rec;
    rec.t = num(cells[1]);
    rec.n = std::stoi(cells[2]);
    rec.m = std::stoi(cells[3]);
    rec.p = num(cells[4]);
    rec.qgt_bound = num(cells[5]);
    rec.universal_bound = num(cells[6]);
    rec.remaining_bound = num(cells[7]);
    rec.margin = num(cells[8]);
    rec.warn = cells[9];
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace nadbound
