#include "nadbound/schedule_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace nadbound {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<RealVector> unflatten(const RealVector& x, int q, int p) {
  std::vector<RealVector> interior(q);
  for (int i = 0; i < q; ++i) interior[i] = x.segment(i * p, p);
  return interior;
}

RealVector flatten(const std::vector<RealVector>& interior, int p) {
  RealVector x(static_cast<Eigen::Index>(interior.size()) * p);
  for (std::size_t i = 0; i < interior.size(); ++i) {
    x.segment(static_cast<Eigen::Index>(i) * p, p) = interior[i];
  }
  return x;
}

}  // namespace

ParameterSchedule path_schedule(const RealVector& from, const RealVector& to,
                                const std::vector<RealVector>& interior,
                                double T) {
  std::vector<ScheduleKnot> knots;
  knots.reserve(interior.size() + 2);
  const int total = static_cast<int>(interior.size()) + 1;
  knots.push_back({0.0, from});
  for (std::size_t i = 0; i < interior.size(); ++i) {
    knots.push_back({T * static_cast<double>(i + 1) / total, interior[i]});
  }
  knots.push_back({T, to});
  return ParameterSchedule::piecewise_cubic(std::move(knots));
}

PathCandidate optimize_schedule(const HamiltonianModel& model,
                                const RealVector& from, const RealVector& to,
                                int m, const OptimizeOptions& opts) {
  const int p = static_cast<int>(from.size());
  if (to.size() != p || p < 1) {
    throw std::invalid_argument("optimize_schedule: endpoint dimension mismatch");
  }
  if (p != model.param_count()) {
    throw std::invalid_argument(
        "optimize_schedule: endpoints do not match the model parameter count");
  }
  if (m < 0 || m >= model.dim()) {
    throw std::invalid_argument("optimize_schedule: target level out of range");
  }
  if (opts.n_knots < 1 || opts.grid_segments < 10 || !(opts.T > 0.0)) {
    throw std::invalid_argument("optimize_schedule: bad options");
  }
  const int q = opts.n_knots;
  const int dim = q * p;
  if (opts.budget < dim + 2) {
    throw std::invalid_argument("optimize_schedule: budget below one simplex");
  }

  PathCandidate best;
  best.from = from;
  best.to = to;
  best.T = opts.T;
  best.objective = kInf;

  int evals = 0;
  auto objective = [&](const RealVector& x) -> double {
    ++evals;
    double value;
    try {
      const ParameterSchedule sched =
          path_schedule(from, to, unflatten(x, q, p), opts.T);
      const int n = opts.grid_segments;
      std::vector<double> t(n + 1), g(n + 1);
      for (int k = 0; k <= n; ++k) {
        t[k] = opts.T * static_cast<double>(k) / n;
        g[k] = qgt_norm(spectral_frame(model, sched, t[k], opts.delta_deg), m);
      }
      value = simpson_integral(t, g);
    } catch (const GapClosureError&) {
      value = kInf;  // probed path closes a gap: rejected, not fatal
    } catch (const std::invalid_argument&) {
      value = kInf;  // level m lost (merged levels) on this path
    }
    if (value < best.objective) {
      best.objective = value;
      best.interior = unflatten(x, q, p);
      best.trace.emplace_back(evals, value);
    }
    return value;
  };

  const double span = std::max((to - from).norm(), 1.0);
  RealVector chord(dim);
  for (int i = 0; i < q; ++i) {
    const double s = static_cast<double>(i + 1) / (q + 1);
    chord.segment(static_cast<Eigen::Index>(i) * p, p) =
        (1.0 - s) * from + s * to;
  }

  const int restarts = std::max(opts.restarts, 1);
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (int r = 0; r < restarts && evals < opts.budget; ++r) {
    const int ceiling =
        r + 1 == restarts ? opts.budget
                          : std::min(opts.budget, evals + opts.budget / restarts);

    RealVector base = chord;
    if (r > 0) {
      const RealVector seed_point =
          best.objective < kInf ? flatten(best.interior, p) : chord;
      base = seed_point;
      for (int i = 0; i < dim; ++i) base[i] += 0.15 * span * gauss(rng);
    }

    // Nelder-Mead simplex (reflection 1, expansion 2, contraction 0.5,
    // shrink 0.5).
    std::vector<std::pair<double, RealVector>> simplex;
    simplex.reserve(dim + 1);
    simplex.emplace_back(objective(base), base);
    for (int i = 0; i < dim && evals < ceiling; ++i) {
      RealVector v = base;
      v[i] += 0.1 * span;
      simplex.emplace_back(objective(v), v);
    }
    if (static_cast<int>(simplex.size()) < dim + 1) break;

    auto by_value = [](const auto& a, const auto& b) { return a.first < b.first; };
    while (evals < ceiling) {
      std::sort(simplex.begin(), simplex.end(), by_value);
      const double spread = simplex.back().first - simplex.front().first;
      if (spread < 1e-12 * std::max(1.0, std::abs(simplex.front().first))) break;

      RealVector centroid = RealVector::Zero(dim);
      for (int i = 0; i < dim; ++i) centroid += simplex[i].second;
      centroid /= dim;
      const RealVector& worst = simplex.back().second;

      const RealVector refl = centroid + (centroid - worst);
      const double f_refl = objective(refl);
      if (f_refl < simplex.front().first) {
        if (evals >= ceiling) {
          simplex.back() = {f_refl, refl};
          break;
        }
        const RealVector expand = centroid + 2.0 * (centroid - worst);
        const double f_expand = objective(expand);
        simplex.back() =
            f_expand < f_refl ? std::make_pair(f_expand, expand)
                              : std::make_pair(f_refl, refl);
      } else if (f_refl < simplex[dim - 1].first) {
        simplex.back() = {f_refl, refl};
      } else {
        if (evals >= ceiling) break;
        const RealVector contract = centroid + 0.5 * (worst - centroid);
        const double f_contract = objective(contract);
        if (f_contract < simplex.back().first) {
          simplex.back() = {f_contract, contract};
        } else {
          for (int i = 1; i <= dim && evals < ceiling; ++i) {
            simplex[i].second =
                simplex[0].second + 0.5 * (simplex[i].second - simplex[0].second);
            simplex[i].first = objective(simplex[i].second);
          }
        }
      }
    }
  }

  if (!(best.objective < kInf)) {
    throw GapClosureError(
        "optimize_schedule: every probed path closed a spectral gap", 0.0);
  }
  return best;
}

ParameterSchedule arc_length_reparameterize(const HamiltonianModel& model,
                                            const ParameterSchedule& sched,
                                            int m, int samples, int knots,
                                            double delta_deg) {
  if (samples < 2 || knots < 2) {
    throw std::invalid_argument("arc_length_reparameterize: need >= 2 samples and knots");
  }
  const double T = sched.duration();
  std::vector<double> t(samples), g(samples), s(samples);
  for (int k = 0; k < samples; ++k) {
    t[k] = T * static_cast<double>(k) / (samples - 1);
    g[k] = qgt_norm(spectral_frame(model, sched, t[k], delta_deg), m);
  }
  s[0] = 0.0;
  for (int k = 1; k < samples; ++k) {
    s[k] = s[k - 1] + 0.5 * (g[k] + g[k - 1]) * (t[k] - t[k - 1]);
  }
  const double total = s.back();
  if (!(total > 1e-12)) {
    throw std::invalid_argument("arc_length_reparameterize: zero-length path");
  }

  std::vector<ScheduleKnot> out;
  out.reserve(knots);
  int cursor = 0;
  for (int j = 0; j < knots; ++j) {
    const double target = total * static_cast<double>(j) / (knots - 1);
    while (cursor + 1 < samples && s[cursor + 1] < target) ++cursor;
    double tj;
    if (j == 0) {
      tj = 0.0;
    } else if (j == knots - 1) {
      tj = T;
    } else {
      const double ds = s[cursor + 1] - s[cursor];
      const double frac = ds > 0.0 ? (target - s[cursor]) / ds : 0.0;
      tj = t[cursor] + frac * (t[cursor + 1] - t[cursor]);
    }
    out.push_back({T * static_cast<double>(j) / (knots - 1), sched.value(tj)});
  }
  return ParameterSchedule::tabulated(std::move(out));
}

}  // namespace nadbound
