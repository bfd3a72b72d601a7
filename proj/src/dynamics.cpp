#include "nadbound/dynamics.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <thread>

namespace nadbound {

namespace {

/// Runs fn(0..jobs) on a small thread pool. If several jobs throw, the
/// lowest-index exception is rethrown, so failures are deterministic.
void parallel_for(int jobs, const std::function<void(int)>& fn) {
  const int workers = worker_count(jobs);
  if (workers <= 1) {
    for (int i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<int> next{0};
  std::atomic<bool> stop{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      while (!stop.load(std::memory_order_relaxed)) {
        const int i = next.fetch_add(1, std::memory_order_relaxed);
        if (i >= jobs) return;
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
          stop.store(true, std::memory_order_relaxed);
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct Substep {
  double t_mid;
  double dt;
  int record_node;  // node index to store after this substep, -1 otherwise
};

void validate_grid(const std::vector<double>& grid, double T) {
  if (grid.size() < 2 || grid.front() != 0.0) {
    throw std::invalid_argument("propagate: grid must start at t = 0");
  }
  for (std::size_t k = 1; k < grid.size(); ++k) {
    if (!(grid[k] > grid[k - 1])) {
      throw std::invalid_argument("propagate: grid must be strictly increasing");
    }
  }
  if (grid.back() > T * (1.0 + 1e-12)) {
    throw std::invalid_argument("propagate: grid extends past the schedule duration");
  }
}

}  // namespace

std::vector<double> uniform_grid(double T, int segments) {
  if (!(T > 0.0) || segments < 1) {
    throw std::invalid_argument("uniform_grid: need T > 0 and segments >= 1");
  }
  std::vector<double> grid(segments + 1);
  for (int k = 0; k <= segments; ++k) {
    grid[k] = T * static_cast<double>(k) / segments;
  }
  grid.back() = T;
  return grid;
}

int worker_count(int jobs) {
  const unsigned hw = std::thread::hardware_concurrency();
  long n = hw ? static_cast<long>(hw) : 4;
  if (const char* env = std::getenv("NADBOUND_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) n = std::min(v, 1024L);
  }
  return static_cast<int>(std::max(1L, std::min<long>(n, jobs)));
}

std::vector<SpectralFrame> frames_on_grid(const HamiltonianModel& model,
                                          const ParameterSchedule& sched,
                                          const std::vector<double>& times,
                                          double delta_deg,
                                          bool check_tracking) {
  std::vector<SpectralFrame> frames(times.size());
  parallel_for(static_cast<int>(times.size()), [&](int i) {
    frames[i] = spectral_frame(model, sched, times[i], delta_deg);
  });
  if (check_tracking) check_level_tracking(frames);
  return frames;
}

void check_level_tracking(const std::vector<SpectralFrame>& frames) {
  for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
    const SpectralFrame& a = frames[k];
    const SpectralFrame& b = frames[k + 1];
    if (a.level_count() != b.level_count()) {
      throw GapClosureError(
          "level structure changed between t = " + std::to_string(a.t) +
              " and t = " + std::to_string(b.t) + "; refine the grid",
          b.t);
    }
    for (int n = 0; n < a.level_count(); ++n) {
      if (a.levels[n].multiplicity != b.levels[n].multiplicity) {
        throw GapClosureError(
            "level " + std::to_string(n) + " multiplicity changed at t = " +
                std::to_string(b.t) + "; refine the grid",
            b.t);
      }
      const double overlap =
          (a.levels[n].projector * b.levels[n].projector).trace().real();
      if (overlap < 0.5 * a.levels[n].multiplicity) {
        throw GapClosureError(
            "level " + std::to_string(n) + " tracking lost at t = " +
                std::to_string(b.t) + " (projector overlap " +
                std::to_string(overlap) + "); refine the grid",
            b.t);
      }
    }
  }
}

std::vector<Matrix> propagate(const HamiltonianModel& model,
                              const ParameterSchedule& sched,
                              const std::vector<double>& grid,
                              PropagationMode mode,
                              const PropagateOptions& opts) {
  const double T = sched.duration();
  validate_grid(grid, T);
  const double dt_max = opts.dt_max > 0.0 ? opts.dt_max : T / 2000.0;

  std::vector<Substep> steps;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double span = grid[k + 1] - grid[k];
    const int ns = std::max(1, static_cast<int>(std::ceil(span / dt_max)));
    const double h = span / ns;
    for (int s = 0; s < ns; ++s) {
      steps.push_back({grid[k] + (s + 0.5) * h, h,
                       s + 1 == ns ? static_cast<int>(k) + 1 : -1});
    }
  }

  auto step_unitary = [&](const Substep& s) -> Matrix {
    if (mode == PropagationMode::Dynamical) {
      return expi_step(hamiltonian_at(model, sched, s.t_mid), s.dt);
    }
    const SpectralFrame frame =
        spectral_frame(model, sched, s.t_mid, opts.delta_deg);
    const Matrix gen = mode == PropagationMode::Adiabatic
                           ? Matrix(frame.h + frame.h_cd)
                           : Matrix(frame.h + reduced_cd_hamiltonian(
                                                  frame, opts.reduced_level));
    return expi_step(gen, s.dt);
  };

  const int d = model.dim();
  std::vector<Matrix> result;
  result.reserve(grid.size());
  Matrix u = Matrix::Identity(d, d);
  result.push_back(u);

  // Step unitaries are built in parallel a window at a time (each needs an
  // eigensolve), then folded into the running product sequentially.
  const int total = static_cast<int>(steps.size());
  const int window = std::max(64, 8 * worker_count(total));
  std::vector<Matrix> block(std::min(total, window));
  for (int base = 0; base < total; base += window) {
    const int count = std::min(window, total - base);
    parallel_for(count,
                 [&](int i) { block[i] = step_unitary(steps[base + i]); });
    for (int i = 0; i < count; ++i) {
      u = block[i] * u;
      if (steps[base + i].record_node >= 0) result.push_back(u);
    }
  }
  return result;
}

PropagatorPair make_propagator_pair(const HamiltonianModel& model,
                                    const ParameterSchedule& sched,
                                    const std::vector<double>& grid,
                                    const PropagateOptions& opts) {
  PropagatorPair pair;
  pair.grid = grid;
  pair.dt_max =
      opts.dt_max > 0.0 ? opts.dt_max : sched.duration() / 2000.0;
  pair.u_d = propagate(model, sched, grid, PropagationMode::Dynamical, opts);
  pair.u_a = propagate(model, sched, grid, PropagationMode::Adiabatic, opts);
  return pair;
}

double transition_rate(const Matrix& u_d, const SpectralFrame& frame0,
                       const SpectralFrame& frame_t, int n, int m) {
  if (n < 0 || n >= frame0.level_count()) {
    throw std::invalid_argument("transition_rate: initial level out of range");
  }
  if (m < 0 || m >= frame_t.level_count()) {
    throw std::invalid_argument("transition_rate: final level out of range");
  }
  const double a = operator_norm(frame_t.levels[m].projector * u_d *
                                 frame0.levels[n].projector);
  return std::min(1.0, a * a);
}

double transition_rate(const PropagatorPair& pair,
                       const std::vector<SpectralFrame>& frames, int n, int m,
                       int k) {
  if (k < 0 || static_cast<std::size_t>(k) >= pair.u_d.size() ||
      static_cast<std::size_t>(k) >= frames.size()) {
    throw std::invalid_argument("transition_rate: grid index out of range");
  }
  return transition_rate(pair.u_d[k], frames.front(), frames[k], n, m);
}

double intertwiner_residual(const PropagatorPair& pair, int k) {
  if (k < 0 || static_cast<std::size_t>(k) >= pair.u_d.size() ||
      static_cast<std::size_t>(k) >= pair.u_a.size()) {
    throw std::invalid_argument("intertwiner_residual: grid index out of range");
  }
  const Matrix w = pair.u_a[k].adjoint() * pair.u_d[k];
  const int d = static_cast<int>(w.rows());
  return operator_norm(w.adjoint() * w - Matrix::Identity(d, d));
}

}  // namespace nadbound
