#pragma once

#include "nadbound/common.hpp"

#include <memory>
#include <string>
#include <vector>

namespace nadbound {

enum class ScheduleKind { Linear, TrigAnnealing, PiecewiseCubic, Tabulated };

std::string schedule_kind_name(ScheduleKind kind);
ScheduleKind schedule_kind_from_name(const std::string& name);

struct ScheduleKnot {
  double t;
  RealVector lambda;
};

/// Smooth map t -> lambda_t on [0, T] with a derivative. All four kinds are
/// C^1; knot values are reproduced exactly, including both endpoints.
///
/// Linear and TrigAnnealing take exactly two knots (the endpoints).
/// PiecewiseCubic is a Hermite interpolant with Catmull-Rom tangents;
/// Tabulated uses monotone (Fritsch-Carlson) tangents per component.
class ParameterSchedule {
 public:
  ParameterSchedule(ScheduleKind kind, std::vector<ScheduleKnot> knots);

  double duration() const { return knots_.back().t; }
  int param_count() const { return static_cast<int>(knots_.front().lambda.size()); }
  ScheduleKind kind() const { return kind_; }
  const std::vector<ScheduleKnot>& knots() const { return knots_; }

  RealVector value(double t) const;
  RealVector derivative(double t) const;

  static ParameterSchedule linear(double T, const RealVector& from,
                                  const RealVector& to);
  static ParameterSchedule trig_annealing(double T, const RealVector& start,
                                          const RealVector& end);
  static ParameterSchedule piecewise_cubic(std::vector<ScheduleKnot> knots);
  static ParameterSchedule tabulated(std::vector<ScheduleKnot> knots);

  /// Two-level annealing preset: lambda_0 = (h0x, 0, 0), lambda_T = (0, 0,
  /// hTz), traversed along the trig law. Default signs h0x < 0, hTz < 0.
  static ParameterSchedule annealing_preset(double T, double h0x = -1.0,
                                            double hTz = -1.0);

  std::string to_json_string() const;
  static ParameterSchedule from_json_string(const std::string& text);
  void save_json(const std::string& path) const;
  static ParameterSchedule load_json(const std::string& path);

 private:
  int segment_index(double t) const;

  ScheduleKind kind_;
  std::vector<ScheduleKnot> knots_;
  // Hermite tangents per knot, for the cubic kinds.
  std::vector<RealVector> tangents_;
};

/// Dimension-d Hermitian generator H(lambda). Parameter derivatives are
/// analytic when the family provides them and central finite differences
/// otherwise (step max(1e-5, 1e-5*|lambda|)).
class HamiltonianModel {
 public:
  virtual ~HamiltonianModel() = default;

  virtual int dim() const = 0;
  virtual int param_count() const = 0;
  virtual std::string family() const = 0;
  virtual Matrix evaluate(const RealVector& lambda) const = 0;

  virtual bool has_analytic_derivative() const { return false; }
  virtual Matrix evaluate_param_deriv(const RealVector& lambda, int k) const;

 protected:
  Matrix finite_difference_deriv(const RealVector& lambda, int k) const;
};

/// H = hx X + hy Y + hz Z with lambda = (hx, hy, hz).
class TwoLevelFieldModel final : public HamiltonianModel {
 public:
  int dim() const override { return 2; }
  int param_count() const override { return 3; }
  std::string family() const override { return "two-level-field"; }
  Matrix evaluate(const RealVector& lambda) const override;
  bool has_analytic_derivative() const override { return true; }
  Matrix evaluate_param_deriv(const RealVector& lambda, int k) const override;
};

/// H = eps Z + delta X with lambda = (eps) and a fixed coupling delta.
class LandauZenerModel final : public HamiltonianModel {
 public:
  explicit LandauZenerModel(double delta) : delta_(delta) {}
  int dim() const override { return 2; }
  int param_count() const override { return 1; }
  std::string family() const override { return "landau-zener"; }
  Matrix evaluate(const RealVector& lambda) const override;
  bool has_analytic_derivative() const override { return true; }
  Matrix evaluate_param_deriv(const RealVector& lambda, int k) const override;
  double coupling() const { return delta_; }

 private:
  double delta_;
};

/// Open chain H = -J sum Z_i Z_{i+1} - Gamma sum X_i, lambda = (J, Gamma).
/// With the optional longitudinal term the family takes lambda = (J, Gamma,
/// h) and adds -h sum Z_i, which breaks the global spin-flip symmetry.
/// Capped at 8 spins (d = 256).
class TransverseFieldIsingModel final : public HamiltonianModel {
 public:
  explicit TransverseFieldIsingModel(int spins, bool longitudinal = false);
  int dim() const override { return dim_; }
  int param_count() const override { return longitudinal_ ? 3 : 2; }
  std::string family() const override { return "transverse-field-ising"; }
  Matrix evaluate(const RealVector& lambda) const override;
  bool has_analytic_derivative() const override { return true; }
  Matrix evaluate_param_deriv(const RealVector& lambda, int k) const override;
  int spins() const { return spins_; }

 private:
  int spins_;
  bool longitudinal_;
  int dim_;
  Matrix zz_sum_;
  Matrix x_sum_;
  Matrix z_sum_;
};

/// Hermitian samples H(lambda_k) on a scalar parameter axis, interpolated
/// entrywise with monotone cubic pieces. The derivative comes from the
/// interpolant, so it is exactly consistent with evaluate().
class DenseTabulatedModel final : public HamiltonianModel {
 public:
  DenseTabulatedModel(std::vector<double> lambdas, std::vector<Matrix> samples);

  int dim() const override { return dim_; }
  int param_count() const override { return 1; }
  std::string family() const override { return "dense-tabulated"; }
  Matrix evaluate(const RealVector& lambda) const override;
  bool has_analytic_derivative() const override { return true; }
  Matrix evaluate_param_deriv(const RealVector& lambda, int k) const override;

  const std::vector<double>& sample_lambdas() const { return lambdas_; }
  const std::vector<Matrix>& sample_matrices() const { return samples_; }

  std::string to_json_string() const;
  static DenseTabulatedModel from_json_string(const std::string& text);
  void save_json(const std::string& path) const;
  static DenseTabulatedModel load_json(const std::string& path);

 private:
  Matrix interpolate(double x, bool derivative) const;

  int dim_;
  std::vector<double> lambdas_;
  std::vector<Matrix> samples_;
  std::vector<Matrix> tangents_;
};

/// H(lambda_t): evaluates the model on the schedule. Rejects t outside [0, T].
Matrix hamiltonian_at(const HamiltonianModel& model,
                      const ParameterSchedule& sched, double t);

/// dH/dt = sum_k lambda_dot^(k) dH/dlambda^(k) at time t.
Matrix time_derivative_h(const HamiltonianModel& model,
                         const ParameterSchedule& sched, double t);

}  // namespace nadbound
