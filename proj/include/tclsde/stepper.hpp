/**
 * @file stepper.hpp
 * @brief Stochastic theta method for the SDE without time change.
 *
 *   Y_{n+1} = Y_n + theta f(t_{n+1}, Y_{n+1}) dt + (1 - theta) f(t_n, Y_n) dt
 *             + g(t_n, Y_n) dW_n + H_n,
 *   H_n = sum_{i <= K_n} h(t_n, Y_n, z_i) - rho_n dt,  rho_n = int h(t_n, Y_n, z) mu(dz).
 *
 * The implicit equation F_{t_{n+1}}(Y_{n+1}) = F_n + G_n + H_n with
 * F_t(y) = y - theta dt f(t, y) is solved by Newton's method started from
 * the explicit update. Well-posedness requires theta * L * dt <= 1/2.
 */
#pragma once

#include <cstddef>
#include <vector>

#include "tclsde/model.hpp"
#include "tclsde/random.hpp"

namespace tclsde {

struct ThetaParams {
  double theta = 0.5;
  double delta = 0.0;
  double newton_tol = 1e-5;
  int newton_max_iter = 50;
};

/// Throws ValidationError listing every violated constraint.
void check_well_posed(const ModelSpec& model, const ThetaParams& params);

struct StepNoise {
  Vector dW;                   // dimension m
  std::vector<double> marks;   // one per jump in the step
  std::size_t jump_count() const noexcept { return marks.size(); }
};

StepNoise draw_step_noise(const ModelSpec& model, double delta, RandomStream& brownian,
                          RandomStream& jumps);
/// Refills an existing StepNoise without reallocating.
void draw_step_noise(const ModelSpec& model, double delta, RandomStream& brownian,
                     RandomStream& jumps, StepNoise& out);

Vector jump_increment(const ModelSpec& model, double t_n, const Vector& y_n,
                      const StepNoise& noise, double delta);

struct StepResult {
  Vector state;
  int iterations = 0;
  double residual = 0.0;
};

/// Reusable per-path stepper with preallocated workspace. Not thread-safe;
/// use one per worker.
class ThetaStepper {
 public:
  ThetaStepper(const ModelSpec& model, const ThetaParams& params);

  const ThetaParams& params() const noexcept { return params_; }
  const ModelSpec& model() const noexcept { return *model_; }

  /// Advances y in place from t_n; returns Newton iterations, residual via out param.
  int step(double t_n, Vector& y, const StepNoise& noise, double& residual);
  /// Explicit update with coefficients frozen at (t_n, y_n).
  void frozen_euler(double t_n, const Vector& y, const StepNoise& noise, Vector& out);
  /// Solves y - theta dt f(t, y) = rhs.
  Vector implicit_inverse(double t, const Vector& rhs);
  /// Newton from a given starting point; returns iterations.
  int solve_implicit(double t_next, const Vector& rhs, Vector& y, double& residual, bool force_one);

 private:
  void accumulate_noise(double t_n, const Vector& y, const StepNoise& noise, Vector& out);

  const ModelSpec* model_;
  ThetaParams params_;
  Vector f_, h_, rho_, rhs_, residual_vec_, correction_;
  Matrix g_, jac_, newton_matrix_;
};

StepResult theta_step(const ModelSpec& model, const ThetaParams& params, double t_n,
                      const Vector& y_n, const StepNoise& noise);

Vector frozen_euler_step(const ModelSpec& model, double t_n, const Vector& y_n,
                         const StepNoise& noise, double delta);

/// Supplies the noise for step n of a path.
class NoiseSource {
 public:
  virtual ~NoiseSource() = default;
  virtual void next(std::size_t step, StepNoise& out) = 0;
};

/// Fresh per-step draws: Brownian increment, Poisson(lambda dt) count, marks.
class StreamNoiseSource final : public NoiseSource {
 public:
  StreamNoiseSource(const ModelSpec& model, double delta, RandomStream brownian,
                    RandomStream jumps);
  void next(std::size_t step, StepNoise& out) override;

 private:
  const ModelSpec* model_;
  double delta_;
  RandomStream brownian_;
  RandomStream jumps_;
};

struct ThetaRun {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<int> newton_iterations;  // one per step
  double max_residual = 0.0;
};

/// Throws NewtonDivergence carrying the failing step index.
ThetaRun simulate_theta_path(const ModelSpec& model, const ThetaParams& params,
                             std::size_t horizon_steps, NoiseSource& noise);

}  // namespace tclsde
