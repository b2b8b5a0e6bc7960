/**
 * @file experiment.hpp
 * @brief Monte Carlo weak-error study over a ladder of step sizes.
 *
 * In coupled mode every path index reuses one realization of the driving
 * randomness across all step sizes: one LePage term set for the clock,
 * Brownian increments on the reference grid (coarser increments are sums),
 * and one list of jump events in operational time. Errors against the
 * reference then measure discretization bias rather than Monte Carlo noise.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tclsde/model.hpp"
#include "tclsde/stepper.hpp"

namespace tclsde {

enum class Coupling { coupled, independent };
enum class ModelId { ou, kubo };

Coupling coupling_from_string(const std::string& s);
std::string to_string(Coupling c);
ModelId model_id_from_string(const std::string& s);
std::string to_string(ModelId id);

struct ModelConfig {
  ModelId id = ModelId::ou;
  OuParams ou;
  KuboParams kubo;
  MeasureKind jump_kind = MeasureKind::paper_gaussian;
  double jump_c = 1.0;
};

ModelSpec build_model(const ModelConfig& config);

struct ExperimentPlan {
  ModelConfig model;
  double theta = 0.5;
  double T = 1.0;
  std::vector<double> delta_ladder;  // decreasing
  double delta_reference = 0.0;
  std::size_t paths = 1;
  std::string phi = "exp_neg_square";
  std::uint64_t seed = 0;
  Coupling coupling = Coupling::coupled;
  bool identity_clock = false;  // diagnostic: D(t) = t, no time change
  double alpha = 0.8;
  int lepage_terms = 1000;
  bool lepage_drift = true;
  double newton_tol = 1e-5;
  int newton_max_iter = 50;
};

/// Every violated constraint, empty when the plan is valid.
std::vector<std::string> plan_issues(const ExperimentPlan& plan);
/// Throws ValidationError carrying plan_issues.
void validate_plan(const ExperimentPlan& plan);

struct NewtonDiagnostics {
  std::map<int, std::uint64_t> iteration_histogram;  // iterations per step -> count
  double max_residual = 0.0;
  std::uint64_t steps = 0;

  void merge(const NewtonDiagnostics& other);
};

struct WeakEstimate {
  double estimate = 0.0;
  double std_error = 0.0;  // sample std / sqrt(successful paths)
  std::size_t paths_failed = 0;
};

struct WeakErrorRow {
  double delta = 0.0;
  double estimate = 0.0;
  double reference = 0.0;
  double abs_error = 0.0;
  double std_error = 0.0;
  std::size_t paths_failed = 0;
};

struct WeakErrorReport {
  std::vector<WeakErrorRow> rows;
  double reference_delta = 0.0;
  double reference_estimate = 0.0;
  double reference_std_error = 0.0;
  std::size_t reference_paths_failed = 0;
  double fitted_order = 0.0;  // NaN when fewer than two rows clear the noise floor
  bool noise_floor = false;   // fewer than three rows clear abs_error > 3 std_error
  NewtonDiagnostics diagnostics;
};

/// Shared per-path randomness for coupled estimation.
struct CoupledPathNoise {
  double reference_delta = 0.0;
  int dim_m = 1;
  std::size_t reference_steps = 0;
  std::vector<double> brownian;     // [step * dim_m + component]
  std::vector<double> event_times;  // ascending, operational time
  std::vector<double> event_marks;

  /// Noise of step `step` on the grid with spacing delta (a multiple of the
  /// reference step): summed Brownian increments and the events in
  /// (step * delta, (step + 1) * delta].
  void fill(double delta, std::size_t step, StepNoise& out) const;
};

CoupledPathNoise sample_coupled_noise(const ModelSpec& model, double reference_delta,
                                      std::size_t reference_steps, RandomStream& brownian,
                                      RandomStream& jumps);

class CoupledNoiseSource final : public NoiseSource {
 public:
  CoupledNoiseSource(const CoupledPathNoise& noise, double delta) : noise_(&noise), delta_(delta) {}
  void next(std::size_t step, StepNoise& out) override { noise_->fill(delta_, step, out); }

 private:
  const CoupledPathNoise* noise_;
  double delta_;
};

struct PathOutcome {
  std::vector<double> phi;   // one per requested delta
  std::vector<char> failed;  // NewtonDivergence at that delta
  NewtonDiagnostics diagnostics;
};

/// Simulates X_delta(T) for one path index at every requested step size.
PathOutcome simulate_path_outcome(const ModelSpec& model, const ExperimentPlan& plan,
                                  const TestFunction& phi, std::span<const double> deltas,
                                  std::uint64_t path_index);

WeakEstimate estimate_weak_value(const ExperimentPlan& plan, double delta, int threads = 1);

WeakErrorReport run_order_study(const ExperimentPlan& plan, int threads = 1);

/// Least-squares slope of log(error) against log(delta).
double fit_order(std::span<const std::pair<double, double>> rows);

struct LaplaceRow {
  double lambda = 0.0;
  double estimate = 0.0;
  double target = 0.0;
  double std_error = 0.0;
};

/// Monte Carlo E[exp(-lambda D(t))] against exp(-t lambda^alpha).
std::vector<LaplaceRow> laplace_diagnostic(double alpha, int lepage_terms,
                                           std::span<const double> lambdas, std::size_t paths,
                                           std::uint64_t seed, int threads = 1, double t = 1.0,
                                           bool small_jump_drift = true);

}  // namespace tclsde
