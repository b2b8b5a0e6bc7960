#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tclsde/stepper.hpp"
#include "tclsde/subordinator.hpp"

namespace tclsde {

/// X(t) = Y_{E(t)/dt} sampled at physical times; piecewise constant between knots.
struct ComposedPath {
  std::vector<double> physical_times;
  std::vector<Vector> states;
  std::size_t stop_index = 0;
};

/// Throws LengthMismatch when the run is shorter than the stop index.
ComposedPath compose(const ThetaRun& run, const InverseTimeChange& E,
                     std::span<const double> eval_times);

/// Composed path at the knots D(t_0), ..., D(t_N) followed by T.
ComposedPath compose_at_knots(const ThetaRun& run, const InverseTimeChange& E);

/// Y_N with N the stop index, i.e. X(T).
Vector terminal_state(const ThetaRun& run, const InverseTimeChange& E);

struct TimeChangedPath {
  SubordinatorPath subordinator;
  InverseTimeChange inverse;
  ThetaRun run;
  ComposedPath composed;
};

struct TimeChangedPathPlan {
  ThetaParams theta;
  double T = 1.0;
  double alpha = 0.8;
  int lepage_terms = 1000;
  bool lepage_drift = true;
  bool identity_clock = false;
  std::uint64_t seed = 0;
  std::uint64_t path_index = 0;
};

/// Samples the subordinator first, then runs exactly stop_index theta steps.
/// Streams: subordinator tag for D, brownian and jumps tags for Y.
TimeChangedPath simulate_time_changed_path(const ModelSpec& model, const TimeChangedPathPlan& plan);

}  // namespace tclsde
