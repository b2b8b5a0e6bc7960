#include "tclsde/composer.hpp"

#include "tclsde/error.hpp"

namespace tclsde {

namespace {

void require_length(const ThetaRun& run, const InverseTimeChange& E) {
  if (run.states.size() < E.stop_index() + 1) {
    throw Error(ErrorCode::LengthMismatch,
                "theta run has " + std::to_string(run.states.size()) +
                    " states but the time change needs " + std::to_string(E.stop_index() + 1));
  }
}

}  // namespace

ComposedPath compose(const ThetaRun& run, const InverseTimeChange& E,
                     std::span<const double> eval_times) {
  require_length(run, E);
  ComposedPath out;
  out.stop_index = E.stop_index();
  out.physical_times.reserve(eval_times.size());
  out.states.reserve(eval_times.size());
  for (double t : eval_times) {
    out.physical_times.push_back(t);
    out.states.push_back(run.states[E.index_at(t)]);
  }
  return out;
}

ComposedPath compose_at_knots(const ThetaRun& run, const InverseTimeChange& E) {
  std::vector<double> times(E.knots().begin(), E.knots().end() - 1);
  // Flat stretches of D repeat a knot; keep the last, which carries the later state.
  std::vector<double> unique_times;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (i + 1 < times.size() && times[i + 1] == times[i]) continue;
    unique_times.push_back(times[i]);
  }
  if (unique_times.empty() || unique_times.back() < E.horizon()) unique_times.push_back(E.horizon());
  return compose(run, E, unique_times);
}

Vector terminal_state(const ThetaRun& run, const InverseTimeChange& E) {
  require_length(run, E);
  return run.states[E.stop_index()];
}

TimeChangedPath simulate_time_changed_path(const ModelSpec& model, const TimeChangedPathPlan& plan) {
  const double delta = plan.theta.delta;
  SubordinatorPath sub;
  if (plan.identity_clock) {
    sub = identity_clock(delta, plan.T);
  } else {
    RandomStream stream({plan.seed, plan.path_index, StreamTag::subordinator});
    const auto terms = sample_covering_terms(plan.alpha, plan.lepage_terms, plan.T, delta,
                                             plan.lepage_drift, stream);
    sub = discretize(terms, delta);
  }
  auto inverse = build_inverse(sub, plan.T);
  StreamNoiseSource noise(model, delta, RandomStream({plan.seed, plan.path_index, StreamTag::brownian}),
                          RandomStream({plan.seed, plan.path_index, StreamTag::jumps}));
  auto run = simulate_theta_path(model, plan.theta, inverse.stop_index(), noise);
  auto composed = compose_at_knots(run, inverse);
  return {std::move(sub), std::move(inverse), std::move(run), std::move(composed)};
}

}  // namespace tclsde
