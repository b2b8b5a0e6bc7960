#include <doctest.h>

#include <vector>

#include "tclsde/composer.hpp"
#include "tclsde/error.hpp"

using namespace tclsde;

namespace {

ThetaRun counting_run(std::size_t steps) {
  ThetaRun run;
  for (std::size_t n = 0; n <= steps; ++n) {
    run.times.push_back(0.5 * n);
    run.states.push_back(Vector::Constant(1, static_cast<double>(n)));
  }
  return run;
}

InverseTimeChange hand_inverse() {
  SubordinatorPath path;
  path.delta = 0.5;
  path.values = {0.0, 0.3, 0.9, 2.0};
  return build_inverse(path, 1.0);
}

}  // namespace

TEST_CASE("composition picks Y at E(t)") {
  const auto E = hand_inverse();
  const std::vector<double> times = {0.0, 0.29, 0.3, 0.95, 1.0};
  const auto X = compose(counting_run(3), E, times);
  REQUIRE(X.states.size() == 5);
  const double expected[] = {0, 0, 1, 2, 2};
  for (std::size_t i = 0; i < 5; ++i) CHECK(X.states[i][0] == expected[i]);
  CHECK(X.stop_index == 2);
  CHECK(terminal_state(counting_run(3), E)[0] == 2.0);
}

TEST_CASE("short runs are a length mismatch") {
  try {
    terminal_state(counting_run(1), hand_inverse());
    FAIL("expected LengthMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LengthMismatch);
  }
}

TEST_CASE("knot composition drops flat repeats and ends at T") {
  SubordinatorPath path;
  path.delta = 0.25;
  path.values = {0.0, 0.4, 0.4, 0.7, 1.5};
  const auto E = build_inverse(path, 1.0);
  const auto X = compose_at_knots(counting_run(4), E);
  const std::vector<double> times = {0.0, 0.4, 0.7, 1.0};
  CHECK(X.physical_times == times);
  CHECK(X.states[1][0] == 2.0);  // after the flat stretch, the later state
  CHECK(X.states.back()[0] == 3.0);
}

TEST_CASE("time-changed path is reproducible and consistent") {
  const auto m = ou_model(OuParams{});
  TimeChangedPathPlan plan;
  plan.theta = ThetaParams{0.5, 1.0 / 128};
  plan.seed = 17;
  plan.path_index = 4;
  const auto a = simulate_time_changed_path(m, plan);
  const auto b = simulate_time_changed_path(m, plan);
  CHECK(a.run.states.size() == a.inverse.stop_index() + 1);
  CHECK(a.composed.states.back() == a.run.states.back());
  CHECK(a.composed.physical_times.back() == 1.0);
  REQUIRE(a.run.states.size() == b.run.states.size());
  for (std::size_t i = 0; i < a.run.states.size(); ++i) REQUIRE(a.run.states[i] == b.run.states[i]);
  // X is piecewise constant: physical times increase, composed states come from the run.
  for (std::size_t i = 1; i < a.composed.physical_times.size(); ++i) {
    CHECK(a.composed.physical_times[i] > a.composed.physical_times[i - 1]);
  }

  plan.identity_clock = true;
  const auto c = simulate_time_changed_path(m, plan);
  CHECK(c.inverse.stop_index() == 128);
}
