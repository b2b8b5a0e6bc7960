#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>

#include "tclsde/error.hpp"
#include "tclsde/stepper.hpp"

using namespace tclsde;

namespace {

Vector scalar(double x) { return Vector::Constant(1, x); }

StepNoise quiet(int m) {
  StepNoise n;
  n.dW = Vector::Zero(m);
  return n;
}

// Explicit Euler-Maruyama written out independently of the stepper.
Vector euler_maruyama(const ModelSpec& m, double t, const Vector& y, const StepNoise& noise, double dt) {
  Vector f(m.dim_d), h(m.dim_d), rho(m.dim_d);
  Matrix g(m.dim_d, m.dim_m);
  m.drift(t, y, f);
  m.diffusion(t, y, g);
  Vector out = y + dt * f + g * noise.dW;
  for (double z : noise.marks) {
    m.jump(t, y, z, h);
    out += h;
  }
  if (m.measure.has_jumps()) {
    compensator_value(m, t, y, rho);
    out -= dt * rho;
  }
  return out;
}

// Scalar drift -2x + sin(x): Lipschitz constant 3, genuinely nonlinear.
ModelSpec sine_model() {
  ModelSpec m;
  m.name = "sine";
  m.drift = [](double, const Vector& x, Vector& out) { out[0] = -2.0 * x[0] + std::sin(x[0]); };
  m.diffusion = [](double, const Vector&, Matrix& out) { out(0, 0) = 0.3; };
  m.jump = [](double, const Vector&, double, Vector& out) { out[0] = 0.0; };
  m.lipschitz_L = 3.0;
  m.x0 = scalar(1.0);
  return m;
}

}  // namespace

TEST_CASE("well-posedness guard") {
  const auto m = ou_model(2.0, 1.0, 0.6, 0.5);
  try {
    check_well_posed(m, ThetaParams{1.0, 0.5});
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    REQUIRE(e.issues().size() == 1);
    CHECK(e.issues()[0] == "theta*L*delta = 1 > 1/2");
  }
  CHECK_NOTHROW(check_well_posed(m, ThetaParams{1.0, 0.25}));
  CHECK_NOTHROW(check_well_posed(m, ThetaParams{0.0, 10.0}));
  try {
    check_well_posed(m, ThetaParams{1.5, -1.0});
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.issues().size() >= 2);
  }
}

TEST_CASE("backward Euler on dX = -X dt") {
  OuParams p{1.0, 0.0, 0.0, 0.0, 1.0};
  const auto m = ou_model(p, TruncatedLevyMeasure::none());
  const auto r = theta_step(m, ThetaParams{1.0, 0.5}, 0.0, scalar(1.0), quiet(1));
  CHECK(r.state[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(r.iterations == 1);
  CHECK(r.residual <= 1e-12);
}

TEST_CASE("theta = 0 reproduces explicit Euler-Maruyama state for state") {
  for (const auto& m : {ou_model(OuParams{}), kubo_model(KuboParams{})}) {
    const double dt = 1.0 / 256;
    ThetaStepper stepper(m, ThetaParams{0.0, dt});
    RandomStream bw({8, 0, StreamTag::brownian}), jw({8, 0, StreamTag::jumps});
    Vector y = m.x0, ref = m.x0;
    for (int n = 0; n < 1000; ++n) {
      const auto noise = draw_step_noise(m, dt, bw, jw);
      double residual = 1.0;
      CHECK(stepper.step(n * dt, y, noise, residual) == 0);
      ref = euler_maruyama(m, n * dt, ref, noise, dt);
      REQUIRE(y == ref);
      REQUIRE(residual == 0.0);
    }
  }
}

TEST_CASE("affine drifts need exactly one Newton iteration") {
  for (const auto& m : {ou_model(OuParams{}), kubo_model(KuboParams{})}) {
    for (double theta : {0.25, 0.5, 1.0}) {
      const double dt = 1.0 / 32;
      ThetaStepper stepper(m, ThetaParams{theta, dt});
      RandomStream bw({4, 1, StreamTag::brownian}), jw({4, 1, StreamTag::jumps});
      Vector y = m.x0;
      for (int n = 0; n < 200; ++n) {
        const auto noise = draw_step_noise(m, dt, bw, jw);
        double residual = 1.0;
        REQUIRE(stepper.step(n * dt, y, noise, residual) == 1);
        REQUIRE(residual <= 1e-12);
      }
    }
  }
}

TEST_CASE("nonlinear drift converges to tolerance") {
  const auto m = sine_model();
  ThetaParams params{1.0, 0.1, 1e-12, 50};
  ThetaStepper stepper(m, params);
  Vector y = scalar(2.0);
  double residual = 1.0;
  const int it = stepper.step(0.0, y, quiet(1), residual);
  CHECK(it >= 2);
  CHECK(residual <= 1e-12);
  CHECK(y[0] - 0.1 * (-2.0 * y[0] + std::sin(y[0])) == doctest::Approx(2.0).epsilon(1e-12));

  // No finite-difference Jacobian given: the fallback is used.
  CHECK_FALSE(static_cast<bool>(m.drift_jacobian));
}

TEST_CASE("Newton divergence reports the failing step") {
  const auto m = sine_model();
  ThetaParams params{1.0, 0.1, 1e-300, 1};
  RandomStream bw({1, 0, StreamTag::brownian}), jw({1, 0, StreamTag::jumps});
  StreamNoiseSource src(m, params.delta, bw, jw);
  try {
    simulate_theta_path(m, params, 10, src);
    FAIL("expected NewtonDivergence");
  } catch (const NewtonDivergence& e) {
    CHECK(e.step_index() == 0);
    CHECK(e.code() == ErrorCode::NewtonDivergence);
  }
}

TEST_CASE("contraction identity of the implicit map") {
  const auto m = ou_model(OuParams{});
  RandomStream r({2, 0, StreamTag::brownian});
  for (double theta : {0.5, 1.0}) {
    const double dt = 1.0 / 8;
    ThetaStepper stepper(m, ThetaParams{theta, dt});
    for (int k = 0; k < 1000; ++k) {
      const double x = 4.0 * r.normal(), y = 4.0 * r.normal(), t = r.uniform();
      const double fx = stepper.implicit_inverse(t, scalar(x))[0];
      const double fy = stepper.implicit_inverse(t, scalar(y))[0];
      const double expected = std::abs(x - y) / (1.0 + theta * dt * 2.0);
      const double ulp = std::numeric_limits<double>::epsilon() * (std::abs(x) + std::abs(y));
      REQUIRE(std::abs(std::abs(fx - fy) - expected) <= 4.0 * ulp);
      REQUIRE(std::abs(fx - fy) <= std::abs(x - y) / (1.0 - theta * dt * 2.0));
    }
  }
}

TEST_CASE("implicit correction of the OU step is exactly O(dt^2) without noise") {
  const auto m = ou_model(OuParams{});
  const double a1 = 2.0, a2 = 1.0, y0 = 0.5;
  for (double dt : {1.0 / 16, 1.0 / 64, 1.0 / 256}) {
    ThetaStepper stepper(m, ThetaParams{1.0, dt});
    Vector y = scalar(y0), euler(1);
    stepper.frozen_euler(0.0, y, quiet(1), euler);
    double residual;
    stepper.step(0.0, y, quiet(1), residual);
    const double delta_corr = y[0] - euler[0];
    CHECK(delta_corr == doctest::Approx(a1 * a1 * dt * dt * (y0 - a2) / (1.0 + dt * a1)).epsilon(1e-10));
  }
}

TEST_CASE("jump increments are compensated sums") {
  auto measure = TruncatedLevyMeasure::custom(1.0, [](double z) { return z > 0 ? 2.0 : 1.0; }, 2.0);
  const auto m = ou_model(OuParams{}, measure);
  StepNoise noise = quiet(1);
  noise.marks = {0.1, -0.4};
  const auto inc = jump_increment(m, 0.0, scalar(0.5), noise, 0.1);
  CHECK(inc[0] == doctest::Approx(0.5 * (0.1 - 0.4) - 0.1 * 0.25));
}

TEST_CASE("drawn step noise") {
  const auto with_jumps = ou_model(OuParams{});
  const auto without = ou_model(OuParams{}, TruncatedLevyMeasure::none());
  RandomStream bw({3, 0, StreamTag::brownian}), jw({3, 0, StreamTag::jumps});
  std::size_t total = 0;
  const int steps = 20000;
  const double dt = 0.05;
  for (int i = 0; i < steps; ++i) {
    const auto n = draw_step_noise(with_jumps, dt, bw, jw);
    REQUIRE(n.dW.size() == 1);
    total += n.jump_count();
  }
  const double rate = with_jumps.measure.lambda() * dt * steps;
  CHECK(std::abs(static_cast<double>(total) - rate) < 5.0 * std::sqrt(rate));
  CHECK(draw_step_noise(without, dt, bw, jw).jump_count() == 0);
}

TEST_CASE("simulate_theta_path records every step") {
  const auto m = kubo_model(KuboParams{});
  ThetaParams params{0.5, 1.0 / 64};
  RandomStream bw({6, 0, StreamTag::brownian}), jw({6, 0, StreamTag::jumps});
  StreamNoiseSource src(m, params.delta, bw, jw);
  const auto run = simulate_theta_path(m, params, 64, src);
  CHECK(run.states.size() == 65);
  CHECK(run.times.back() == doctest::Approx(1.0));
  CHECK(run.newton_iterations.size() == 64);
  CHECK(run.max_residual <= 1e-5);
  CHECK(run.states.front() == m.x0);
}
