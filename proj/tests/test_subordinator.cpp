#include <doctest.h>

#include <cmath>
#include <vector>

#include "tclsde/error.hpp"
#include "tclsde/experiment.hpp"
#include "tclsde/subordinator.hpp"

using namespace tclsde;

namespace {

// First passage time inf{s : D(s) > t} of the realized series, by bisection.
double exact_inverse(const LePageTerms& terms, double t) {
  double lo = 0.0, hi = terms.horizon_S;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (terms.value_at(mid) > t ? hi : lo) = mid;
  }
  return hi;
}

LePageTerms sample_terms(std::uint64_t path, double S = 4.0) {
  RandomStream r({99, path, StreamTag::subordinator});
  return sample_lepage_terms(0.8, 1000, S, true, r);
}

}  // namespace

TEST_CASE("laplace exponent and small-jump drift") {
  CHECK(stable_laplace_exponent(0.8, 1.0) == 1.0);
  CHECK(stable_laplace_exponent(0.5, 4.0) == doctest::Approx(2.0));
  // int_0^c x nu(dx) for nu = alpha / Gamma(1 - alpha) x^(-1-alpha), here alpha = 1/2, c = 1.
  CHECK(small_jump_mean_rate(0.5, 1.0) == doctest::Approx(0.5 / std::sqrt(M_PI) / 0.5));
}

TEST_CASE("lepage terms are sorted, positive and consistently summed") {
  const auto terms = sample_terms(0, 2.0);
  REQUIRE(terms.jump_times.size() == 1000);
  for (std::size_t i = 0; i < terms.jump_times.size(); ++i) {
    CHECK(terms.jump_times[i] > 0.0);
    CHECK(terms.jump_times[i] <= 2.0);
    CHECK(terms.jump_sizes[i] > 0.0);
    if (i > 0) {
      CHECK(terms.jump_times[i] >= terms.jump_times[i - 1]);
      CHECK(terms.cumulative[i] >= terms.cumulative[i - 1]);
    }
  }
  CHECK(terms.drift > 0.0);
  CHECK(terms.value_at(0.0) == 0.0);

  RandomStream r({99, 0, StreamTag::subordinator});
  const double total = sample_lepage_total(0.8, 1000, 2.0, true, r);
  CHECK(total == doctest::Approx(terms.terminal_value()).epsilon(1e-12));

  RandomStream r2({99, 0, StreamTag::subordinator});
  CHECK(sample_lepage_terms(0.8, 1000, 2.0, false, r2).drift == 0.0);
}

TEST_CASE("bad subordinator parameters are rejected") {
  RandomStream r({1, 0, StreamTag::subordinator});
  CHECK_THROWS_AS(sample_lepage_terms(1.0, 1000, 1.0, true, r), Error);
  CHECK_THROWS_AS(sample_lepage_terms(0.8, 0, 1.0, true, r), Error);
  CHECK_THROWS_AS(discretize(sample_terms(0, 1.0), 0.3), Error);
}

TEST_CASE("discretized paths are nondecreasing and nest across grids") {
  for (std::uint64_t p = 0; p < 20; ++p) {
    const auto terms = sample_terms(p);
    const auto coarse = discretize(terms, 1.0 / 32);
    const auto fine = discretize(terms, 1.0 / 256);
    REQUIRE(coarse.values.size() == 4 * 32 + 1);
    CHECK(coarse.values[0] == 0.0);
    CHECK(coarse.horizon() == doctest::Approx(4.0));
    for (std::size_t n = 1; n < fine.values.size(); ++n) REQUIRE(fine.values[n] >= fine.values[n - 1]);
    for (std::size_t n = 0; n < coarse.values.size(); ++n) REQUIRE(coarse.values[n] == fine.values[8 * n]);
  }
}

TEST_CASE("inverse time change on a hand-built path") {
  SubordinatorPath path;
  path.delta = 0.5;
  path.values = {0.0, 0.3, 0.9, 2.0};
  const auto E = build_inverse(path, 1.0);
  CHECK(E.stop_index() == 2);
  CHECK(E.knots().size() == 4);
  CHECK(E.index_at(0.0) == 0);
  CHECK(E.index_at(0.29) == 0);
  CHECK(E.index_at(0.3) == 1);
  CHECK(E.index_at(0.5) == 1);
  CHECK(E.index_at(0.9) == 2);
  CHECK(E.index_at(1.0) == 2);
  CHECK(E(0.95) == 1.0);
  CHECK(evaluate_inverse(E, 0.4) == 0.5);
  CHECK_THROWS_AS(E.index_at(1.5), Error);
  CHECK_THROWS_AS(E.index_at(-0.1), Error);

  try {
    build_inverse(path, 2.0);
    FAIL("expected HorizonTooShort");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::HorizonTooShort);
  }
}

TEST_CASE("grid-point identity and sandwich bound on sampled paths") {
  const double T = 1.0;
  for (std::uint64_t p = 0; p < 25; ++p) {
    const auto terms = sample_terms(p);
    if (terms.terminal_value() <= T) continue;
    for (double delta : {1.0 / 16, 1.0 / 128, 1.0 / 1024}) {
      const auto path = discretize(terms, delta);
      const auto E = build_inverse(path, T);
      CHECK(path.values[E.stop_index()] <= T);
      CHECK(path.values[E.stop_index() + 1] > T);
      for (int k = 0; k <= 50; ++k) {
        const double t = T * k / 50.0;
        const std::size_t n = E.index_at(t);
        // E_delta(t) = t_n exactly when t lies in [D(t_n), D(t_{n+1})).
        REQUIRE(path.values[n] <= t);
        REQUIRE(t < path.values[n + 1]);
        REQUIRE(E(t) == static_cast<double>(n) * delta);
        const double exact = exact_inverse(terms, t);
        REQUIRE(E(t) <= exact + 1e-12);
        REQUIRE(exact - delta <= E(t) + 1e-12);
      }
    }
  }
}

TEST_CASE("refining the grid never decreases the inverse") {
  for (std::uint64_t p = 0; p < 20; ++p) {
    const auto terms = sample_terms(p);
    if (terms.terminal_value() <= 1.0) continue;
    const auto coarse = build_inverse(discretize(terms, 1.0 / 64), 1.0);
    const auto fine = build_inverse(discretize(terms, 1.0 / 512), 1.0);
    double prev = 0.0;
    for (int k = 0; k <= 200; ++k) {
      const double t = k / 200.0;
      REQUIRE(fine(t) >= coarse(t));
      REQUIRE(fine(t) >= prev);
      prev = fine(t);
    }
  }
}

TEST_CASE("covering terms always exceed T") {
  for (std::uint64_t p = 0; p < 200; ++p) {
    RandomStream r({5, p, StreamTag::subordinator});
    const auto terms = sample_covering_terms(0.8, 200, 2.0, 1.0 / 32, true, r);
    REQUIRE(terms.terminal_value() > 2.0);
    const double cells = terms.horizon_S * 32.0;
    REQUIRE(cells == std::round(cells));
  }
}

TEST_CASE("identity clock gives E(t) = floor(t / delta) delta") {
  const auto E = build_inverse(identity_clock(0.125, 1.0), 1.0);
  CHECK(E.stop_index() == 8);
  CHECK(E(0.3) == 0.25);
  CHECK(E(1.0) == 1.0);
}

TEST_CASE("laplace transform of D(1) at moderate sample size") {
  const double lambdas[] = {0.5, 1.0, 2.0, 4.0};
  const auto rows = laplace_diagnostic(0.8, 1000, lambdas, 20000, 3);
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    CHECK(row.target == doctest::Approx(std::exp(-std::pow(row.lambda, 0.8))));
    CHECK(std::abs(row.estimate - row.target) <= 5.0 * row.std_error);
  }
}
