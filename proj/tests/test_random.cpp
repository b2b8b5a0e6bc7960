#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "tclsde/error.hpp"
#include "tclsde/random.hpp"

using namespace tclsde;

namespace {

using Block = std::array<std::uint32_t, 4>;

struct Moments {
  double mean = 0.0, var = 0.0;
};

template <typename Draw>
Moments moments(std::size_t n, Draw&& draw) {
  double s = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = draw();
    s += x;
    s2 += x * x;
  }
  Moments m;
  m.mean = s / static_cast<double>(n);
  m.var = s2 / static_cast<double>(n) - m.mean * m.mean;
  return m;
}

}  // namespace

TEST_CASE("philox4x32-10 known-answer vectors") {
  CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("mix64 is the splitmix64 step") {
  CHECK(mix64(0) == 0xe220a8397b1dcdafull);
  CHECK(mix64(1) != mix64(2));
}

TEST_CASE("streams are pure functions of the seed triple") {
  RandomStream a({7, 3, StreamTag::jumps});
  RandomStream b({7, 3, StreamTag::jumps});
  for (int i = 0; i < 1000; ++i) REQUIRE(a.next_u64() == b.next_u64());

  // normal() caches a spare; copies must continue identically too.
  RandomStream c({7, 3, StreamTag::brownian});
  c.normal();
  RandomStream d = c;
  for (int i = 0; i < 11; ++i) REQUIRE(c.normal() == d.normal());
}

TEST_CASE("distinct triples give uncorrelated streams") {
  const SeedSpec specs[] = {{1, 0, StreamTag::brownian}, {1, 1, StreamTag::brownian},
                            {1, 0, StreamTag::jumps},    {2, 0, StreamTag::brownian},
                            {1, std::uint64_t{1} << 32, StreamTag::brownian}};
  const std::size_t n = 50000;
  std::vector<std::vector<double>> draws;
  for (const auto& s : specs) {
    RandomStream r(s);
    std::vector<double> v(n);
    for (auto& x : v) x = r.uniform() - 0.5;
    draws.push_back(std::move(v));
  }
  for (std::size_t i = 0; i < draws.size(); ++i) {
    for (std::size_t j = i + 1; j < draws.size(); ++j) {
      double c = 0.0;
      for (std::size_t k = 0; k < n; ++k) c += draws[i][k] * draws[j][k];
      c /= static_cast<double>(n) / 12.0;  // correlation; variance of U - 1/2 is 1/12
      CHECK(std::abs(c) < 5.0 / std::sqrt(static_cast<double>(n)));
    }
  }
}

TEST_CASE("path index near the counter limit is rejected") {
  CHECK_THROWS_AS(RandomStream({0, std::uint64_t{1} << 62, StreamTag::brownian}), Error);
}

TEST_CASE("uniform draws lie in range with the right moments") {
  RandomStream r({11, 0, StreamTag::brownian});
  const std::size_t n = 200000;
  double lo = 1.0, hi = 0.0;
  const auto m = moments(n, [&] {
    const double u = r.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    return u;
  });
  CHECK(lo >= 0.0);
  CHECK(hi < 1.0);
  CHECK(std::abs(m.mean - 0.5) < 5.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(m.var == doctest::Approx(1.0 / 12.0).epsilon(0.01));
  for (int i = 0; i < 10000; ++i) REQUIRE(r.uniform_open() > 0.0);
}

TEST_CASE("normal draws pass a Kolmogorov-Smirnov test") {
  RandomStream r({5, 9, StreamTag::brownian});
  const std::size_t n = 100000;
  std::vector<double> v(n);
  for (auto& x : v) x = r.normal();
  std::sort(v.begin(), v.end());
  const double d = oracle::ks_statistic(v, [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); });
  CHECK(d < oracle::ks_critical(n));

  double s = 0.0, s2 = 0.0;
  for (double x : v) {
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n) < 5.0 / std::sqrt(static_cast<double>(n)));
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("exponential draws have unit mean and variance") {
  RandomStream r({5, 1, StreamTag::jumps});
  const std::size_t n = 200000;
  const auto m = moments(n, [&] { return r.exponential(); });
  CHECK(std::abs(m.mean - 1.0) < 5.0 / std::sqrt(static_cast<double>(n)));
  CHECK(m.var == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("poisson tail and moments") {
  RandomStream r({3, 0, StreamTag::jumps});
  const std::size_t n = 200000;
  std::size_t at_least_two = 0;
  for (std::size_t i = 0; i < n; ++i) at_least_two += sample_poisson(r, 2.0) >= 2 ? 1 : 0;
  const double p = 1.0 - 3.0 * std::exp(-2.0);
  const double phat = static_cast<double>(at_least_two) / n;
  CHECK(std::abs(phat - p) < 5.0 * std::sqrt(p * (1.0 - p) / n));

  // Large rates go through the chunked inversion.
  const auto m = moments(50000, [&] { return static_cast<double>(r.poisson(75.0)); });
  CHECK(std::abs(m.mean - 75.0) < 5.0 * std::sqrt(75.0 / 50000.0));
  CHECK(m.var == doctest::Approx(75.0).epsilon(0.05));

  CHECK(r.poisson(0.0) == 0);
  CHECK_THROWS_AS(r.poisson(-1.0), Error);
}

TEST_CASE("gaussian increments scale with sqrt(delta)") {
  RandomStream r({1, 2, StreamTag::brownian});
  const auto inc = sample_gaussian_increment(r, 3, 0.25);
  CHECK(inc.values.size() == 3);
  CHECK(inc.scale == doctest::Approx(0.5));

  const std::size_t n = 100000;
  const auto m = moments(n, [&] { return sample_gaussian_increment(r, 1, 0.01).values[0]; });
  CHECK(m.var == doctest::Approx(0.01).epsilon(0.02));

  CHECK_THROWS_AS(sample_gaussian_increment(r, 1, 0.0), Error);
  CHECK_THROWS_AS(sample_gaussian_increment(r, 0, 0.1), Error);
}
