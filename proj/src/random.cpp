#include "tclsde/random.hpp"

#include <cmath>

#include "tclsde/error.hpp"

namespace tclsde {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

// Poisson inversion stays accurate (no e^-rate underflow) below this rate;
// larger rates are split into independent chunks.
constexpr double kPoissonChunk = 30.0;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(product >> 32);
  lo = static_cast<std::uint32_t>(product);
}

std::uint64_t poisson_inversion(RandomStream& stream, double rate) {
  const double u = stream.uniform();
  double p = std::exp(-rate);
  double cdf = p;
  std::uint64_t k = 0;
  while (u >= cdf && p > 0.0) {
    ++k;
    p *= rate / static_cast<double>(k);
    cdf += p;
  }
  return k;
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

RandomStream::RandomStream(const SeedSpec& seed) : seed_(seed) {
  if (seed.path_index >= (std::uint64_t{1} << 62)) {
    throw Error(ErrorCode::InvalidArgument, "path_index must be below 2^62");
  }
  const std::uint64_t k = mix64(seed.master_seed);
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

void RandomStream::refill() {
  const std::uint32_t path_lo = static_cast<std::uint32_t>(seed_.path_index);
  const std::uint32_t path_hi = static_cast<std::uint32_t>(seed_.path_index >> 32);
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32), path_lo,
      (path_hi << 2) | static_cast<std::uint32_t>(seed_.stream_tag)};
  const auto out = philox4x32_10(ctr, key_);
  buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
  buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
  buffered_ = 2;
  ++block_;
}

std::uint64_t RandomStream::next_u64() {
  if (buffered_ == 0) refill();
  return buffer_[2 - buffered_--];
}

double RandomStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RandomStream::uniform_open() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  // Marsaglia polar method.
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * factor;
  has_spare_ = true;
  return u * factor;
}

double RandomStream::exponential() { return -std::log(uniform_open()); }

std::uint64_t RandomStream::poisson(double rate) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw Error(ErrorCode::InvalidArgument, "Poisson rate must be finite and non-negative");
  }
  std::uint64_t total = 0;
  while (rate > kPoissonChunk) {
    total += poisson_inversion(*this, kPoissonChunk);
    rate -= kPoissonChunk;
  }
  if (rate > 0.0) total += poisson_inversion(*this, rate);
  return total;
}

RandomStream derive_stream(const SeedSpec& seed) { return RandomStream(seed); }

GaussianIncrement sample_gaussian_increment(RandomStream& stream, int dim, double delta) {
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be at least 1");
  GaussianIncrement inc;
  inc.scale = std::sqrt(delta);
  inc.values.resize(dim);
  for (int i = 0; i < dim; ++i) inc.values[i] = inc.scale * stream.normal();
  return inc;
}

std::uint64_t sample_poisson(RandomStream& stream, double rate) { return stream.poisson(rate); }

}  // namespace tclsde
