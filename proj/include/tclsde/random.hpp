/**
 * @file random.hpp
 * @brief Counter-based random streams for reproducible parallel Monte Carlo.
 *
 * Every stream is a pure function of (master_seed, path_index, stream_tag).
 * The underlying generator is Philox4x32-10: the seed forms the key, and the
 * path index and tag occupy the upper counter words, so distinct triples walk
 * disjoint counter ranges under the same key. No state is shared between
 * streams, which is what makes per-path parallelism deterministic.
 */
#pragma once

#include <array>
#include <cstdint>

#include "tclsde/types.hpp"

namespace tclsde {

enum class StreamTag : std::uint32_t { brownian = 0, jumps = 1, subordinator = 2 };

struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t path_index = 0;
  StreamTag stream_tag = StreamTag::brownian;
};

/// One Philox4x32 bijection with 10 rounds.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// splitmix64 finalizer; used to derive keys and sub-seeds.
std::uint64_t mix64(std::uint64_t x);

class RandomStream {
 public:
  explicit RandomStream(const SeedSpec& seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1); safe as a log argument.
  double uniform_open();
  double normal();
  /// Unit-rate exponential.
  double exponential();
  std::uint64_t poisson(double rate);

  const SeedSpec& seed() const noexcept { return seed_; }

 private:
  void refill();

  SeedSpec seed_;
  std::array<std::uint32_t, 2> key_{};
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

RandomStream derive_stream(const SeedSpec& seed);

/// Brownian increment over a step of length delta: dim iid N(0, delta) values.
struct GaussianIncrement {
  Vector values;
  double scale = 0.0;  // sqrt(delta)
};

GaussianIncrement sample_gaussian_increment(RandomStream& stream, int dim, double delta);

std::uint64_t sample_poisson(RandomStream& stream, double rate);

}  // namespace tclsde
