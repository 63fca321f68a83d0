#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace dpmpm {

/// Seedable, splittable random source for every sampler in the library.
///
/// All variates are produced from the raw 64-bit output of a mt19937_64
/// engine with hand-written transforms, so a given seed yields the same
/// stream on every platform and standard library. `split(id)` derives an
/// independent substream from the construction seed; it does not consume
/// state from the parent.
class Rng {
public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  Rng split(std::uint64_t stream_id) const;

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  // Uniform on (0, 1).
  double uniform_open();
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  std::size_t uniform_index(std::size_t n);

  // Gamma(shape, 1).
  double gamma(double shape);
  // log of a Gamma(shape, 1) variate; stays finite for tiny shapes where
  // the variate itself would underflow.
  double log_gamma(double shape);
  double beta(double a, double b);
  void dirichlet(std::span<const double> concentration, std::span<double> out);

  // Inverse-CDF draw over unnormalized non-negative weights, scanning
  // indices in ascending order.
  std::size_t categorical(std::span<const double> weights);
  // Same draw given a precomputed cumulative sum (last entry = total).
  std::size_t categorical_from_cdf(std::span<const double> cdf);

private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace dpmpm
