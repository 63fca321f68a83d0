#include "dpmpm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace dpmpm {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

Rng Rng::split(std::uint64_t stream_id) const {
  return Rng(splitmix64(seed_ ^ splitmix64(stream_id + 0x632be59bd9b4e019ULL)));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_open() {
  double u;
  do {
    u = uniform();
  } while (u == 0.0);
  return u;
}

double Rng::normal() {
  // Marsaglia polar method; the second variate is discarded so that the
  // generator carries no hidden state besides the engine.
  double x, y, s;
  do {
    x = 2.0 * uniform() - 1.0;
    y = 2.0 * uniform() - 1.0;
    s = x * x + y * y;
  } while (s >= 1.0 || s == 0.0);
  return x * std::sqrt(-2.0 * std::log(s) / s);
}

std::size_t Rng::uniform_index(std::size_t n) {
  auto k = static_cast<std::size_t>(uniform() * static_cast<double>(n));
  return std::min(k, n - 1);
}

double Rng::gamma(double shape) {
  if (shape < 1.0) {
    return std::exp(log_gamma(shape));
  }
  // Marsaglia & Tsang (2000).
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_open();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double Rng::log_gamma(double shape) {
  if (shape >= 1.0) return std::log(gamma(shape));
  // Gamma(a) = Gamma(a + 1) * U^(1/a)
  const double g = gamma(shape + 1.0);
  return std::log(g) + std::log(uniform_open()) / shape;
}

double Rng::beta(double a, double b) {
  const double la = log_gamma(a);
  const double lb = log_gamma(b);
  const double mx = std::max(la, lb);
  const double ea = std::exp(la - mx);
  const double eb = std::exp(lb - mx);
  return ea / (ea + eb);
}

void Rng::dirichlet(std::span<const double> concentration, std::span<double> out) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < concentration.size(); ++l) {
    out[l] = log_gamma(concentration[l]);
    mx = std::max(mx, out[l]);
  }
  double total = 0.0;
  for (std::size_t l = 0; l < concentration.size(); ++l) {
    out[l] = std::exp(out[l] - mx);
    total += out[l];
  }
  for (std::size_t l = 0; l < concentration.size(); ++l) out[l] /= total;
}

std::size_t Rng::categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double target = uniform() * total;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k] <= 0.0) continue;
    if (target < weights[k]) return k;
    target -= weights[k];
    last_positive = k;
  }
  // Rounding left a sliver past the final positive weight.
  return last_positive;
}

std::size_t Rng::categorical_from_cdf(std::span<const double> cdf) {
  const double target = uniform() * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  if (it == cdf.end()) {
    // target == total after rounding; step back to the last non-empty bin
    --it;
    while (it != cdf.begin() && *(it - 1) == *it) --it;
  }
  return static_cast<std::size_t>(it - cdf.begin());
}

}  // namespace dpmpm
