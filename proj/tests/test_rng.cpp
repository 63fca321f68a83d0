#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "dpmpm/rng.hpp"

using dpmpm::Rng;

TEST_CASE("same seed gives the same stream") {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs = differs || x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("split derives streams without touching the parent") {
  Rng parent(7);
  Rng fresh(7);
  Rng s1 = parent.split(1), s1b = parent.split(1), s2 = parent.split(2);
  CHECK(parent.next_u64() == fresh.next_u64());
  CHECK(s1.next_u64() == s1b.next_u64());
  CHECK(s1.seed() != s2.seed());
  CHECK(s1.seed() != parent.seed());
}

TEST_CASE("uniform draws stay in range with the right mean") {
  Rng rng(1);
  double sum = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    const double v = rng.uniform_open();
    REQUIRE(v > 0.0);
    REQUIRE(v < 1.0);
    sum += u;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("normal moments") {
  Rng rng(2);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  CHECK(std::abs(s / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gamma moments across shapes") {
  Rng rng(3);
  for (double shape : {0.05, 0.3, 1.0, 2.5, 40.0}) {
    double s = 0, s2 = 0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double x = rng.gamma(shape);
      REQUIRE(x >= 0.0);
      s += x;
      s2 += x * x;
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    CAPTURE(shape);
    CHECK(mean == doctest::Approx(shape).epsilon(0.03));
    CHECK(var == doctest::Approx(shape).epsilon(0.08));
  }
}

TEST_CASE("log_gamma stays finite for tiny shapes") {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) CHECK(std::isfinite(rng.log_gamma(1e-3)));
}

TEST_CASE("beta and dirichlet") {
  Rng rng(5);
  double s = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) s += rng.beta(2.0, 6.0);
  CHECK(s / n == doctest::Approx(0.25).epsilon(0.02));

  std::vector<double> conc{0.5, 1.0, 3.0}, out(3), mean(3, 0.0);
  for (int i = 0; i < n; ++i) {
    rng.dirichlet(conc, out);
    CHECK(std::accumulate(out.begin(), out.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (int l = 0; l < 3; ++l) mean[l] += out[l] / n;
  }
  CHECK(mean[0] == doctest::Approx(0.5 / 4.5).epsilon(0.03));
  CHECK(mean[2] == doctest::Approx(3.0 / 4.5).epsilon(0.02));
}

TEST_CASE("categorical skips zero weights and matches frequencies") {
  Rng rng(6);
  const std::vector<double> w{0.0, 1.0, 0.0, 3.0, 0.0};
  std::vector<int> hits(5, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++hits[rng.categorical(w)];
  CHECK(hits[0] == 0);
  CHECK(hits[2] == 0);
  CHECK(hits[4] == 0);
  CHECK(hits[1] / double(n) == doctest::Approx(0.25).epsilon(0.03));

  const std::vector<double> cdf{0.0, 1.0, 1.0, 4.0, 4.0};
  std::vector<int> hits2(5, 0);
  for (int i = 0; i < n; ++i) ++hits2[rng.categorical_from_cdf(cdf)];
  CHECK(hits2[0] == 0);
  CHECK(hits2[2] == 0);
  CHECK(hits2[4] == 0);
  CHECK(hits2[3] / double(n) == doctest::Approx(0.75).epsilon(0.02));
}

TEST_CASE("uniform_index covers the range") {
  Rng rng(8);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) ++hits[rng.uniform_index(7)];
  for (int h : hits) CHECK(h == doctest::Approx(10000).epsilon(0.05));
}
