#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "cmpreg/distribution.hpp"
#include "testutil.hpp"

using namespace cmpreg;

// Exact-moment references computed by brute-force summation in 40-digit
// arithmetic, frozen here.
TEST_CASE("exact moments match high-precision references") {
  struct Case {
    double mu, phi, mean, variance;
  };
  const Case cases[] = {
      {5.0, 0.5, 4.99415853599514, 3.15617625324603},
      {10.0, 1.0, 9.99637772450504, 3.79644882084829},
      {10.0, -1.0, 10.0499929136752, 24.6659924093117},
      {5.0, 0.0, 5.0, 5.0},
      {10.0, 1.8, 9.99605020300509, 1.72263872313981},
      {2.0, -1.0, 2.02579584404086, 3.49662117957773},
      {25.0, 0.0, 25.0, 25.0},
  };
  for (const Case& c : cases) {
    Moments m = exact_moments(MeanParams(c.mu, c.phi));
    CHECK(m.method == MomentMethod::exact_series);
    CHECK_MESSAGE(close_rel(m.mean, c.mean, 1e-9), c.mu, " ", c.phi, " -> ",
                  m.mean);
    CHECK_MESSAGE(close_rel(m.variance, c.variance, 1e-9), c.mu, " ", c.phi,
                  " -> ", m.variance);
  }
}

TEST_CASE("log pmf reduces to Poisson at phi = 0") {
  // Poisson(10) at y = 10, reference from an independent implementation.
  CHECK(close_abs(log_pmf(MeanParams(10.0, 0.0), 10),
                  -2.0785616431350585, 1e-10));
  for (int y : {0, 1, 3, 7, 12}) {
    double direct =
        y * std::log(4.2) - 4.2 - std::lgamma(y + 1.0);
    CHECK(close_abs(log_pmf(MeanParams(4.2, 0.0), y), direct, 1e-10));
  }
}

TEST_CASE("pmf sums to one across the dispersion range") {
  for (double phi : {-1.6, -1.0, 0.0, 1.0, 1.8}) {
    for (double mu : {0.5, 2.0, 10.0, 25.0}) {
      // Small mu with strong overdispersion lands outside the mean-scale
      // domain (power base <= 0); rejection is covered elsewhere.
      double nu = std::exp(phi);
      if (mu + (nu - 1.0) / (2.0 * nu) <= 0.0) continue;
      PmfTable table = pmf_table(MeanParams(mu, phi));
      CHECK(table.complete);
      double total = std::accumulate(table.pmf.begin(), table.pmf.end(), 0.0);
      CHECK_MESSAGE(close_abs(total, 1.0, 1e-8), mu, " ", phi, " -> ", total);
    }
  }
}

TEST_CASE("successive pmf ratios follow y^nu / lambda") {
  for (double phi : {-1.6, -0.5, 0.0, 0.9, 1.8}) {
    for (double mu : {1.5, 6.0, 20.0}) {
      double nu = std::exp(phi);
      if (mu + (nu - 1.0) / (2.0 * nu) <= 0.0) continue;
      MeanParams p(mu, phi);
      OriginalParams o = to_original(p);
      for (int y = 1; y <= 8; ++y) {
        double lhs = std::exp(log_pmf(p, y - 1) - log_pmf(p, y));
        double rhs = std::exp(o.nu() * std::log(static_cast<double>(y)) -
                              o.log_lambda());
        CHECK_MESSAGE(close_rel(lhs, rhs, 1e-10), mu, " ", phi, " ", y);
      }
    }
  }
}

TEST_CASE("cdf walks to one and rejects bad arguments") {
  MeanParams p(5.0, 0.0);
  QuantileResult far = quantile(p, 1.0 - 1e-13);
  CHECK(close_abs(cdf(p, far.value + 5), 1.0, 1e-10));
  CHECK(cdf(p, 0) > 0.0);
  CHECK(cdf(p, 3) < cdf(p, 4));
  CHECK_THROWS_AS(cdf(p, -1), std::domain_error);
  CHECK_THROWS_AS(log_pmf(p, -2), std::domain_error);
}

TEST_CASE("quantile inverts the cdf and caps in the far tail") {
  MeanParams p(5.0, 0.0);
  CHECK(quantile(p, 0.0).value == 0);
  CHECK(quantile(p, 0.5).value == 5);   // Poisson(5) median
  CHECK(quantile(p, 0.99).value == 11);
  QuantileResult capped = quantile(p, 1.0);
  CHECK(capped.capped);
  QuantileResult regular = quantile(p, 0.9);
  CHECK_FALSE(regular.capped);
  // Smallest y with cdf(y) >= q, by construction.
  CHECK(cdf(p, regular.value) >= 0.9);
  CHECK(cdf(p, regular.value - 1) < 0.9);
  CHECK_THROWS_AS(quantile(p, -0.1), std::domain_error);
  CHECK_THROWS_AS(quantile(p, 1.5), std::domain_error);
}

TEST_CASE("sampling is reproducible per stream and matches the mean") {
  MeanParams p(10.0, 1.8);
  SplitMix64 a = SplitMix64::stream(42, 7);
  SplitMix64 b = SplitMix64::stream(42, 7);
  SplitMix64 c = SplitMix64::stream(42, 8);
  auto draws_a = sample(p, 200, a);
  auto draws_b = sample(p, 200, b);
  auto draws_c = sample(p, 200, c);
  CHECK(draws_a == draws_b);
  CHECK(draws_a != draws_c);

  SplitMix64 big(12345);
  auto draws = sample(p, 100000, big);
  double mean = std::accumulate(draws.begin(), draws.end(), 0.0) /
                static_cast<double>(draws.size());
  Moments m = exact_moments(p);
  double se = std::sqrt(m.variance / static_cast<double>(draws.size()));
  CHECK_MESSAGE(std::fabs(mean - m.mean) < 4.0 * se, mean, " vs ", m.mean);
}

TEST_CASE("dispersion indexes track the dispersion direction") {
  std::vector<int> ys{0, 1, 2, 3};
  DispersionIndexes over = indexes(MeanParams(10.0, -1.0), ys);
  DispersionIndexes even = indexes(MeanParams(5.0, 0.0), ys);
  DispersionIndexes under = indexes(MeanParams(10.0, 1.0), ys);
  CHECK(over.di > 1.0);
  CHECK(close_abs(even.di, 1.0, 1e-9));
  CHECK(under.di < 1.0);
  // Poisson: ZI = 1 + (-mu)/mu = 0; excess zeros flip the sign.
  CHECK(close_abs(even.zi, 0.0, 1e-9));
  CHECK(over.zi > 0.0);
  CHECK(under.zi < 0.0);
  // Poisson successive ratios are lambda / (y + 1).
  for (auto [y, ratio] : even.ht) {
    CHECK(close_rel(ratio, 5.0 / (y + 1), 1e-10));
  }
  CHECK(even.ht.size() == ys.size());
}

TEST_CASE("approximate moments on both scales") {
  Moments approx = approx_moments(MeanParams(10.0, 1.0));
  CHECK(approx.method == MomentMethod::approximation);
  CHECK(approx.mean == 10.0);
  MeanParams p(10.0, 1.0);
  CHECK(close_rel(approx.variance, p.base() / p.nu(), 1e-14));
  // Squared distance between approximate and exact mean is tiny here.
  Moments exact = exact_moments(p);
  double err = (exact.mean - approx.mean) * (exact.mean - approx.mean);
  CHECK(err < 0.05);
}

TEST_CASE("moment and table walks propagate series failures") {
  // A term cap too small to finish is a flagged error, never a value.
  CHECK_THROWS_AS(exact_moments(MeanParams(50.0, 0.0), 1e-12, 30),
                  SeriesNotConvergedError);
  CHECK_THROWS_AS(log_pmf(OriginalParams(5.0, 0.5), 3, 1e-12, 4),
                  SeriesNotConvergedError);
  CHECK_THROWS_AS(log_pmf(OriginalParams(2.0, 0.0), 1),
                  DivergentSeriesError);
}
