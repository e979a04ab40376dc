#include <doctest.h>

#include <cmath>
#include <limits>

#include "cmpreg/series.hpp"
#include "testutil.hpp"

using namespace cmpreg;

// log Z references computed with 40-digit arithmetic and frozen.
TEST_CASE("log normalizing constant matches high-precision references") {
  struct Case {
    double lambda, nu, log_z;
  };
  const Case cases[] = {
      {5.0, 0.5, 14.108148496329708},    // Z = 1.3399576e6
      {1.0, 1.0, 1.0},                   // Z = e
      {0.5, 0.0, 0.6931471805599453},    // geometric, Z = 2
      {10.0, 0.3, 650.26194095012887},   // Z = 2.5419836e282
      {50.0, 1.0, 50.0},
      {2.0, 1.5, 1.6336767935803738},
      {30.0, 0.5, 452.50657202588047},   // Z = 3.3197643e196
  };
  for (const Case& c : cases) {
    LogZ z = log_z_original(OriginalParams(c.lambda, c.nu));
    CHECK_MESSAGE(close_abs(z.log_value, c.log_z, 1e-9), c.lambda, " ", c.nu,
                  " -> ", z.log_value);
    CHECK(z.converged);
    CHECK(z.terms_used <= kSeriesMaxTerms);
    CHECK(z.tail_bound < 1e-11);
  }
}

TEST_CASE("series reduces to the Poisson normalizer at nu = 1") {
  for (double lambda : {0.1, 1.0, 5.0, 17.3, 50.0}) {
    LogZ z = log_z_ln(std::log(lambda), 1.0);
    CHECK_MESSAGE(close_abs(z.log_value, lambda, 1e-10), lambda, " -> ",
                  z.log_value);
  }
}

TEST_CASE("mathematical divergence is an error in both modes") {
  CHECK_THROWS_AS(log_z_original(OriginalParams(1.0, 0.0)),
                  DivergentSeriesError);
  CHECK_THROWS_AS(log_z_original(OriginalParams(1.5, 0.0)),
                  DivergentSeriesError);
  CHECK_THROWS_AS(log_z_ln(0.0, 0.0), DivergentSeriesError);
  CHECK_THROWS_AS(z_direct_compat(OriginalParams(2.0, 0.0)),
                  DivergentSeriesError);
  // nu = 0 with lambda < 1 is a plain geometric series.
  CHECK(OriginalParams(0.99, 0.0).divergent() == false);
  CHECK(OriginalParams(1.0, 0.0).divergent() == true);
  LogZ z = log_z_original(OriginalParams(0.5, 0.0));
  CHECK(close_abs(z.log_value, -std::log1p(-0.5), 1e-12));
}

TEST_CASE("non-convergence is flagged, not silently returned") {
  LogZ z = log_z_ln(std::log(5.0), 0.5, 1e-12, 5);
  CHECK_FALSE(z.converged);
  CHECK(z.terms_used == 5);
  LogZ full = log_z_ln(std::log(5.0), 0.5);
  CHECK(z.log_value < full.log_value);  // truncation can only undershoot
}

TEST_CASE("tighter tolerance never uses fewer terms") {
  LogZ loose = log_z_ln(std::log(5.0), 0.5, 1e-6, kSeriesMaxTerms);
  LogZ tight = log_z_ln(std::log(5.0), 0.5, 1e-12, kSeriesMaxTerms);
  CHECK(loose.terms_used <= tight.terms_used);
  CHECK(close_abs(loose.log_value, tight.log_value, 1e-5));
}

TEST_CASE("log Z is increasing in lambda and decreasing in nu") {
  double prev = log_z_ln(std::log(0.5), 0.7).log_value;
  for (double lambda : {1.0, 2.0, 4.0, 8.0}) {
    double cur = log_z_ln(std::log(lambda), 0.7).log_value;
    CHECK(cur > prev);
    prev = cur;
  }
  prev = log_z_ln(std::log(3.0), 0.2).log_value;
  for (double nu : {0.5, 1.0, 2.0, 4.0}) {
    double cur = log_z_ln(std::log(3.0), nu).log_value;
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("mean-scale and classic-scale normalizers agree") {
  MeanParams p(5.0, 0.7);
  LogZ via_mean = log_z_mean(p);
  LogZ via_original = log_z_original(to_original(p));
  CHECK(via_mean.log_value == via_original.log_value);
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(OriginalParams(0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(OriginalParams(-1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(OriginalParams(5.0, -0.1), std::domain_error);
  CHECK_THROWS_AS(MeanParams(0.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(MeanParams(0.1, -3.0), std::domain_error);  // base <= 0
  CHECK_THROWS_AS(log_z_ln(1.0, 1.0, 0.0, 100), std::domain_error);
  CHECK_THROWS_AS(log_z_ln(1.0, 1.0, 1e-12, 0), std::domain_error);
}

TEST_CASE("mean-scale map matches the closed form") {
  MeanParams p(5.0, std::log(2.0));
  OriginalParams o = to_original(p);
  CHECK(close_rel(o.lambda(), 27.5625, 1e-12));  // (5 + 1/4)^2
  CHECK(o.nu() == 2.0);
  CHECK(close_rel(approx_mean(o), 5.0, 1e-12));
  // Classic-scale approximations: lambda^(1/nu) and lambda^(1/nu)/nu.
  OriginalParams q(5.0, 0.5);
  CHECK(close_rel(approx_mean(q), 25.5, 1e-12));
  CHECK(close_rel(approx_variance(q), 50.0, 1e-12));
  CHECK_THROWS_AS(approx_mean(OriginalParams(0.5, 0.0)), std::domain_error);
}

TEST_CASE("direct accumulation mode mirrors naive arithmetic") {
  // Small case: agrees with the log-space engine.
  OriginalParams small(0.8, 0.6);
  DirectZ direct = z_direct_compat(small);
  CHECK_FALSE(direct.overflowed);
  CHECK(close_rel(std::log(direct.value),
                  log_z_original(small).log_value, 1e-12));
  // The growing terms cross the double range: overflow, not an answer.
  DirectZ blown = z_direct_compat(OriginalParams(5.0, 0.1));
  CHECK(blown.overflowed);
  CHECK(std::isinf(blown.value));
  CHECK(blown.terms_used <= 1000);
}
