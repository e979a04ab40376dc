#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

#include "cmpreg/distribution.hpp"
#include "cmpreg/regression.hpp"
#include "cmpreg/rng.hpp"
#include "testutil.hpp"

using namespace cmpreg;

namespace {

RegressionSpec make_spec(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
  RegressionSpec spec;
  spec.y = y;
  spec.X = X;
  return spec;
}

// Intercept + unit-spaced slope design.
Eigen::MatrixXd line_design(int n) {
  Eigen::MatrixXd X(n, 2);
  for (int i = 0; i < n; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = i / (n - 1.0);
  }
  return X;
}

Eigen::VectorXd draw_counts(const Eigen::MatrixXd& X,
                            const Eigen::VectorXd& beta, double phi,
                            std::uint64_t seed) {
  const int n = static_cast<int>(X.rows());
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    double mu = std::exp(X.row(i).dot(beta));
    SplitMix64 rng = SplitMix64::stream(seed, static_cast<std::uint64_t>(i));
    y[i] = sample(MeanParams(mu, phi), 1, rng)[0];
  }
  return y;
}

}  // namespace

TEST_CASE("likelihood at phi = 0 is the Poisson likelihood") {
  Eigen::MatrixXd X = line_design(10);
  Eigen::VectorXd beta(2);
  beta << 1.2, 0.7;
  Eigen::VectorXd y = draw_counts(X, beta, 0.0, 11);
  RegressionSpec spec = make_spec(y, X);

  double direct = 0.0;
  for (int i = 0; i < 10; ++i) {
    double eta = X.row(i).dot(beta);
    direct += y[i] * eta - std::exp(eta) - std::lgamma(y[i] + 1.0);
  }
  CHECK(close_rel(loglik_cmp_mu(beta, 0.0, spec), direct, 1e-12));

  spec.parametrization = Parametrization::original;
  CHECK(close_rel(loglik_cmp_original(beta, 0.0, spec), direct, 1e-12));
}

TEST_CASE("invalid parameter regions return -inf and are counted once") {
  Eigen::MatrixXd X = line_design(8);
  Eigen::VectorXd beta(2);
  beta << 0.0, 0.0;
  Eigen::VectorXd y = Eigen::VectorXd::Ones(8);
  RegressionSpec spec = make_spec(y, X);
  const double inf = std::numeric_limits<double>::infinity();

  long invalid = 0;
  CHECK(loglik_cmp_mu(beta, 9.0, spec, &invalid) == -inf);  // past the clamp
  CHECK(invalid == 1);
  // mu = 1 with strongly negative phi drives the pmf base below zero.
  CHECK(loglik_cmp_mu(beta, -2.0, spec, &invalid) == -inf);
  CHECK(invalid == 2);
  // A term cap too small for the series is a rejection, not an exception.
  spec.series_max_terms = 2;
  Eigen::VectorXd big(2);
  big << 3.0, 0.0;
  CHECK(loglik_cmp_mu(big, 0.0, spec, &invalid) == -inf);
  CHECK(invalid == 3);
}

TEST_CASE("evaluation is identical for any thread count") {
  Eigen::MatrixXd X = line_design(150);
  Eigen::VectorXd beta(2);
  beta << 1.5, 0.4;
  Eigen::VectorXd y = draw_counts(X, beta, 0.5, 17);
  RegressionSpec serial = make_spec(y, X);
  RegressionSpec threaded = make_spec(y, X);
  threaded.n_threads = 4;

  double a = loglik_cmp_mu(beta, 0.3, serial);
  double b = loglik_cmp_mu(beta, 0.3, threaded);
  CHECK(a == b);  // bitwise: fixed chunk boundaries, fixed combine order

  FitResult fs = fit_cmp(serial);
  FitResult ft = fit_cmp(threaded);
  CHECK(fs.loglik == ft.loglik);
  CHECK(fs.phi == ft.phi);
  CHECK(fs.beta == ft.beta);
}

TEST_CASE("duplicating every observation doubles the log-likelihood") {
  Eigen::MatrixXd X = line_design(9);
  Eigen::VectorXd beta(2);
  beta << 1.0, 0.5;
  Eigen::VectorXd y = draw_counts(X, beta, 0.0, 23);
  Eigen::MatrixXd X2(18, 2);
  X2 << X, X;
  Eigen::VectorXd y2(18);
  y2 << y, y;
  double single = loglik_cmp_mu(beta, 0.4, make_spec(y, X));
  double doubled = loglik_cmp_mu(beta, 0.4, make_spec(y2, X2));
  CHECK(close_rel(doubled, 2.0 * single, 1e-12));
}

TEST_CASE("fit recovers the generating parameters") {
  Eigen::MatrixXd X = line_design(200);
  Eigen::VectorXd beta(2);
  beta << 1.5, 0.6;

  for (double phi : {0.5, -0.7}) {
    Eigen::VectorXd y = draw_counts(X, beta, phi, 31);
    RegressionSpec spec = make_spec(y, X);
    FitResult fit = fit_cmp(spec);
    CHECK(fit.converged);
    CHECK(fit.vcov_available);
    CHECK(close_abs(fit.beta[0], 1.5, 0.3));
    CHECK(close_abs(fit.beta[1], 0.6, 0.5));
    CHECK(close_abs(fit.phi, phi, 0.6));
    CHECK(fit.n_evals > 0);
    CHECK(fit.iterations > 0);

    // Reported uncertainty pieces are internally consistent.
    REQUIRE(fit.se.size() == 3);
    for (int j = 0; j < 3; ++j) {
      CHECK(close_rel(fit.se[j], std::sqrt(fit.vcov(j, j)), 1e-12));
    }
    CHECK(close_rel(fit.est_se_ratio[0], fit.beta[0] / fit.se[0], 1e-12));
    CHECK(close_rel(fit.est_se_ratio[2], fit.phi / fit.se[2], 1e-12));
    CHECK(fit.vcov.isApprox(fit.vcov.transpose(), 1e-10));
  }
}

TEST_CASE("intercept-only fits agree across parametrizations") {
  int n = 120;
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(n, 1);
  Eigen::VectorXd beta(1);
  beta << 1.8;
  Eigen::VectorXd y = draw_counts(X, beta, 0.8, 41);

  RegressionSpec mean_spec = make_spec(y, X);
  RegressionSpec orig_spec = make_spec(y, X);
  orig_spec.parametrization = Parametrization::original;

  FitResult fm = fit_cmp(mean_spec);
  FitResult fo = fit_cmp(orig_spec);
  CHECK(fm.converged);
  CHECK(fo.converged);
  CHECK(fm.parametrization == Parametrization::mean);
  CHECK(fo.parametrization == Parametrization::original);
  // Same family, different coordinates: identical maximum.
  CHECK(close_abs(fm.loglik, fo.loglik, 1e-6));
  CHECK(close_abs(fm.phi, fo.phi, 1e-3));
  // log lambda = nu * log(mu + (nu-1)/(2 nu)) links the two intercepts.
  MeanParams at_max(std::exp(fm.beta[0]), fm.phi);
  CHECK(close_abs(to_original(at_max).log_lambda(), fo.beta[0], 1e-3));
}

TEST_CASE("correlation with the dispersion estimate comes from the vcov") {
  Eigen::MatrixXd X = line_design(150);
  Eigen::VectorXd beta(2);
  beta << 1.5, 0.5;
  Eigen::VectorXd y = draw_counts(X, beta, 0.0, 59);
  FitResult fit = fit_cmp(make_spec(y, X));
  REQUIRE(fit.vcov_available);
  Eigen::VectorXd corr = estimator_correlation(fit);
  REQUIRE(corr.size() == 2);
  for (int j = 0; j < 2; ++j) {
    CHECK(std::fabs(corr[j]) <= 1.0);
    double expect = fit.vcov(j, 2) / std::sqrt(fit.vcov(j, j) * fit.vcov(2, 2));
    CHECK(close_rel(corr[j], expect, 1e-12));
  }

  FitResult no_vcov = fit;
  no_vcov.vcov_available = false;
  CHECK_THROWS_AS(estimator_correlation(no_vcov), std::runtime_error);
}

TEST_CASE("shape and size guards") {
  Eigen::MatrixXd X = line_design(3);
  Eigen::VectorXd y = Eigen::VectorXd::Ones(3);
  // n must exceed p + 1 to leave a df for the dispersion.
  CHECK_THROWS_AS(fit_cmp(make_spec(y, X)), std::invalid_argument);

  Eigen::VectorXd beta(1);  // wrong length for a 2-column design
  beta << 1.0;
  Eigen::MatrixXd X8 = line_design(8);
  Eigen::VectorXd y8 = Eigen::VectorXd::Ones(8);
  CHECK_THROWS_AS(loglik_cmp_mu(beta, 0.0, make_spec(y8, X8)),
                  std::invalid_argument);
}
