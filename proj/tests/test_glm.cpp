#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "cmpreg/glm.hpp"
#include "testutil.hpp"

using namespace cmpreg;

TEST_CASE("intercept-only fit recovers the closed form") {
  Eigen::VectorXd y(6);
  y << 1, 2, 3, 4, 5, 9;
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(6, 1);
  GlmFit fit = fit_poisson_irls(y, X);
  CHECK(fit.converged);
  // MLE of a constant rate is the sample mean.
  CHECK(close_rel(fit.beta[0], std::log(4.0), 1e-10));
  CHECK(close_rel(fit.vcov(0, 0), 1.0 / 24.0, 1e-8));
  double ll = 0.0;
  for (int i = 0; i < 6; ++i) {
    ll += y[i] * std::log(4.0) - 4.0 - std::lgamma(y[i] + 1.0);
  }
  REQUIRE(fit.loglik.has_value());
  CHECK(close_rel(*fit.loglik, ll, 1e-10));
  CHECK(close_rel(fit.pearson_x2, 10.0, 1e-8));
  double dev = 0.0;
  for (int i = 0; i < 6; ++i) {
    dev += 2.0 * (y[i] * std::log(y[i] / 4.0) - (y[i] - 4.0));
  }
  CHECK(close_rel(fit.deviance, dev, 1e-8));
}

TEST_CASE("saturated two-point design drives deviance to zero") {
  Eigen::VectorXd y(4);
  y << 2, 2, 4, 4;
  Eigen::MatrixXd X(4, 2);
  X << 1, 0, 1, 0, 1, 1, 1, 1;
  GlmFit fit = fit_poisson_irls(y, X);
  CHECK(fit.converged);
  CHECK(close_rel(fit.beta[0], std::log(2.0), 1e-8));
  CHECK(close_rel(fit.beta[1], std::log(2.0), 1e-8));
  CHECK(close_abs(fit.deviance, 0.0, 1e-10));
  CHECK(close_abs(fit.pearson_x2, 0.0, 1e-10));
}

TEST_CASE("quasi layer rescales the covariance and drops the likelihood") {
  Eigen::VectorXd y(6);
  y << 1, 2, 3, 4, 5, 9;
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(6, 1);
  GlmFit fit = fit_poisson_irls(y, X);
  GlmFit quasi = quasi_poisson(fit);
  CHECK(quasi.quasi);
  CHECK_FALSE(quasi.loglik.has_value());
  CHECK(close_rel(quasi.sigma_hat, 2.0, 1e-8));  // X^2 = 10 over 5 df
  CHECK(close_rel(quasi.vcov(0, 0), fit.vcov(0, 0) * quasi.sigma_hat, 1e-12));
  // Mean model untouched.
  CHECK(quasi.beta == fit.beta);
  CHECK(quasi.deviance == fit.deviance);
}

TEST_CASE("rank-deficient designs are a hard error") {
  Eigen::VectorXd y(5);
  y << 1, 2, 3, 4, 5;
  Eigen::MatrixXd X(5, 2);
  X.col(0).setOnes();
  X.col(1).setOnes();  // duplicate of the intercept
  CHECK_THROWS_AS(fit_poisson_irls(y, X), SingularDesignError);
}

TEST_CASE("responses must be nonnegative integer counts") {
  Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 1);
  Eigen::VectorXd neg(3), frac(3), nan(3);
  neg << 1, -1, 2;
  frac << 1, 2.5, 2;
  nan << 1, std::nan(""), 2;
  CHECK_THROWS_AS(fit_poisson_irls(neg, X), std::domain_error);
  CHECK_THROWS_AS(fit_poisson_irls(frac, X), std::domain_error);
  CHECK_THROWS_AS(fit_poisson_irls(nan, X), std::domain_error);

  Eigen::VectorXd ok(3);
  ok << 0, 0, 3;  // zeros are legitimate counts
  CHECK_NOTHROW(fit_poisson_irls(ok, X));
}

TEST_CASE("shape mismatches and overparametrized fits are rejected") {
  Eigen::VectorXd y(3);
  y << 1, 2, 3;
  Eigen::MatrixXd wrong_rows = Eigen::MatrixXd::Ones(4, 1);
  CHECK_THROWS_AS(fit_poisson_irls(y, wrong_rows), std::invalid_argument);
  Eigen::MatrixXd too_wide(3, 3);
  too_wide << 1, 0, 0, 1, 1, 0, 1, 0, 1;
  CHECK_THROWS_AS(fit_poisson_irls(y, too_wide), std::invalid_argument);
}

TEST_CASE("slope fit matches the score equations") {
  // Seeded synthetic data; solution checked against the score equations
  // X'(y - mu) = 0 rather than a frozen external value.
  Eigen::VectorXd y(8);
  y << 2, 1, 4, 3, 6, 8, 7, 12;
  Eigen::MatrixXd X(8, 2);
  for (int i = 0; i < 8; ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = i / 7.0;
  }
  GlmFit fit = fit_poisson_irls(y, X);
  CHECK(fit.converged);
  Eigen::VectorXd mu = (X * fit.beta).array().exp();
  Eigen::VectorXd score = X.transpose() * (y - mu);
  CHECK(close_abs(score[0], 0.0, 1e-8));
  CHECK(close_abs(score[1], 0.0, 1e-8));
  // Information inverse agrees with the reported covariance.
  Eigen::MatrixXd info = X.transpose() * mu.asDiagonal() * X;
  Eigen::MatrixXd vcov = info.inverse();
  CHECK(close_rel(fit.vcov(0, 0), vcov(0, 0), 1e-6));
  CHECK(close_rel(fit.vcov(1, 1), vcov(1, 1), 1e-6));
}
