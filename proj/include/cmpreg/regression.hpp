#pragma once

#include <Eigen/Core>

#include "cmpreg/series.hpp"

namespace cmpreg {

enum class Parametrization { original, mean };

struct RegressionSpec {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;
  Parametrization parametrization = Parametrization::mean;
  double series_rel_tol = kSeriesRelTol;
  int series_max_terms = kSeriesMaxTerms;
  // |phi| beyond this hits the -inf sentinel: outside it the series either
  // needs more terms than the cap or the offset term degenerates.
  double phi_clamp = 8.0;
  // Chunked parallel evaluation of the per-observation series; 0 = serial.
  // Chunk boundaries are fixed, so sums are identical for any thread count.
  int n_threads = 0;
};

struct FitResult {
  Eigen::VectorXd beta;
  double phi = 0.0;
  double loglik = 0.0;
  // (p+1) x (p+1), phi last; from the observed information (numeric Hessian
  // at the maximum, not the BFGS internal matrix).
  Eigen::MatrixXd vcov;
  bool vcov_available = false;
  Eigen::VectorXd se;
  Eigen::VectorXd est_se_ratio;
  long n_evals = 0;
  // Objective calls that hit the -inf sentinel (invalid parameter region or
  // a series that failed to converge).
  long invalid_evals = 0;
  int iterations = 0;
  bool converged = false;
  Parametrization parametrization = Parametrization::mean;
};

// Log-likelihood with mean-scale regression mu_i = exp(x_i' beta) and
// phi = log nu.  Invalid regions (|phi| past the clamp, nonpositive pmf
// base, series hitting the term cap) return -inf and bump *invalid_count
// when given; the optimizer treats such points as rejected steps.
double loglik_cmp_mu(const Eigen::VectorXd& beta, double phi,
                     const RegressionSpec& spec, long* invalid_count = nullptr);

// Same contract with lambda_i = exp(x_i' beta) on the classic scale.
double loglik_cmp_original(const Eigen::VectorXd& beta, double phi,
                           const RegressionSpec& spec,
                           long* invalid_count = nullptr);

// Maximum likelihood fit: warm start from the Poisson IRLS coefficients
// with phi = 0, then joint quasi-Newton ascent over (beta, phi).  A singular
// observed information leaves the estimates in place with
// vcov_available == false.
FitResult fit_cmp(const RegressionSpec& spec);

// corr(beta_j, phi) for each coefficient, read off the fitted vcov.
// Requires vcov_available.
Eigen::VectorXd estimator_correlation(const FitResult& fit);

}  // namespace cmpreg
