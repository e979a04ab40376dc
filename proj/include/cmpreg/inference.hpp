#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>

#include "cmpreg/glm.hpp"
#include "cmpreg/regression.hpp"

namespace cmpreg {

// One line of a model-comparison table.  fit_measure is the maximized
// log-likelihood, or the quasi-deviance for the quasi family (which has no
// AIC/BIC).  stat/df/p_value are filled by the tests below and left empty
// for a baseline row.
struct ComparisonRow {
  std::string model_label;
  int np = 0;
  double fit_measure = 0.0;
  std::optional<double> aic;
  std::optional<double> bic;
  std::optional<double> stat;
  std::optional<int> df;
  std::optional<double> p_value;
};

// AIC = -2 ll + 2 np, BIC = -2 ll + np log n.
std::pair<double, double> aic_bic(double loglik, int np, int n);

// Likelihood-ratio test of nested fits.  df >= 1 required.  A small
// likelihood violation (ll_big < ll_small by <= 1e-6) is treated as a tied
// fit (stat clamped to 0) rather than an error, since independent numeric
// maximizations can disagree at that scale.
ComparisonRow lrt(double ll_small, double ll_big, int df);

// Quasi-likelihood F test: F = ((qdev_small - qdev_big) / (np_big -
// np_small)) / sigma_hat_big on (np_big - np_small, n - np_big) degrees of
// freedom.  np counts include the dispersion parameter.  sigma_hat_big must
// be positive.
ComparisonRow quasi_f_test(double qdev_small, double qdev_big, int np_small,
                           int np_big, double sigma_hat_big, int n);

// Mean prediction at x_new with a delta-method interval built on the linear
// predictor scale and exponentiated, so the bounds are always positive.
struct Prediction {
  double eta = 0.0;
  double se_eta = 0.0;
  double mu = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
};

Prediction predict_mu(const Eigen::VectorXd& beta,
                      const Eigen::MatrixXd& vcov_beta,
                      const Eigen::VectorXd& x_new, double level = 0.95);
Prediction predict_mu(const FitResult& fit, const Eigen::VectorXd& x_new,
                      double level = 0.95);
Prediction predict_mu(const GlmFit& fit, const Eigen::VectorXd& x_new,
                      double level = 0.95);

}  // namespace cmpreg
