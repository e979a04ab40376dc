#include "cmpreg/inference.hpp"

#include <cmath>

#include "cmpreg/special.hpp"

namespace cmpreg {

std::pair<double, double> aic_bic(double loglik, int np, int n) {
  if (np < 1) throw std::domain_error("aic_bic: np must be at least 1");
  if (n < 1) throw std::domain_error("aic_bic: n must be at least 1");
  double aic = -2.0 * loglik + 2.0 * np;
  double bic = -2.0 * loglik + np * std::log(static_cast<double>(n));
  return {aic, bic};
}

ComparisonRow lrt(double ll_small, double ll_big, int df) {
  if (df < 1) throw std::domain_error("lrt: df must be at least 1");
  double stat = 2.0 * (ll_big - ll_small);
  if (stat < 0.0) {
    // Two independent maximizations can disagree by roundoff; anything
    // beyond that means the models are not nested as claimed.
    if (ll_big < ll_small - 1e-6) {
      throw std::domain_error(
          "lrt: larger model fits worse than the nested one");
    }
    stat = 0.0;
  }
  ComparisonRow row;
  row.stat = stat;
  row.df = df;
  row.p_value = chi_sq_upper_tail(stat, df);
  return row;
}

ComparisonRow quasi_f_test(double qdev_small, double qdev_big, int np_small,
                           int np_big, double sigma_hat_big, int n) {
  int df1 = np_big - np_small;
  if (df1 < 1) throw std::domain_error("quasi_f_test: need np_big > np_small");
  int df2 = n - np_big;
  if (df2 < 1) {
    throw std::domain_error("quasi_f_test: no residual degrees of freedom");
  }
  if (!(sigma_hat_big > 0.0)) {
    throw std::domain_error("quasi_f_test: dispersion must be positive");
  }
  double f = ((qdev_small - qdev_big) / df1) / sigma_hat_big;
  if (f < 0.0) f = 0.0;
  ComparisonRow row;
  row.stat = f;
  row.df = df1;
  row.p_value = f_upper_tail(f, df1, df2);
  return row;
}

Prediction predict_mu(const Eigen::VectorXd& beta,
                      const Eigen::MatrixXd& vcov_beta,
                      const Eigen::VectorXd& x_new, double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw std::domain_error("predict_mu: level must be in (0, 1)");
  }
  if (x_new.size() != beta.size() || vcov_beta.rows() != beta.size() ||
      vcov_beta.cols() != beta.size()) {
    throw std::invalid_argument("predict_mu: dimension mismatch");
  }
  Prediction pred;
  pred.level = level;
  pred.eta = x_new.dot(beta);
  double var = x_new.dot(vcov_beta * x_new);
  pred.se_eta = std::sqrt(std::max(var, 0.0));
  double z = normal_quantile(1.0 - 0.5 * (1.0 - level));
  // Interval built on the linear predictor and exponentiated, so the
  // bounds stay positive.
  pred.mu = std::exp(pred.eta);
  pred.lower = std::exp(pred.eta - z * pred.se_eta);
  pred.upper = std::exp(pred.eta + z * pred.se_eta);
  return pred;
}

Prediction predict_mu(const FitResult& fit, const Eigen::VectorXd& x_new,
                      double level) {
  if (!fit.vcov_available) {
    throw std::runtime_error("predict_mu: covariance unavailable for this fit");
  }
  const Eigen::Index p = fit.beta.size();
  return predict_mu(fit.beta, fit.vcov.topLeftCorner(p, p), x_new, level);
}

Prediction predict_mu(const GlmFit& fit, const Eigen::VectorXd& x_new,
                      double level) {
  return predict_mu(fit.beta, fit.vcov, x_new, level);
}

}  // namespace cmpreg
