#include "cmpreg/glm.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace cmpreg {

namespace {

void check_counts(const Eigen::VectorXd& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i]) || y[i] < 0.0 || std::rint(y[i]) != y[i]) {
      throw std::domain_error(
          "response must be nonnegative integer counts");
    }
  }
}

double poisson_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    dev += y[i] > 0.0 ? y[i] * std::log(y[i] / mu[i]) - (y[i] - mu[i]) : mu[i];
  }
  return 2.0 * dev;
}

double poisson_loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta,
                      const Eigen::VectorXd& mu) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    ll += y[i] * eta[i] - mu[i] - std::lgamma(y[i] + 1.0);
  }
  return ll;
}

}  // namespace

GlmFit fit_poisson_irls(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                        double tol, int max_iter) {
  const Eigen::Index n = y.size();
  const Eigen::Index p = X.cols();
  if (X.rows() != n) {
    throw std::invalid_argument("fit_poisson_irls: X rows must match y");
  }
  if (n <= p) {
    throw std::invalid_argument(
        "fit_poisson_irls: need more observations than parameters");
  }
  check_counts(y);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < p) {
    throw SingularDesignError("design matrix is rank deficient");
  }

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  beta[0] = std::log(y.mean() + 0.5);
  Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd mu = eta.array().exp();
  double dev = poisson_deviance(y, mu);

  bool converged = false;
  int iter = 0;
  while (iter < max_iter) {
    ++iter;
    // Log link: weights mu, working response eta + (y - mu) / mu.
    Eigen::VectorXd z = eta + (y - mu).cwiseQuotient(mu);
    Eigen::MatrixXd xtw = X.transpose() * mu.asDiagonal();
    beta = (xtw * X).ldlt().solve(xtw * z);
    eta = X * beta;
    mu = eta.array().exp();
    if (!mu.allFinite()) break;
    double dev_new = poisson_deviance(y, mu);
    double rel = std::fabs(dev_new - dev) / (std::fabs(dev_new) + 0.1);
    dev = dev_new;
    if (rel < tol) {
      converged = true;
      break;
    }
  }

  GlmFit fit;
  fit.beta = beta;
  fit.n = static_cast<int>(n);
  fit.p = static_cast<int>(p);
  fit.converged = converged;
  fit.iterations = iter;
  fit.deviance = dev;
  Eigen::MatrixXd info = X.transpose() * mu.asDiagonal() * X;
  fit.vcov = info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.pearson_x2 = ((y - mu).array().square() / mu.array()).sum();
  fit.loglik = poisson_loglik(y, eta, mu);
  return fit;
}

GlmFit quasi_poisson(const GlmFit& poisson_fit) {
  GlmFit fit = poisson_fit;
  fit.sigma_hat = poisson_fit.pearson_x2 / (poisson_fit.n - poisson_fit.p);
  fit.vcov = poisson_fit.vcov * fit.sigma_hat;
  fit.loglik.reset();  // no likelihood behind the quasi family
  fit.quasi = true;
  return fit;
}

}  // namespace cmpreg
