#pragma once

#include <Eigen/Core>
#include <optional>
#include <stdexcept>

namespace cmpreg {

// Design matrix is rank deficient; refitting cannot fix it, so it is a hard
// error rather than a flag.
class SingularDesignError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GlmFit {
  Eigen::VectorXd beta;
  Eigen::MatrixXd vcov;
  // Absent for the quasi family, which has no likelihood.
  std::optional<double> loglik;
  double deviance = 0.0;
  double pearson_x2 = 0.0;
  double sigma_hat = 1.0;
  int n = 0;
  int p = 0;
  bool quasi = false;
  bool converged = false;
  int iterations = 0;
};

// Log-link Poisson regression by iteratively reweighted least squares.
// Start: intercept log(mean(y) + 0.5), remaining coefficients 0.  Stops on
// relative deviance change < tol.  vcov = (X' W X)^-1 at the final weights.
GlmFit fit_poisson_irls(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                        double tol = 1e-10, int max_iter = 100);

// Same mean fit, dispersion estimated as Pearson X^2 / (n - p); vcov scaled
// by it, log-likelihood dropped.
GlmFit quasi_poisson(const GlmFit& poisson_fit);

}  // namespace cmpreg
