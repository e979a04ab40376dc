#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

namespace cmpreg {

using Objective = std::function<double(const Eigen::VectorXd&)>;
using Gradient = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct OptimResult {
  Eigen::VectorXd argmax;
  double max_value = 0.0;
  bool converged = false;
  int iterations = 0;
  // Exact count of objective calls, finite-difference and line-search
  // probes included.
  long n_evals = 0;
  // Accepted objective values per iteration when record_history is set.
  std::vector<double> history;
};

struct BfgsOptions {
  // Stop when the gradient infinity norm is <= gtol * max(1, |f|).
  double gtol = 1e-6;
  // Also stop when the accepted relative step falls below this.
  double step_tol = 1e-10;
  int max_iter = 500;
  double armijo_c = 1e-4;
  double backtrack = 0.5;
  // Analytic gradient; finite differences when absent.
  Gradient gradient;
  bool record_history = false;
};

// Quasi-Newton ascent with backtracking line search from the identity
// inverse-Hessian seed.  The objective may return -inf to reject a region;
// it must be finite at x0.  Line-search failure or hitting max_iter returns
// the best iterate; a finite-difference run that stalls this way re-measures
// the gradient criterion at a coarser spacing (whose noise floor sits below
// gtol) before reporting converged == false, so a stop pinned at the optimum
// by rounding noise in the objective still counts as converged.
OptimResult maximize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                          const BfgsOptions& opts = {});
OptimResult maximize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                          double gtol, int max_iter);

// Central differences, h = sqrt(eps) * max(1, |x_i|).  Throws
// std::runtime_error naming the offending coordinate if a probe is not
// finite.
Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x);

// Central second differences, h = cbrt(eps) * max(1, |x_i|), symmetrized.
Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x);

}  // namespace cmpreg
