#pragma once

#include <stdexcept>

namespace cmpreg {

// The normalizing series diverges mathematically (nu == 0 with lambda >= 1);
// no numeric escalation involved.
class DivergentSeriesError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// The adaptive series hit its term cap before meeting the tolerance.
class SeriesNotConvergedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Classic (lambda, nu) pair of the two-parameter count pmf
//   Pr(Y = y) = lambda^y / (y!)^nu / Z(lambda, nu).
// nu == 0 with lambda >= 1 is representable but divergent(); series ops
// refuse it.  log_lambda is the working representation: for extreme nu the
// lambda implied by a mean-scale pair can overflow double while its log is
// fine.
class OriginalParams {
 public:
  OriginalParams(double lambda, double nu);
  static OriginalParams from_log_lambda(double log_lambda, double nu);

  double lambda() const { return lambda_; }
  double nu() const { return nu_; }
  double log_lambda() const { return log_lambda_; }
  bool divergent() const { return nu_ == 0.0 && log_lambda_ >= 0.0; }

 private:
  OriginalParams() = default;
  double lambda_ = 0.0;
  double nu_ = 0.0;
  double log_lambda_ = 0.0;
};

// Mean-scale pair (mu, phi) with mu > 0 near the distribution mean and
// phi = log(nu).  The implied power base mu + (nu - 1) / (2 nu) must be
// positive; rejected here rather than at first use.
class MeanParams {
 public:
  MeanParams(double mu, double phi);

  double mu() const { return mu_; }
  double phi() const { return phi_; }
  double nu() const { return nu_; }
  double base() const { return base_; }

 private:
  double mu_;
  double phi_;
  double nu_;
  double base_;
};

// lambda = base^nu, carried out in log space.
OriginalParams to_original(const MeanParams& p);

// Closed-form moment approximations; accurate once nu <= 1 or
// lambda > 10^nu.  Require nu > 0.
double approx_mean(const OriginalParams& p);
double approx_variance(const OriginalParams& p);

struct LogZ {
  double log_value = 0.0;
  int terms_used = 0;
  bool converged = false;
  // Upper bound on the relative mass left past the truncation point.
  double tail_bound = 0.0;
};

}  // namespace cmpreg
