#include "cmpreg/series.hpp"

#include <cmath>
#include <limits>

namespace cmpreg {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

void check_series_args(double rel_tol, int max_terms) {
  if (!(rel_tol > 0.0) || !(rel_tol < 1.0)) {
    throw std::domain_error("log_z: rel_tol must be in (0, 1)");
  }
  if (max_terms < 1) {
    throw std::domain_error("log_z: max_terms must be at least 1");
  }
}
}  // namespace

LogZ log_z_ln(double log_lambda, double nu, double rel_tol, int max_terms) {
  if (!std::isfinite(log_lambda)) {
    throw std::domain_error("log_z: log lambda must be finite");
  }
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw std::domain_error("log_z: nu must be nonnegative and finite");
  }
  check_series_args(rel_tol, max_terms);
  if (nu == 0.0 && log_lambda >= 0.0) {
    throw DivergentSeriesError(
        "log_z: series diverges for nu = 0 with lambda >= 1");
  }

  // Running log-sum-exp: M is the largest exponent seen, S the sum rescaled
  // by exp(-M).  The j = 0 term is exp(0).
  double big = 0.0;
  double scaled_sum = 1.0;
  double log_term = 0.0;
  const double log_rel_tol = std::log(rel_tol);

  LogZ result;
  result.terms_used = 1;
  result.tail_bound = kInf;

  for (int j = 1; j < max_terms; ++j) {
    double log_ratio = log_lambda - nu * std::log(static_cast<double>(j));
    log_term += log_ratio;
    if (log_term > big) {
      scaled_sum = scaled_sum * std::exp(big - log_term) + 1.0;
      big = log_term;
    } else {
      scaled_sum += std::exp(log_term - big);
    }
    ++result.terms_used;
    if (log_ratio < 0.0) {
      // Ratios only shrink from here, so the rest of the series is below
      // the geometric tail term / (1 - ratio).
      double ratio = std::exp(log_ratio);
      double log_tail = log_term - std::log1p(-ratio);
      double log_sum = big + std::log(scaled_sum);
      result.tail_bound = std::exp(log_tail - log_sum);
      if (log_tail < log_rel_tol + log_sum) {
        result.converged = true;
        break;
      }
    }
  }

  result.log_value = big + std::log(scaled_sum);
  return result;
}

LogZ log_z_original(const OriginalParams& p, double rel_tol, int max_terms) {
  if (p.divergent()) {
    throw DivergentSeriesError(
        "log_z: series diverges for nu = 0 with lambda >= 1");
  }
  return log_z_ln(p.log_lambda(), p.nu(), rel_tol, max_terms);
}

LogZ log_z_mean(const MeanParams& p, double rel_tol, int max_terms) {
  return log_z_ln(p.nu() * std::log(p.base()), p.nu(), rel_tol, max_terms);
}

DirectZ z_direct_compat(const OriginalParams& p, int max_terms) {
  if (max_terms < 1) {
    throw std::domain_error("z_direct_compat: max_terms must be at least 1");
  }
  if (p.divergent()) {
    throw DivergentSeriesError(
        "z_direct_compat: series diverges for nu = 0 with lambda >= 1");
  }
  DirectZ result;
  double term = 1.0;
  double sum = 0.0;
  for (int j = 0; j < max_terms; ++j) {
    if (j > 0) {
      term *= p.lambda() / std::pow(static_cast<double>(j), p.nu());
    }
    sum += term;
    ++result.terms_used;
    if (std::isinf(sum) || std::isinf(term)) {
      result.value = kInf;
      result.overflowed = true;
      return result;
    }
    // Naive early exit: the term no longer moves the accumulated sum.
    if (j > 0 && term < sum * std::numeric_limits<double>::epsilon()) break;
  }
  result.value = sum;
  return result;
}

}  // namespace cmpreg
