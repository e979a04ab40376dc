#include "cmpreg/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cmpreg {

namespace {

// Mass beyond this cumulative point is ignored by the table walkers.
constexpr double kTailMass = 1e-12;

struct LnForm {
  double log_lambda;
  double nu;
};

LnForm ln_form(const OriginalParams& p) {
  if (p.divergent()) {
    throw DivergentSeriesError(
        "series diverges for nu = 0 with lambda >= 1");
  }
  return {p.log_lambda(), p.nu()};
}

LnForm ln_form(const MeanParams& p) {
  return {p.nu() * std::log(p.base()), p.nu()};
}

double checked_log_z(const LnForm& f, double rel_tol, int max_terms) {
  LogZ z = log_z_ln(f.log_lambda, f.nu, rel_tol, max_terms);
  if (!z.converged) {
    throw SeriesNotConvergedError(
        "normalizing series did not converge within the term cap");
  }
  return z.log_value;
}

double log_pmf_ln(const LnForm& f, int y, double log_z) {
  return y * f.log_lambda - f.nu * std::lgamma(y + 1.0) - log_z;
}

void check_y(int y) {
  if (y < 0) throw std::domain_error("y must be nonnegative");
}

Moments exact_moments_ln(const LnForm& f, double rel_tol, int max_terms) {
  double log_z = checked_log_z(f, rel_tol, max_terms);
  double log_term = -log_z;  // y = 0
  double s1 = 0.0;
  double s2 = 0.0;
  bool done = false;
  for (int y = 1; y < max_terms && !done; ++y) {
    double log_ratio = f.log_lambda - f.nu * std::log(static_cast<double>(y));
    log_term += log_ratio;
    double p = std::exp(log_term);
    double dy = static_cast<double>(y);
    s1 += dy * p;
    s2 += dy * dy * p;
    if (log_ratio < 0.0) {
      // Ratio of successive y^2-weighted terms, decreasing in y; once it is
      // below 1 the weighted tail is under w * rho / (1 - rho).
      double rho = ((dy + 1.0) * (dy + 1.0) / (dy * dy)) *
                   std::exp(f.log_lambda - f.nu * std::log(dy + 1.0));
      if (rho < 1.0) {
        double w = dy * dy * p;
        done = w * rho / (1.0 - rho) < rel_tol * s2;
      }
    }
  }
  if (!done) {
    throw SeriesNotConvergedError(
        "moment series did not converge within the term cap");
  }
  return {s1, s2 - s1 * s1, MomentMethod::exact_series};
}

PmfTable pmf_table_ln(const LnForm& f, double rel_tol, int max_terms) {
  double log_z = checked_log_z(f, rel_tol, max_terms);
  PmfTable table;
  double log_term = -log_z;
  double cum = std::exp(log_term);
  table.pmf.push_back(cum);
  table.cdf.push_back(cum);
  for (int y = 1; y < max_terms; ++y) {
    if (cum >= 1.0 - kTailMass) {
      table.complete = true;
      break;
    }
    log_term += f.log_lambda - f.nu * std::log(static_cast<double>(y));
    double p = std::exp(log_term);
    cum += p;
    table.pmf.push_back(p);
    table.cdf.push_back(cum);
  }
  if (!table.complete && table.cdf.back() >= 1.0 - kTailMass) {
    table.complete = true;
  }
  return table;
}

double cdf_ln(const LnForm& f, int y, double rel_tol, int max_terms) {
  check_y(y);
  double log_z = checked_log_z(f, rel_tol, max_terms);
  double log_term = -log_z;
  double cum = std::exp(log_term);
  for (int k = 1; k <= y; ++k) {
    log_term += f.log_lambda - f.nu * std::log(static_cast<double>(k));
    cum += std::exp(log_term);
  }
  return cum;
}

QuantileResult quantile_ln(const LnForm& f, double q, double rel_tol,
                           int max_terms) {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw std::domain_error("quantile: q must be in [0, 1]");
  }
  double log_z = checked_log_z(f, rel_tol, max_terms);
  double log_term = -log_z;
  double cum = std::exp(log_term);
  int y = 0;
  while (true) {
    if (cum >= q) return {y, false};
    if (cum >= 1.0 - kTailMass) return {y, true};
    ++y;
    if (y >= max_terms) {
      throw SeriesNotConvergedError(
          "quantile walk did not finish within the term cap");
    }
    log_term += f.log_lambda - f.nu * std::log(static_cast<double>(y));
    cum += std::exp(log_term);
  }
}

std::vector<int> sample_ln(const LnForm& f, int n, SplitMix64& rng,
                           double rel_tol, int max_terms) {
  if (n < 0) throw std::domain_error("sample: n must be nonnegative");
  PmfTable table = pmf_table_ln(f, rel_tol, max_terms);
  std::vector<int> draws(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double u = rng.next_double();
    auto it = std::lower_bound(table.cdf.begin(), table.cdf.end(), u);
    if (it == table.cdf.end()) --it;  // beyond the retained mass
    draws[static_cast<std::size_t>(i)] =
        static_cast<int>(it - table.cdf.begin());
  }
  return draws;
}

DispersionIndexes indexes_ln(const LnForm& f, const std::vector<int>& ht_ys,
                             double rel_tol, int max_terms) {
  Moments m = exact_moments_ln(f, rel_tol, max_terms);
  double log_z = checked_log_z(f, rel_tol, max_terms);
  DispersionIndexes idx;
  idx.di = m.variance / m.mean;
  idx.zi = 1.0 + log_pmf_ln(f, 0, log_z) / m.mean;
  idx.ht.reserve(ht_ys.size());
  for (int y : ht_ys) {
    check_y(y);
    double ratio =
        std::exp(log_pmf_ln(f, y + 1, log_z) - log_pmf_ln(f, y, log_z));
    idx.ht.emplace_back(y, ratio);
  }
  return idx;
}

}  // namespace

double log_pmf(const OriginalParams& p, int y, double rel_tol,
               int max_terms) {
  check_y(y);
  LnForm f = ln_form(p);
  return log_pmf_ln(f, y, checked_log_z(f, rel_tol, max_terms));
}

double log_pmf(const MeanParams& p, int y, double rel_tol, int max_terms) {
  check_y(y);
  LnForm f = ln_form(p);
  return log_pmf_ln(f, y, checked_log_z(f, rel_tol, max_terms));
}

Moments exact_moments(const OriginalParams& p, double rel_tol,
                      int max_terms) {
  return exact_moments_ln(ln_form(p), rel_tol, max_terms);
}

Moments exact_moments(const MeanParams& p, double rel_tol, int max_terms) {
  return exact_moments_ln(ln_form(p), rel_tol, max_terms);
}

Moments approx_moments(const OriginalParams& p) {
  return {approx_mean(p), approx_variance(p), MomentMethod::approximation};
}

Moments approx_moments(const MeanParams& p) {
  // Exact inverse of the parameter map: the approximate mean of the implied
  // classic pair is mu itself, the variance base^(1) / nu.
  return {p.mu(), p.base() / p.nu(), MomentMethod::approximation};
}

double cdf(const MeanParams& p, int y, double rel_tol, int max_terms) {
  return cdf_ln(ln_form(p), y, rel_tol, max_terms);
}

double cdf(const OriginalParams& p, int y, double rel_tol, int max_terms) {
  return cdf_ln(ln_form(p), y, rel_tol, max_terms);
}

QuantileResult quantile(const MeanParams& p, double q, double rel_tol,
                        int max_terms) {
  return quantile_ln(ln_form(p), q, rel_tol, max_terms);
}

QuantileResult quantile(const OriginalParams& p, double q, double rel_tol,
                        int max_terms) {
  return quantile_ln(ln_form(p), q, rel_tol, max_terms);
}

std::vector<int> sample(const MeanParams& p, int n, SplitMix64& rng,
                        double rel_tol, int max_terms) {
  return sample_ln(ln_form(p), n, rng, rel_tol, max_terms);
}

std::vector<int> sample(const OriginalParams& p, int n, SplitMix64& rng,
                        double rel_tol, int max_terms) {
  return sample_ln(ln_form(p), n, rng, rel_tol, max_terms);
}

DispersionIndexes indexes(const MeanParams& p, const std::vector<int>& ht_ys,
                          double rel_tol, int max_terms) {
  return indexes_ln(ln_form(p), ht_ys, rel_tol, max_terms);
}

DispersionIndexes indexes(const OriginalParams& p,
                          const std::vector<int>& ht_ys, double rel_tol,
                          int max_terms) {
  return indexes_ln(ln_form(p), ht_ys, rel_tol, max_terms);
}

PmfTable pmf_table(const MeanParams& p, double rel_tol, int max_terms) {
  return pmf_table_ln(ln_form(p), rel_tol, max_terms);
}

PmfTable pmf_table(const OriginalParams& p, double rel_tol, int max_terms) {
  return pmf_table_ln(ln_form(p), rel_tol, max_terms);
}

}  // namespace cmpreg
