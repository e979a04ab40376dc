#pragma once

#include "cmpreg/params.hpp"

namespace cmpreg {

inline constexpr double kSeriesRelTol = 1e-12;
inline constexpr int kSeriesMaxTerms = 10000;

// log Z(lambda, nu) = log sum_{j>=0} exp(j log lambda - nu log j!), streamed
// in log space with a running max so no intermediate over/underflows.
// Stops once the terms decay geometrically and the geometric tail bound
// drops below rel_tol of the accumulated sum.  Throws DivergentSeriesError
// when nu == 0 and log_lambda >= 0; nu == 0 with lambda < 1 is a legitimate
// geometric series.
LogZ log_z_ln(double log_lambda, double nu, double rel_tol = kSeriesRelTol,
              int max_terms = kSeriesMaxTerms);

LogZ log_z_original(const OriginalParams& p, double rel_tol = kSeriesRelTol,
                    int max_terms = kSeriesMaxTerms);

LogZ log_z_mean(const MeanParams& p, double rel_tol = kSeriesRelTol,
                int max_terms = kSeriesMaxTerms);

// Direct double-precision accumulation of Z, the arithmetic a naive
// implementation performs.  Kept as a comparison mode: where the growing
// terms cross DBL_MAX the sum overflows to +inf instead of finishing.
// Mathematical divergence (nu == 0, lambda >= 1) still throws.
struct DirectZ {
  double value = 0.0;
  int terms_used = 0;
  bool overflowed = false;
};

DirectZ z_direct_compat(const OriginalParams& p, int max_terms = 1000);

}  // namespace cmpreg
