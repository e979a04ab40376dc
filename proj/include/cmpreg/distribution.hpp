#pragma once

#include <utility>
#include <vector>

#include "cmpreg/params.hpp"
#include "cmpreg/rng.hpp"
#include "cmpreg/series.hpp"

namespace cmpreg {

enum class MomentMethod { exact_series, approximation };

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
  MomentMethod method = MomentMethod::exact_series;
};

struct DispersionIndexes {
  double di = 0.0;  // variance / mean
  double zi = 0.0;  // 1 + log Pr(0) / mean
  // (y, Pr(Y = y + 1) / Pr(Y = y)) for the requested y values.
  std::vector<std::pair<int, double>> ht;
};

double log_pmf(const OriginalParams& p, int y, double rel_tol = kSeriesRelTol,
               int max_terms = kSeriesMaxTerms);
double log_pmf(const MeanParams& p, int y, double rel_tol = kSeriesRelTol,
               int max_terms = kSeriesMaxTerms);

// Mean and variance by summing the normalized pmf until the y^2-weighted
// geometric tail bound is below rel_tol of the running second moment.
Moments exact_moments(const OriginalParams& p, double rel_tol = kSeriesRelTol,
                      int max_terms = kSeriesMaxTerms);
Moments exact_moments(const MeanParams& p, double rel_tol = kSeriesRelTol,
                      int max_terms = kSeriesMaxTerms);

Moments approx_moments(const OriginalParams& p);
Moments approx_moments(const MeanParams& p);

// Pr(Y <= y).
double cdf(const MeanParams& p, int y, double rel_tol = kSeriesRelTol,
           int max_terms = kSeriesMaxTerms);
double cdf(const OriginalParams& p, int y, double rel_tol = kSeriesRelTol,
           int max_terms = kSeriesMaxTerms);

// Smallest y with Pr(Y <= y) >= q.  The walk stops once cumulative mass
// reaches 1 - 1e-12; a q beyond that returns the stopping point with
// capped = true.
struct QuantileResult {
  int value = 0;
  bool capped = false;
};

QuantileResult quantile(const MeanParams& p, double q,
                        double rel_tol = kSeriesRelTol,
                        int max_terms = kSeriesMaxTerms);
QuantileResult quantile(const OriginalParams& p, double q,
                        double rel_tol = kSeriesRelTol,
                        int max_terms = kSeriesMaxTerms);

// n draws by CDF inversion against a shared cumulative table.
std::vector<int> sample(const MeanParams& p, int n, SplitMix64& rng,
                        double rel_tol = kSeriesRelTol,
                        int max_terms = kSeriesMaxTerms);
std::vector<int> sample(const OriginalParams& p, int n, SplitMix64& rng,
                        double rel_tol = kSeriesRelTol,
                        int max_terms = kSeriesMaxTerms);

// DI, ZI and the successive-probability ratios at the requested y values.
DispersionIndexes indexes(const MeanParams& p, const std::vector<int>& ht_ys,
                          double rel_tol = kSeriesRelTol,
                          int max_terms = kSeriesMaxTerms);
DispersionIndexes indexes(const OriginalParams& p,
                          const std::vector<int>& ht_ys,
                          double rel_tol = kSeriesRelTol,
                          int max_terms = kSeriesMaxTerms);

// pmf/cdf rows up to cumulative mass 1 - 1e-12 (complete == true) or the
// term cap, whichever comes first.
struct PmfTable {
  std::vector<double> pmf;
  std::vector<double> cdf;
  bool complete = false;
};

PmfTable pmf_table(const MeanParams& p, double rel_tol = kSeriesRelTol,
                   int max_terms = kSeriesMaxTerms);
PmfTable pmf_table(const OriginalParams& p, double rel_tol = kSeriesRelTol,
                   int max_terms = kSeriesMaxTerms);

}  // namespace cmpreg
