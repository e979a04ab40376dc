#pragma once

// Tail probabilities and quantiles needed by the inference layer.  Kept
// self-contained: series/continued-fraction incomplete gamma and beta, plus
// a rational approximation for the normal quantile.

namespace cmpreg {

// Regularized upper incomplete gamma Q(a, x), a > 0, x >= 0.
double gamma_q(double a, double x);

// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
double inc_beta(double a, double b, double x);

// Upper tail of the chi-square distribution with df degrees of freedom.
double chi_sq_upper_tail(double stat, int df);

// Upper tail of the F distribution with (df1, df2) degrees of freedom.
double f_upper_tail(double f, int df1, int df2);

// Inverse standard normal CDF, accurate to close to machine precision.
double normal_quantile(double p);

// Standard normal CDF.
double normal_cdf(double z);

}  // namespace cmpreg
