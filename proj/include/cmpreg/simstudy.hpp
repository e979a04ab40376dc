#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "cmpreg/regression.hpp"

namespace cmpreg {

// One simulation cell: data generated on the mean scale with
// mu_i = exp(x_i' beta_true) over the standard design from gen_design(n).
struct SimScenario {
  int n = 50;
  double phi_true = 0.0;
  Eigen::VectorXd beta_true;  // intercept, slope, two level contrasts
  int replicates = 1000;
  std::uint64_t seed = 1;
  double level = 0.95;
  Parametrization parametrization = Parametrization::mean;
  double series_rel_tol = kSeriesRelTol;
  int series_max_terms = kSeriesMaxTerms;
  int n_threads = 0;  // replicate-level parallelism; 0 = serial
};

struct ReplicateRecord {
  int replicate = 0;
  bool converged = false;
  Eigen::VectorXd estimate;   // beta then phi
  Eigen::VectorXd se;
  Eigen::VectorXd covered;    // 1 if the Wald interval caught the truth
  Eigen::VectorXd corr_phi;   // corr(beta_j, phi), per coefficient
};

struct SimSummary {
  SimScenario scenario;
  std::vector<std::string> parameter_names;
  Eigen::VectorXd truth;
  Eigen::VectorXd mean_bias;
  Eigen::VectorXd mean_se;
  // mean_bias / se_divisor; the divisor defaults to this scenario's mean_se
  // and is replaced by standardize_bias for cross-sample-size comparisons.
  Eigen::VectorXd se_divisor;
  Eigen::VectorXd standardized_bias;
  Eigen::VectorXd coverage;
  Eigen::VectorXd mean_corr_phi;      // signed, per coefficient
  Eigen::VectorXd mean_abs_corr_phi;  // per coefficient
  int n_converged = 0;
  int n_excluded = 0;
  bool excluded_flagged = false;  // more than 10% of replicates dropped
  std::vector<ReplicateRecord> records;
};

// Standard design, n >= 6: intercept; n equally spaced points on [0, 1];
// a three-level factor in consecutive blocks of ceil(n/3) rows (truncated),
// treatment-coded against the first level.
Eigen::MatrixXd gen_design(int n);

// Draw, fit and summarize.  Replicate k uses RNG stream (seed, k), so runs
// are reproducible and thread-count independent.  Non-converged replicates
// are excluded from the summaries but kept in records with their flag.
SimSummary run_scenario(const SimScenario& scenario);

// Recompute standardized_bias against an externally chosen SE divisor
// (e.g. the average SEs of a smaller-sample run of the same cell).
void standardize_bias(SimSummary& summary, const Eigen::VectorXd& divisor);

void write_replicates_csv(const SimSummary& summary, std::ostream& out);
std::string summary_to_json(const SimSummary& summary);

// Key-value scenario file: n, phi, beta (comma separated), replicates,
// seed; '#' starts a comment.
SimScenario read_scenario_file(const std::string& path);

// 2 (ll_max - ll) over a rectangular grid around the fitted maximum.  The
// location axis moves the intercept: at grid location L the intercept is
// log(L) and the remaining coefficients stay at their estimates, so for an
// intercept-only model L is exactly the fitted mean scale.  Points whose
// likelihood is invalid are NaN, not errors.
struct DevianceGrid {
  std::vector<double> location;
  std::vector<double> phi;
  Eigen::MatrixXd deviance;  // location x phi
};

DevianceGrid deviance_grid(const RegressionSpec& spec, const FitResult& fit,
                           double loc_lo, double loc_hi, double phi_lo,
                           double phi_hi, int loc_points, int phi_points);

void write_deviance_csv(const DevianceGrid& grid, std::ostream& out);

}  // namespace cmpreg
