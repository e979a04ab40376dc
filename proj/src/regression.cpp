#include "cmpreg/regression.hpp"

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <limits>
#include <thread>
#include <unordered_map>
#include <vector>

#include "cmpreg/glm.hpp"
#include "cmpreg/optim.hpp"

namespace cmpreg {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Observations are reduced in fixed chunks so the summation order (and
// therefore the value, bit for bit) is independent of the thread count.
constexpr Eigen::Index kChunk = 64;

struct ChunkSums {
  double num = 0.0;    // sum of y_i * log(base_i) resp. y_i * eta_i
  double log_z = 0.0;
  bool invalid = false;
};

ChunkSums eval_chunk(const Eigen::VectorXd& eta, const Eigen::VectorXd& y,
                     Eigen::Index begin, Eigen::Index end, double nu,
                     double offset, bool mean_scale, double rel_tol,
                     int max_terms) {
  ChunkSums sums;
  // Memo on the linear predictor bits: repeated rows share one series
  // evaluation.  Scoped to the chunk so results cannot depend on threading.
  std::unordered_map<std::uint64_t, double> memo;
  for (Eigen::Index i = begin; i < end; ++i) {
    double e = eta[i];
    if (!std::isfinite(e)) {
      sums.invalid = true;
      return sums;
    }
    double log_lambda;
    if (mean_scale) {
      double mu = std::exp(e);
      double base = mu + offset;
      if (!(base > 0.0) || !std::isfinite(base)) {
        sums.invalid = true;
        return sums;
      }
      double log_base = std::log(base);
      log_lambda = nu * log_base;
      sums.num += y[i] * log_base;
    } else {
      log_lambda = e;
      sums.num += y[i] * e;
    }
    auto key = std::bit_cast<std::uint64_t>(e);
    auto it = memo.find(key);
    if (it == memo.end()) {
      LogZ z = log_z_ln(log_lambda, nu, rel_tol, max_terms);
      if (!z.converged) {
        sums.invalid = true;
        return sums;
      }
      it = memo.emplace(key, z.log_value).first;
    }
    sums.log_z += it->second;
  }
  return sums;
}

double loglik_impl(const Eigen::VectorXd& beta, double phi,
                   const RegressionSpec& spec, bool mean_scale,
                   long* invalid_count) {
  auto reject = [&]() {
    if (invalid_count) ++*invalid_count;
    return kNegInf;
  };
  if (!std::isfinite(phi) || std::fabs(phi) > spec.phi_clamp) return reject();
  if (!beta.allFinite()) return reject();

  const double nu = std::exp(phi);
  const double offset = (nu - 1.0) / (2.0 * nu);
  const Eigen::VectorXd eta = spec.X * beta;
  const Eigen::Index n = eta.size();
  const Eigen::Index n_chunks = (n + kChunk - 1) / kChunk;

  std::vector<ChunkSums> parts(static_cast<std::size_t>(n_chunks));
  auto run_chunk = [&](Eigen::Index c) {
    Eigen::Index begin = c * kChunk;
    Eigen::Index end = std::min(n, begin + kChunk);
    parts[static_cast<std::size_t>(c)] =
        eval_chunk(eta, spec.y, begin, end, nu, offset, mean_scale,
                   spec.series_rel_tol, spec.series_max_terms);
  };

  if (spec.n_threads > 1 && n_chunks > 1) {
    const Eigen::Index n_workers =
        std::min<Eigen::Index>(spec.n_threads, n_chunks);
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(n_workers));
    for (Eigen::Index t = 0; t < n_workers; ++t) {
      workers.emplace_back([&, t]() {
        for (Eigen::Index c = t; c < n_chunks; c += n_workers) run_chunk(c);
      });
    }
    for (auto& w : workers) w.join();
  } else {
    for (Eigen::Index c = 0; c < n_chunks; ++c) run_chunk(c);
  }

  double num = 0.0;
  double log_z = 0.0;
  for (const ChunkSums& part : parts) {
    if (part.invalid) return reject();
    num += part.num;
    log_z += part.log_z;
  }

  double sum_lgamma = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sum_lgamma += std::lgamma(spec.y[i] + 1.0);
  }

  return mean_scale ? nu * (num - sum_lgamma) - log_z
                    : num - nu * sum_lgamma - log_z;
}

void check_shapes(const Eigen::VectorXd& beta, const RegressionSpec& spec) {
  if (spec.X.rows() != spec.y.size()) {
    throw std::invalid_argument("regression: X rows must match y");
  }
  if (beta.size() != spec.X.cols()) {
    throw std::invalid_argument("regression: beta length must match X cols");
  }
}

}  // namespace

double loglik_cmp_mu(const Eigen::VectorXd& beta, double phi,
                     const RegressionSpec& spec, long* invalid_count) {
  check_shapes(beta, spec);
  return loglik_impl(beta, phi, spec, true, invalid_count);
}

double loglik_cmp_original(const Eigen::VectorXd& beta, double phi,
                           const RegressionSpec& spec, long* invalid_count) {
  check_shapes(beta, spec);
  return loglik_impl(beta, phi, spec, false, invalid_count);
}

FitResult fit_cmp(const RegressionSpec& spec) {
  const Eigen::Index n = spec.y.size();
  const Eigen::Index p = spec.X.cols();
  if (spec.X.rows() != n) {
    throw std::invalid_argument("fit_cmp: X rows must match y");
  }
  if (n <= p + 1) {
    throw std::invalid_argument(
        "fit_cmp: need more observations than parameters");
  }

  GlmFit warm = fit_poisson_irls(spec.y, spec.X);

  Eigen::VectorXd theta0(p + 1);
  theta0.head(p) = warm.beta;
  theta0[p] = 0.0;

  const bool mean_scale = spec.parametrization == Parametrization::mean;
  long invalid = 0;
  Objective obj = [&](const Eigen::VectorXd& theta) {
    Eigen::VectorXd b = theta.head(p);
    return loglik_impl(b, theta[p], spec, mean_scale, &invalid);
  };

  OptimResult opt = maximize_bfgs(obj, theta0, BfgsOptions{});

  FitResult fit;
  fit.beta = opt.argmax.head(p);
  fit.phi = opt.argmax[p];
  fit.loglik = opt.max_value;
  fit.n_evals = opt.n_evals;
  fit.invalid_evals = invalid;
  fit.iterations = opt.iterations;
  fit.converged = opt.converged;
  fit.parametrization = spec.parametrization;

  // Observed information in a separate pass at the maximum; the BFGS
  // internal matrix is only a search device and never reported.
  try {
    Eigen::MatrixXd info = -numeric_hessian(obj, opt.argmax);
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd v =
          llt.solve(Eigen::MatrixXd::Identity(p + 1, p + 1));
      if (v.allFinite()) {
        fit.vcov = v;
        fit.vcov_available = true;
        fit.se = v.diagonal().cwiseSqrt();
        fit.est_se_ratio = opt.argmax.cwiseQuotient(fit.se);
      }
    }
  } catch (const std::runtime_error&) {
    // Hessian probe left the valid region; estimates stand, vcov does not.
  }
  return fit;
}

Eigen::VectorXd estimator_correlation(const FitResult& fit) {
  if (!fit.vcov_available) {
    throw std::runtime_error(
        "estimator_correlation: covariance unavailable for this fit");
  }
  const Eigen::Index p = fit.beta.size();
  Eigen::VectorXd corr(p);
  const double v_phi = fit.vcov(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    corr[j] = fit.vcov(j, p) / std::sqrt(fit.vcov(j, j) * v_phi);
  }
  return corr;
}

}  // namespace cmpreg
