#include "cmpreg/optim.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cmpreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Snap h so that x + h and x - h are exactly representable offsets.
double representable_step(double x, double h) {
  volatile double t = x + h;
  return t - x;
}

// Central differences at the given spacing scale.  Rounding noise in the
// objective enters the estimate as ~eps * |f| / (2h), so the sqrt(eps)
// spacing favours truncation accuracy while cbrt(eps) favours noise
// rejection.
Eigen::VectorXd central_gradient(const Objective& f, const Eigen::VectorXd& x,
                                 double scale) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double h = representable_step(x[i], scale * std::max(1.0, std::fabs(x[i])));
    probe[i] = x[i] + h;
    double fp = f(probe);
    probe[i] = x[i] - h;
    double fm = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw std::runtime_error(
          "numeric_gradient: objective not finite when probing coordinate " +
          std::to_string(i));
    }
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace

Eigen::VectorXd numeric_gradient(const Objective& f,
                                 const Eigen::VectorXd& x) {
  return central_gradient(f, x,
                          std::sqrt(std::numeric_limits<double>::epsilon()));
}

Eigen::MatrixXd numeric_hessian(const Objective& f, const Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  const double scale = std::cbrt(std::numeric_limits<double>::epsilon());
  Eigen::VectorXd h(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    h[i] = representable_step(x[i], scale * std::max(1.0, std::fabs(x[i])));
  }
  double f0 = f(x);
  if (!std::isfinite(f0)) {
    throw std::runtime_error(
        "numeric_hessian: objective not finite at the expansion point");
  }
  Eigen::MatrixXd hess(n, n);
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    probe[i] = x[i] + h[i];
    double fp = f(probe);
    probe[i] = x[i] - h[i];
    double fm = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw std::runtime_error(
          "numeric_hessian: objective not finite when probing coordinate " +
          std::to_string(i));
    }
    hess(i, i) = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      probe[i] = x[i] + h[i];
      probe[j] = x[j] + h[j];
      double fpp = f(probe);
      probe[j] = x[j] - h[j];
      double fpm = f(probe);
      probe[i] = x[i] - h[i];
      double fmm = f(probe);
      probe[j] = x[j] + h[j];
      double fmp = f(probe);
      probe[i] = x[i];
      probe[j] = x[j];
      if (!std::isfinite(fpp) || !std::isfinite(fpm) || !std::isfinite(fmp) ||
          !std::isfinite(fmm)) {
        throw std::runtime_error(
            "numeric_hessian: objective not finite when probing coordinates " +
            std::to_string(i) + ", " + std::to_string(j));
      }
      hess(i, j) = hess(j, i) = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
    }
  }
  return hess;
}

OptimResult maximize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                          const BfgsOptions& opts) {
  const Eigen::Index n = x0.size();
  if (n == 0) throw std::invalid_argument("maximize_bfgs: empty start point");

  long n_evals = 0;
  Objective counted = [&](const Eigen::VectorXd& v) {
    ++n_evals;
    return f(v);
  };

  OptimResult res;
  Eigen::VectorXd x = x0;
  double fx = counted(x);
  if (!std::isfinite(fx)) {
    throw std::invalid_argument(
        "maximize_bfgs: objective must be finite at the start point");
  }

  auto eval_grad = [&](const Eigen::VectorXd& v) {
    return opts.gradient ? opts.gradient(v) : numeric_gradient(counted, v);
  };
  auto grad_small = [&](const Eigen::VectorXd& g, double fv) {
    return g.lpNorm<Eigen::Infinity>() <=
           opts.gtol * std::max(1.0, std::fabs(fv));
  };

  if (opts.record_history) res.history.push_back(fx);

  Eigen::VectorXd g;
  bool grad_ok = true;
  try {
    g = eval_grad(x);
  } catch (const std::runtime_error&) {
    grad_ok = false;  // boundary of the valid region; report best-so-far
  }

  Eigen::MatrixXd inv_h = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(n, n);
  const double coarse = std::cbrt(std::numeric_limits<double>::epsilon());
  bool converged = false;
  int iter = 0;

  // A finite-difference search can stall with the fine-step gradient read
  // pinned above gtol by rounding noise in the objective.  On a stall,
  // re-measure at coarse spacing, whose noise floor sits well under the
  // threshold: accept the stop if the trusted read meets the tolerance,
  // otherwise restart once per accepted position along it.  Steepest ascent
  // on a ridge gains ~|g|^2 / curvature per step -- under the noise floor
  // right where it matters -- so the restart is preconditioned with the
  // observed Hessian whenever that is negative definite.  Returns true when
  // the stop is final.
  bool rescued_here = false;
  auto stall = [&]() {
    if (opts.gradient || rescued_here) return true;
    Eigen::VectorXd gc;
    try {
      gc = central_gradient(counted, x, coarse);
    } catch (const std::runtime_error&) {
      return true;  // probe left the valid region; strict verdict stands
    }
    if (grad_small(gc, fx)) {
      converged = true;
      return true;
    }
    g = gc;
    inv_h = identity;
    try {
      Eigen::LDLT<Eigen::MatrixXd> ldlt(-numeric_hessian(counted, x));
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
        Eigen::MatrixXd hinv = ldlt.solve(identity);
        if (hinv.allFinite()) inv_h = hinv;
      }
    } catch (const std::runtime_error&) {
      // Hessian probes failed; the identity seed stands.
    }
    rescued_here = true;
    return false;
  };

  while (grad_ok && iter < opts.max_iter) {
    if (grad_small(g, fx)) {
      converged = true;
      break;
    }
    ++iter;

    Eigen::VectorXd dir = inv_h * g;
    double slope = g.dot(dir);
    if (!(slope > 0.0) || !dir.allFinite()) {
      // Curvature estimate went bad; restart from steepest ascent.
      inv_h = identity;
      dir = g;
      slope = g.squaredNorm();
    }

    double alpha = 1.0;
    double fn = -kInf;
    Eigen::VectorXd xn;
    bool accepted = false;
    while (alpha >= 1e-16) {
      xn = x + alpha * dir;
      fn = counted(xn);
      if (std::isfinite(fn) && fn >= fx + opts.armijo_c * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= opts.backtrack;
    }
    if (!accepted) {
      if (stall()) break;  // keep best iterate
      continue;
    }

    Eigen::VectorXd gn;
    try {
      gn = eval_grad(xn);
    } catch (const std::runtime_error&) {
      x = xn;
      fx = fn;
      if (opts.record_history) res.history.push_back(fx);
      grad_ok = false;
      break;
    }

    Eigen::VectorXd s = xn - x;
    Eigen::VectorXd yv = g - gn;  // gradient change of the negated objective
    double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      double rho = 1.0 / sy;
      inv_h = (identity - rho * s * yv.transpose()) * inv_h *
                  (identity - rho * yv * s.transpose()) +
              rho * s * s.transpose();
    }

    double rel_step =
        s.lpNorm<Eigen::Infinity>() / std::max(1.0, x.lpNorm<Eigen::Infinity>());
    x = xn;
    fx = fn;
    g = gn;
    if (rel_step > 0.0) rescued_here = false;
    if (opts.record_history) res.history.push_back(fx);
    if (rel_step <= opts.step_tol) {
      converged = grad_small(g, fx);
      if (converged || stall()) break;
    }
  }
  if (!converged && grad_ok && g.size() == n) {
    converged = grad_small(g, fx);
    if (!converged && !opts.gradient) {
      // Covers the max_iter exit, where no stall check has run at the final
      // iterate: verify against the coarse-spacing read before failing.
      try {
        converged = grad_small(central_gradient(counted, x, coarse), fx);
      } catch (const std::runtime_error&) {
        // Probe left the valid region; the strict verdict stands.
      }
    }
  }

  res.argmax = x;
  res.max_value = fx;
  res.converged = converged;
  res.iterations = iter;
  res.n_evals = n_evals;
  return res;
}

OptimResult maximize_bfgs(const Objective& f, const Eigen::VectorXd& x0,
                          double gtol, int max_iter) {
  BfgsOptions opts;
  opts.gtol = gtol;
  opts.max_iter = max_iter;
  return maximize_bfgs(f, x0, opts);
}

}  // namespace cmpreg
