#include "cmpreg/params.hpp"

#include <cmath>

namespace cmpreg {

OriginalParams::OriginalParams(double lambda, double nu) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::domain_error("OriginalParams: lambda must be positive and finite");
  }
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw std::domain_error("OriginalParams: nu must be nonnegative and finite");
  }
  lambda_ = lambda;
  nu_ = nu;
  log_lambda_ = std::log(lambda);
}

OriginalParams OriginalParams::from_log_lambda(double log_lambda, double nu) {
  if (!std::isfinite(log_lambda)) {
    throw std::domain_error("OriginalParams: log lambda must be finite");
  }
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw std::domain_error("OriginalParams: nu must be nonnegative and finite");
  }
  OriginalParams p;
  p.log_lambda_ = log_lambda;
  p.lambda_ = std::exp(log_lambda);  // may round to inf; log form stays exact
  p.nu_ = nu;
  return p;
}

MeanParams::MeanParams(double mu, double phi) : mu_(mu), phi_(phi) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw std::domain_error("MeanParams: mu must be positive and finite");
  }
  if (!std::isfinite(phi)) {
    throw std::domain_error("MeanParams: phi must be finite");
  }
  nu_ = std::exp(phi);
  base_ = mu + (nu_ - 1.0) / (2.0 * nu_);
  if (!(base_ > 0.0)) {
    throw std::domain_error(
        "MeanParams: mu + (nu - 1)/(2 nu) must be positive");
  }
}

OriginalParams to_original(const MeanParams& p) {
  return OriginalParams::from_log_lambda(p.nu() * std::log(p.base()), p.nu());
}

double approx_mean(const OriginalParams& p) {
  if (!(p.nu() > 0.0)) throw std::domain_error("approx_mean: nu > 0 required");
  return std::exp(p.log_lambda() / p.nu()) - (p.nu() - 1.0) / (2.0 * p.nu());
}

double approx_variance(const OriginalParams& p) {
  if (!(p.nu() > 0.0)) {
    throw std::domain_error("approx_variance: nu > 0 required");
  }
  return std::exp(p.log_lambda() / p.nu()) / p.nu();
}

}  // namespace cmpreg
