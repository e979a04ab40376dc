#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cmpreg/glm.hpp"
#include "cmpreg/inference.hpp"
#include "cmpreg/regression.hpp"

namespace cmpreg {

struct CoefEntry {
  std::string name;
  double estimate = 0.0;
  std::optional<double> se;             // absent when vcov is unavailable
  std::optional<double> est_se_ratio;
};

struct ModelReport {
  std::string family;  // poisson | quasipoisson | cmp | cmp-mu
  std::vector<CoefEntry> coef;
  std::optional<CoefEntry> dispersion;  // phi, or sigma for quasipoisson
  std::optional<double> loglik;
  std::optional<double> aic;
  std::optional<double> bic;
  std::optional<double> deviance;
  std::optional<double> sigma_hat;
  std::optional<long> n_evals;
  bool converged = false;
};

struct FitReport {
  int schema = 1;
  std::string response;
  int n = 0;
  std::vector<std::string> design_names;
  std::vector<ModelReport> models;
  // Serialized under "meta"; everything outside meta is a pure function of
  // the input, so repeated runs differ only there.
  double wall_ms = 0.0;
};

struct ComparisonReport {
  int schema = 1;
  std::string family;
  std::string response;
  int n = 0;
  std::vector<ComparisonRow> rows;
  double wall_ms = 0.0;
};

ModelReport model_report_poisson(const GlmFit& fit,
                                 const std::vector<std::string>& names,
                                 int n);
ModelReport model_report_quasi(const GlmFit& fit,
                               const std::vector<std::string>& names);
ModelReport model_report_cmp(const FitResult& fit,
                             const std::vector<std::string>& names, int n);

std::string to_json(const FitReport& report);
std::string to_json(const ComparisonReport& report);
FitReport fit_report_from_json(const std::string& text);
ComparisonReport comparison_report_from_json(const std::string& text);

std::string to_text(const FitReport& report);
std::string to_text(const ComparisonReport& report);

}  // namespace cmpreg
