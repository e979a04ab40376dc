#include "cmpreg/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include <json.hpp>

namespace cmpreg {

namespace {

using json = nlohmann::ordered_json;

json opt_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> opt_double(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

json coef_json(const CoefEntry& c) {
  json j;
  j["name"] = c.name;
  j["estimate"] = c.estimate;
  j["se"] = opt_json(c.se);
  j["est_se_ratio"] = opt_json(c.est_se_ratio);
  return j;
}

CoefEntry coef_from_json(const json& j) {
  CoefEntry c;
  c.name = j.at("name").get<std::string>();
  c.estimate = j.at("estimate").get<double>();
  c.se = opt_double(j, "se");
  c.est_se_ratio = opt_double(j, "est_se_ratio");
  return c;
}

json model_json(const ModelReport& m) {
  json j;
  j["family"] = m.family;
  j["converged"] = m.converged;
  json coef = json::array();
  for (const auto& c : m.coef) coef.push_back(coef_json(c));
  j["coef"] = std::move(coef);
  j["dispersion"] = m.dispersion ? coef_json(*m.dispersion) : json(nullptr);
  j["loglik"] = opt_json(m.loglik);
  j["aic"] = opt_json(m.aic);
  j["bic"] = opt_json(m.bic);
  j["deviance"] = opt_json(m.deviance);
  j["sigma_hat"] = opt_json(m.sigma_hat);
  j["n_evals"] = m.n_evals ? json(*m.n_evals) : json(nullptr);
  return j;
}

ModelReport model_from_json(const json& j) {
  ModelReport m;
  m.family = j.at("family").get<std::string>();
  m.converged = j.at("converged").get<bool>();
  for (const auto& c : j.at("coef")) m.coef.push_back(coef_from_json(c));
  if (!j.at("dispersion").is_null()) {
    m.dispersion = coef_from_json(j.at("dispersion"));
  }
  m.loglik = opt_double(j, "loglik");
  m.aic = opt_double(j, "aic");
  m.bic = opt_double(j, "bic");
  m.deviance = opt_double(j, "deviance");
  m.sigma_hat = opt_double(j, "sigma_hat");
  if (!j.at("n_evals").is_null()) m.n_evals = j.at("n_evals").get<long>();
  return m;
}

std::vector<CoefEntry> coef_entries(const Eigen::VectorXd& est,
                                    const Eigen::MatrixXd& vcov,
                                    bool have_vcov,
                                    const std::vector<std::string>& names) {
  std::vector<CoefEntry> out;
  out.reserve(names.size());
  for (Eigen::Index j = 0; j < est.size(); ++j) {
    CoefEntry c;
    c.name = names[static_cast<std::size_t>(j)];
    c.estimate = est[j];
    if (have_vcov) {
      double se = std::sqrt(vcov(j, j));
      c.se = se;
      if (se > 0.0) c.est_se_ratio = est[j] / se;
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string rpad(const std::string& s, std::size_t w) {
  std::string r = s;
  while (r.size() < w) r += ' ';
  return r;
}

std::string lpad(const std::string& s, std::size_t w) {
  std::string r = s;
  while (r.size() < w) r.insert(r.begin(), ' ');
  return r;
}

}  // namespace

ModelReport model_report_poisson(const GlmFit& fit,
                                 const std::vector<std::string>& names,
                                 int n) {
  ModelReport m;
  m.family = "poisson";
  m.coef = coef_entries(fit.beta, fit.vcov, true, names);
  m.loglik = fit.loglik;
  auto [aic, bic] = aic_bic(*fit.loglik, fit.p, n);
  m.aic = aic;
  m.bic = bic;
  m.deviance = fit.deviance;
  m.converged = fit.converged;
  return m;
}

ModelReport model_report_quasi(const GlmFit& fit,
                               const std::vector<std::string>& names) {
  ModelReport m;
  m.family = "quasipoisson";
  m.coef = coef_entries(fit.beta, fit.vcov, true, names);
  CoefEntry disp;
  disp.name = "sigma";
  disp.estimate = fit.sigma_hat;
  m.dispersion = disp;
  m.sigma_hat = fit.sigma_hat;
  m.deviance = fit.deviance;
  m.converged = fit.converged;
  return m;
}

ModelReport model_report_cmp(const FitResult& fit,
                             const std::vector<std::string>& names, int n) {
  ModelReport m;
  m.family = fit.parametrization == Parametrization::mean ? "cmp-mu" : "cmp";
  const Eigen::Index p = fit.beta.size();
  m.coef = coef_entries(fit.beta, fit.vcov.topLeftCorner(p, p),
                        fit.vcov_available, names);
  CoefEntry disp;
  disp.name = "phi";
  disp.estimate = fit.phi;
  if (fit.vcov_available) {
    double se = std::sqrt(fit.vcov(p, p));
    disp.se = se;
    if (se > 0.0) disp.est_se_ratio = fit.phi / se;
  }
  m.dispersion = disp;
  m.loglik = fit.loglik;
  auto [aic, bic] = aic_bic(fit.loglik, static_cast<int>(p) + 1, n);
  m.aic = aic;
  m.bic = bic;
  m.n_evals = fit.n_evals;
  m.converged = fit.converged;
  return m;
}

std::string to_json(const FitReport& report) {
  json j;
  j["schema"] = report.schema;
  j["kind"] = "fit";
  j["response"] = report.response;
  j["n"] = report.n;
  j["design"] = report.design_names;
  json models = json::array();
  for (const auto& m : report.models) models.push_back(model_json(m));
  j["models"] = std::move(models);
  j["meta"] = json{{"wall_ms", report.wall_ms}};
  return j.dump(2);
}

FitReport fit_report_from_json(const std::string& text) {
  json j = json::parse(text);
  FitReport r;
  r.schema = j.at("schema").get<int>();
  if (r.schema != 1) throw std::runtime_error("unsupported report schema");
  r.response = j.at("response").get<std::string>();
  r.n = j.at("n").get<int>();
  r.design_names = j.at("design").get<std::vector<std::string>>();
  for (const auto& m : j.at("models")) r.models.push_back(model_from_json(m));
  if (j.contains("meta") && j.at("meta").contains("wall_ms")) {
    r.wall_ms = j.at("meta").at("wall_ms").get<double>();
  }
  return r;
}

std::string to_json(const ComparisonReport& report) {
  json j;
  j["schema"] = report.schema;
  j["kind"] = "comparison";
  j["family"] = report.family;
  j["response"] = report.response;
  j["n"] = report.n;
  json rows = json::array();
  for (const auto& row : report.rows) {
    json r;
    r["model"] = row.model_label;
    r["np"] = row.np;
    r["fit_measure"] = row.fit_measure;
    r["aic"] = opt_json(row.aic);
    r["bic"] = opt_json(row.bic);
    r["stat"] = opt_json(row.stat);
    r["df"] = row.df ? json(*row.df) : json(nullptr);
    r["p_value"] = opt_json(row.p_value);
    rows.push_back(std::move(r));
  }
  j["rows"] = std::move(rows);
  j["meta"] = json{{"wall_ms", report.wall_ms}};
  return j.dump(2);
}

ComparisonReport comparison_report_from_json(const std::string& text) {
  json j = json::parse(text);
  ComparisonReport r;
  r.schema = j.at("schema").get<int>();
  if (r.schema != 1) throw std::runtime_error("unsupported report schema");
  r.family = j.at("family").get<std::string>();
  r.response = j.at("response").get<std::string>();
  r.n = j.at("n").get<int>();
  for (const auto& row_json : j.at("rows")) {
    ComparisonRow row;
    row.model_label = row_json.at("model").get<std::string>();
    row.np = row_json.at("np").get<int>();
    row.fit_measure = row_json.at("fit_measure").get<double>();
    row.aic = opt_double(row_json, "aic");
    row.bic = opt_double(row_json, "bic");
    row.stat = opt_double(row_json, "stat");
    if (!row_json.at("df").is_null()) row.df = row_json.at("df").get<int>();
    row.p_value = opt_double(row_json, "p_value");
    r.rows.push_back(std::move(row));
  }
  if (j.contains("meta") && j.at("meta").contains("wall_ms")) {
    r.wall_ms = j.at("meta").at("wall_ms").get<double>();
  }
  return r;
}

std::string to_text(const FitReport& report) {
  std::ostringstream out;
  out << "response: " << report.response << "    n: " << report.n << "\n\n";

  std::size_t name_w = 12;
  for (const auto& name : report.design_names) {
    name_w = std::max(name_w, name.size());
  }
  name_w = std::max(name_w, std::string("dispersion").size()) + 2;
  const std::size_t col_w = 12;

  out << rpad("", name_w);
  for (const auto& m : report.models) {
    out << lpad(m.family, col_w) << lpad("", col_w);
  }
  out << '\n';
  out << rpad("term", name_w);
  for (std::size_t k = 0; k < report.models.size(); ++k) {
    out << lpad("est", col_w) << lpad("est/se", col_w);
  }
  out << '\n';

  auto coef_cell = [&](const std::optional<CoefEntry>& c) {
    if (!c) {
      out << lpad("-", col_w) << lpad("-", col_w);
      return;
    }
    out << lpad(num(c->estimate), col_w)
        << lpad(c->est_se_ratio ? num(*c->est_se_ratio) : "-", col_w);
  };

  for (std::size_t j = 0; j < report.design_names.size(); ++j) {
    out << rpad(report.design_names[j], name_w);
    for (const auto& m : report.models) {
      coef_cell(j < m.coef.size() ? std::optional<CoefEntry>(m.coef[j])
                                  : std::nullopt);
    }
    out << '\n';
  }
  bool any_disp = false;
  for (const auto& m : report.models) any_disp = any_disp || m.dispersion;
  if (any_disp) {
    out << rpad("dispersion", name_w);
    for (const auto& m : report.models) coef_cell(m.dispersion);
    out << '\n';
  }

  auto footer = [&](const std::string& label, auto getter, int digits) {
    out << rpad(label, name_w);
    for (const auto& m : report.models) {
      auto v = getter(m);
      out << lpad(v ? num(*v, digits) : "-", col_w) << lpad("", col_w);
    }
    out << '\n';
  };
  footer("loglik", [](const ModelReport& m) { return m.loglik; }, 3);
  footer("aic", [](const ModelReport& m) { return m.aic; }, 3);
  footer("bic", [](const ModelReport& m) { return m.bic; }, 3);
  out << rpad("n_evals", name_w);
  for (const auto& m : report.models) {
    out << lpad(m.n_evals ? std::to_string(*m.n_evals) : "-", col_w)
        << lpad("", col_w);
  }
  out << '\n';
  out << rpad("converged", name_w);
  for (const auto& m : report.models) {
    out << lpad(m.converged ? "yes" : "NO", col_w) << lpad("", col_w);
  }
  out << '\n';
  return out.str();
}

std::string to_text(const ComparisonReport& report) {
  std::ostringstream out;
  out << "family: " << report.family << "    response: " << report.response
      << "    n: " << report.n << "\n\n";
  std::size_t label_w = std::string("model").size();
  for (const auto& row : report.rows) {
    label_w = std::max(label_w, row.model_label.size());
  }
  label_w += 2;
  const bool quasi = report.family == "quasipoisson";
  const std::size_t w = 12;
  out << rpad("model", label_w) << lpad("np", 4)
      << lpad(quasi ? "qdev" : "loglik", w) << lpad("aic", w) << lpad("bic", w)
      << lpad(quasi ? "F" : "lr_stat", w) << lpad("df", 4)
      << lpad("p", w) << '\n';
  for (const auto& row : report.rows) {
    out << rpad(row.model_label, label_w)
        << lpad(std::to_string(row.np), 4) << lpad(num(row.fit_measure, 3), w)
        << lpad(row.aic ? num(*row.aic, 3) : "-", w)
        << lpad(row.bic ? num(*row.bic, 3) : "-", w)
        << lpad(row.stat ? num(*row.stat, 3) : "-", w)
        << lpad(row.df ? std::to_string(*row.df) : "-", 4)
        << lpad(row.p_value ? sci(*row.p_value) : "-", w) << '\n';
  }
  return out.str();
}

}  // namespace cmpreg
