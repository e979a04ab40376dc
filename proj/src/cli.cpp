#include "cmpreg/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cmpreg/data.hpp"
#include "cmpreg/distribution.hpp"
#include "cmpreg/glm.hpp"
#include "cmpreg/inference.hpp"
#include "cmpreg/report.hpp"
#include "cmpreg/simstudy.hpp"

namespace cmpreg::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

class WallTimer {
 public:
  double ms() const {
    auto dt = std::chrono::steady_clock::now() - start_;
    return std::chrono::duration<double, std::milli>(dt).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string piece;
  std::stringstream ss(s);
  while (std::getline(ss, piece, sep)) out.push_back(piece);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

struct FitArgs {
  std::string data_path;
  std::string response;
  std::string terms;
  std::vector<std::string> models;
  std::vector<std::string> categorical;
  std::string output = "table";
  double rel_tol = kSeriesRelTol;
  int max_terms = kSeriesMaxTerms;
};

struct CompareArgs {
  std::string data_path;
  std::string response;
  std::string family = "poisson";
  std::string models;  // semicolon-separated term lists, smallest first
  std::vector<std::string> categorical;
  std::string output = "table";
  double rel_tol = kSeriesRelTol;
  int max_terms = kSeriesMaxTerms;
};

struct DistArgs {
  double mu = 0.0, phi = 0.0, lambda = 0.0, nu = 0.0;
  bool have_mu = false, have_phi = false, have_lambda = false,
       have_nu = false;
  int ymax = -1;
  std::vector<int> ht_ys;
  int n_sample = 0;
  std::uint64_t seed = 1;
  std::string output = "table";
  double rel_tol = kSeriesRelTol;
  int max_terms = kSeriesMaxTerms;
};

struct SimulateArgs {
  std::string config_path;
  std::string out_dir = ".";
  bool have_seed = false;
  std::uint64_t seed = 0;
  int replicates_override = 0;
  std::string parametrization = "mean";
  int threads = 0;
  std::string output = "table";
  double rel_tol = kSeriesRelTol;
  int max_terms = kSeriesMaxTerms;
};

RegressionSpec make_spec(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                         Parametrization par, double rel_tol, int max_terms) {
  RegressionSpec spec;
  spec.y = y;
  spec.X = X;
  spec.parametrization = par;
  spec.series_rel_tol = rel_tol;
  spec.series_max_terms = max_terms;
  return spec;
}

int do_fit(const FitArgs& args, std::ostream& out) {
  WallTimer timer;
  Dataset data = load_csv_file(args.data_path, args.categorical);
  Design design = build_design(data, parse_terms(args.terms));
  Eigen::VectorXd y = response_vector(data, args.response);

  FitReport report;
  report.response = args.response;
  report.n = static_cast<int>(y.size());
  report.design_names = design.names;

  bool all_converged = true;
  for (const std::string& model : args.models) {
    if (model == "poisson") {
      GlmFit fit = fit_poisson_irls(y, design.X);
      all_converged = all_converged && fit.converged;
      report.models.push_back(
          model_report_poisson(fit, design.names, report.n));
    } else if (model == "quasipoisson") {
      GlmFit fit = quasi_poisson(fit_poisson_irls(y, design.X));
      all_converged = all_converged && fit.converged;
      report.models.push_back(model_report_quasi(fit, design.names));
    } else if (model == "cmp" || model == "cmp-mu") {
      auto par = model == "cmp" ? Parametrization::original
                                : Parametrization::mean;
      FitResult fit = fit_cmp(
          make_spec(y, design.X, par, args.rel_tol, args.max_terms));
      all_converged = all_converged && fit.converged;
      report.models.push_back(model_report_cmp(fit, design.names, report.n));
    } else {
      throw InputError("unknown model: " + model);
    }
  }
  report.wall_ms = timer.ms();
  if (args.output == "json") {
    out << to_json(report) << '\n';
  } else {
    out << to_text(report);
  }
  return all_converged ? kOk : kConvergenceWarning;
}

int do_compare(const CompareArgs& args, std::ostream& out) {
  WallTimer timer;
  Dataset data = load_csv_file(args.data_path, args.categorical);
  Eigen::VectorXd y = response_vector(data, args.response);
  const int n = static_cast<int>(y.size());

  std::vector<std::string> model_specs = split(args.models, ';');
  if (model_specs.empty()) {
    throw InputError("compare: --models needs at least one term list");
  }

  ComparisonReport report;
  report.family = args.family;
  report.response = args.response;
  report.n = n;

  bool all_converged = true;
  bool have_prev = false;
  int prev_np = 0;
  double prev_ll = 0.0;
  double prev_qdev = 0.0;

  for (const std::string& spec_str : model_specs) {
    Design design = build_design(data, parse_terms(spec_str));
    const int p = static_cast<int>(design.X.cols());
    std::string label = spec_str.empty() ? "1" : spec_str;

    ComparisonRow row;
    row.model_label = label;
    double qdev = 0.0;
    double sigma = 1.0;

    if (args.family == "poisson") {
      GlmFit fit = fit_poisson_irls(y, design.X);
      all_converged = all_converged && fit.converged;
      row.np = p;
      row.fit_measure = *fit.loglik;
      auto [aic, bic] = aic_bic(*fit.loglik, p, n);
      row.aic = aic;
      row.bic = bic;
    } else if (args.family == "quasipoisson") {
      GlmFit fit = quasi_poisson(fit_poisson_irls(y, design.X));
      all_converged = all_converged && fit.converged;
      row.np = p + 1;  // dispersion counts as estimated
      qdev = fit.deviance;
      sigma = fit.sigma_hat;
      row.fit_measure = qdev;
    } else if (args.family == "cmp" || args.family == "cmp-mu") {
      auto par = args.family == "cmp" ? Parametrization::original
                                      : Parametrization::mean;
      FitResult fit = fit_cmp(
          make_spec(y, design.X, par, args.rel_tol, args.max_terms));
      all_converged = all_converged && fit.converged;
      row.np = p + 1;
      row.fit_measure = fit.loglik;
      auto [aic, bic] = aic_bic(fit.loglik, p + 1, n);
      row.aic = aic;
      row.bic = bic;
    } else {
      throw InputError("unknown family: " + args.family);
    }

    if (have_prev) {
      if (row.np <= prev_np) {
        throw InputError(
            "compare: models must be ordered from smallest to largest");
      }
      if (args.family == "quasipoisson") {
        ComparisonRow test = quasi_f_test(prev_qdev, qdev, prev_np, row.np,
                                          sigma, n);
        row.stat = test.stat;
        row.df = test.df;
        row.p_value = test.p_value;
      } else {
        ComparisonRow test = lrt(prev_ll, row.fit_measure,
                                 row.np - prev_np);
        row.stat = test.stat;
        row.df = test.df;
        row.p_value = test.p_value;
      }
    }
    have_prev = true;
    prev_np = row.np;
    prev_ll = row.fit_measure;
    prev_qdev = qdev;
    report.rows.push_back(std::move(row));
  }

  report.wall_ms = timer.ms();
  if (args.output == "json") {
    out << to_json(report) << '\n';
  } else {
    out << to_text(report);
  }
  return all_converged ? kOk : kConvergenceWarning;
}

std::string fmt_num(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

int do_dist(const DistArgs& args, std::ostream& out) {
  WallTimer timer;
  const bool mean_given = args.have_mu || args.have_phi;
  const bool orig_given = args.have_lambda || args.have_nu;
  if (mean_given == orig_given ||
      (mean_given && !(args.have_mu && args.have_phi)) ||
      (orig_given && !(args.have_lambda && args.have_nu))) {
    throw InputError("dist: give either --mu with --phi, or --lambda with --nu");
  }

  OriginalParams params =
      mean_given ? to_original(MeanParams(args.mu, args.phi))
                 : OriginalParams(args.lambda, args.nu);
  const bool have_mean_scale = params.nu() > 0.0;
  double mu = have_mean_scale ? approx_mean(params) : 0.0;
  double phi = have_mean_scale ? std::log(params.nu()) : 0.0;

  Moments exact = exact_moments(params, args.rel_tol, args.max_terms);
  bool have_approx = params.nu() > 0.0;
  Moments approx = have_approx ? approx_moments(params) : Moments{};

  DispersionIndexes idx =
      indexes(params, args.ht_ys, args.rel_tol, args.max_terms);

  PmfTable table = pmf_table(params, args.rel_tol, args.max_terms);
  std::size_t n_rows = table.pmf.size();
  if (args.ymax >= 0) {
    n_rows = std::min(n_rows, static_cast<std::size_t>(args.ymax) + 1);
  }

  std::vector<int> draws;
  if (args.n_sample > 0) {
    SplitMix64 rng = SplitMix64::stream(args.seed, 0);
    draws = sample(params, args.n_sample, rng, args.rel_tol, args.max_terms);
  }

  if (args.output == "json") {
    ordered_json j;
    j["schema"] = 1;
    j["kind"] = "dist";
    ordered_json pj;
    pj["lambda"] = params.lambda();
    pj["nu"] = params.nu();
    pj["mu"] = have_mean_scale ? ordered_json(mu) : ordered_json(nullptr);
    pj["phi"] = have_mean_scale ? ordered_json(phi) : ordered_json(nullptr);
    j["params"] = std::move(pj);
    ordered_json mj;
    mj["exact"] =
        ordered_json{{"mean", exact.mean}, {"variance", exact.variance}};
    mj["approx"] = have_approx
                       ? ordered_json{{"mean", approx.mean},
                                      {"variance", approx.variance}}
                       : ordered_json(nullptr);
    j["moments"] = std::move(mj);
    ordered_json ij;
    ij["di"] = idx.di;
    ij["zi"] = idx.zi;
    ordered_json ht = ordered_json::array();
    for (auto [yy, ratio] : idx.ht) {
      ht.push_back(ordered_json{{"y", yy}, {"ratio", ratio}});
    }
    ij["ht"] = std::move(ht);
    j["indexes"] = std::move(ij);
    ordered_json rows = ordered_json::array();
    for (std::size_t y = 0; y < n_rows; ++y) {
      rows.push_back(ordered_json{
          {"y", y}, {"pmf", table.pmf[y]}, {"cdf", table.cdf[y]}});
    }
    j["pmf"] = std::move(rows);
    if (!draws.empty()) j["samples"] = draws;
    j["meta"] = ordered_json{{"wall_ms", timer.ms()}};
    out << j.dump(2) << '\n';
    return kOk;
  }

  out << "params: lambda " << fmt_num(params.lambda()) << "  nu "
      << fmt_num(params.nu());
  if (have_mean_scale) {
    out << "  (mu " << fmt_num(mu) << "  phi " << fmt_num(phi) << ")";
  }
  out << '\n';
  out << "moments (exact):  mean " << fmt_num(exact.mean) << "  variance "
      << fmt_num(exact.variance) << '\n';
  if (have_approx) {
    out << "moments (approx): mean " << fmt_num(approx.mean) << "  variance "
        << fmt_num(approx.variance) << '\n';
  }
  out << "indexes: DI " << fmt_num(idx.di) << "  ZI " << fmt_num(idx.zi)
      << '\n';
  for (auto [yy, ratio] : idx.ht) {
    out << "ht(y=" << yy << "): " << fmt_num(ratio) << '\n';
  }
  out << "y,pmf,cdf\n";
  for (std::size_t y = 0; y < n_rows; ++y) {
    out << y << ',' << fmt_num(table.pmf[y]) << ',' << fmt_num(table.cdf[y])
        << '\n';
  }
  if (!draws.empty()) {
    out << "samples:";
    for (int d : draws) out << ' ' << d;
    out << '\n';
  }
  return kOk;
}

int do_simulate(const SimulateArgs& args, std::ostream& out) {
  SimScenario scenario = read_scenario_file(args.config_path);
  if (args.have_seed) scenario.seed = args.seed;
  if (args.replicates_override > 0) {
    scenario.replicates = args.replicates_override;
  }
  scenario.parametrization = args.parametrization == "original"
                                 ? Parametrization::original
                                 : Parametrization::mean;
  scenario.series_rel_tol = args.rel_tol;
  scenario.series_max_terms = args.max_terms;
  scenario.n_threads = args.threads;

  SimSummary summary = run_scenario(scenario);

  const std::string rep_path = args.out_dir + "/replicates.csv";
  std::ofstream rep(rep_path);
  if (!rep) throw InputError("cannot write " + rep_path);
  write_replicates_csv(summary, rep);

  const std::string sum_path = args.out_dir + "/summary.json";
  std::ofstream sum(sum_path);
  if (!sum) throw InputError("cannot write " + sum_path);
  std::string summary_json = summary_to_json(summary);
  sum << summary_json << '\n';

  if (args.output == "json") {
    out << summary_json << '\n';
  } else {
    out << "scenario: n=" << scenario.n << " phi=" << scenario.phi_true
        << " beta=[";
    for (Eigen::Index i = 0; i < scenario.beta_true.size(); ++i) {
      out << (i ? "," : "") << scenario.beta_true[i];
    }
    out << "] replicates=" << scenario.replicates
        << " seed=" << scenario.seed << " parametrization="
        << (scenario.parametrization == Parametrization::mean ? "mean"
                                                              : "original")
        << '\n';
    out << "converged " << summary.n_converged << '/'
        << scenario.replicates << " (excluded " << summary.n_excluded
        << (summary.excluded_flagged ? ", FLAGGED" : "") << ")\n";
    out << "parameter     truth    mean_bias   mean_se  std_bias  coverage\n";
    for (std::size_t k = 0; k < summary.parameter_names.size(); ++k) {
      auto kk = static_cast<Eigen::Index>(k);
      std::ostringstream line;
      line << std::left << std::setw(10) << summary.parameter_names[k]
           << std::right << std::fixed << std::setprecision(4)
           << std::setw(9) << summary.truth[kk] << std::setw(13)
           << summary.mean_bias[kk] << std::setw(10) << summary.mean_se[kk]
           << std::setw(10) << summary.standardized_bias[kk] << std::setw(10)
           << summary.coverage[kk];
      out << line.str() << '\n';
    }
    out << "wrote " << rep_path << ", " << sum_path << '\n';
  }
  return summary.excluded_flagged ? kConvergenceWarning : kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"count-data regression with adjustable dispersion", "cmpreg"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "fit models to CSV data");
  fit->add_option("--data", fit_args.data_path, "CSV file with a header row")
      ->required();
  fit->add_option("--response", fit_args.response, "count response column")
      ->required();
  fit->add_option("--terms", fit_args.terms,
                  "comma-separated terms, e.g. x1,x2,K^2,umid:K");
  fit->add_option("--model", fit_args.models,
                  "poisson, quasipoisson, cmp, cmp-mu (repeatable)")
      ->delimiter(',');
  fit->add_option("--categorical", fit_args.categorical,
                  "treat these columns as categorical")
      ->delimiter(',');
  fit->add_option("--output", fit_args.output, "table or json")
      ->check(CLI::IsMember({"table", "json"}));
  fit->add_option("--rel-tol", fit_args.rel_tol, "series tolerance");
  fit->add_option("--max-terms", fit_args.max_terms, "series term cap");

  CompareArgs cmp_args;
  auto* cmp = app.add_subcommand(
      "compare", "fit a nested model sequence and test successive pairs");
  cmp->add_option("--data", cmp_args.data_path, "CSV file with a header row")
      ->required();
  cmp->add_option("--response", cmp_args.response, "count response column")
      ->required();
  cmp->add_option("--family", cmp_args.family,
                  "poisson, quasipoisson, cmp, cmp-mu")
      ->required();
  cmp->add_option("--models", cmp_args.models,
                  "semicolon-separated term lists, smallest first; "
                  "use 1 for intercept-only")
      ->required();
  cmp->add_option("--categorical", cmp_args.categorical,
                  "treat these columns as categorical")
      ->delimiter(',');
  cmp->add_option("--output", cmp_args.output, "table or json")
      ->check(CLI::IsMember({"table", "json"}));
  cmp->add_option("--rel-tol", cmp_args.rel_tol, "series tolerance");
  cmp->add_option("--max-terms", cmp_args.max_terms, "series term cap");

  DistArgs dist_args;
  auto* dist = app.add_subcommand(
      "dist", "probabilities, moments and dispersion diagnostics");
  auto* mu_opt = dist->add_option("--mu", dist_args.mu, "mean-scale location");
  auto* phi_opt =
      dist->add_option("--phi", dist_args.phi, "log dispersion, 0 = Poisson");
  auto* lambda_opt =
      dist->add_option("--lambda", dist_args.lambda, "classic rate");
  auto* nu_opt = dist->add_option("--nu", dist_args.nu, "classic dispersion");
  dist->add_option("--ymax", dist_args.ymax, "truncate the printed pmf table");
  dist->add_option("--ht-ys", dist_args.ht_ys,
                   "y values for successive-probability ratios")
      ->delimiter(',');
  dist->add_option("--sample", dist_args.n_sample, "also draw this many values");
  dist->add_option("--seed", dist_args.seed, "sampling seed");
  dist->add_option("--output", dist_args.output, "table or json")
      ->check(CLI::IsMember({"table", "json"}));
  dist->add_option("--rel-tol", dist_args.rel_tol, "series tolerance");
  dist->add_option("--max-terms", dist_args.max_terms, "series term cap");

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand(
      "simulate", "run a replication study from a scenario file");
  sim->add_option("--config", sim_args.config_path,
                  "scenario file (n, phi, beta, replicates, seed)")
      ->required();
  sim->add_option("--out-dir", sim_args.out_dir,
                  "directory for replicates.csv and summary.json");
  auto* seed_opt =
      sim->add_option("--seed", sim_args.seed, "override the scenario seed");
  sim->add_option("--replicates", sim_args.replicates_override,
                  "override the scenario replicate count");
  sim->add_option("--parametrization", sim_args.parametrization,
                  "mean or original")
      ->check(CLI::IsMember({"mean", "original"}));
  sim->add_option("--threads", sim_args.threads,
                  "replicate-level worker threads");
  sim->add_option("--output", sim_args.output, "table or json")
      ->check(CLI::IsMember({"table", "json"}));
  sim->add_option("--rel-tol", sim_args.rel_tol, "series tolerance");
  sim->add_option("--max-terms", sim_args.max_terms, "series term cap");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  dist_args.have_mu = mu_opt->count() > 0;
  dist_args.have_phi = phi_opt->count() > 0;
  dist_args.have_lambda = lambda_opt->count() > 0;
  dist_args.have_nu = nu_opt->count() > 0;
  sim_args.have_seed = seed_opt->count() > 0;
  if (fit_args.models.empty()) fit_args.models = {"cmp-mu"};

  try {
    if (fit->parsed()) return do_fit(fit_args, out);
    if (cmp->parsed()) return do_compare(cmp_args, out);
    if (dist->parsed()) return do_dist(dist_args, out);
    if (sim->parsed()) return do_simulate(sim_args, out);
    err << "error: no subcommand given\n";
    return kInputError;
  } catch (const SingularDesignError& e) {
    err << "error: " << e.what() << '\n';
    return kDesignError;
  } catch (const SeriesNotConvergedError& e) {
    err << "error: " << e.what() << '\n';
    return kConvergenceWarning;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

}  // namespace cmpreg::cli
