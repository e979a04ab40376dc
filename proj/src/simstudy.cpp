#include "cmpreg/simstudy.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cmpreg/data.hpp"
#include "cmpreg/distribution.hpp"
#include "cmpreg/special.hpp"

namespace cmpreg {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Shortest decimal form that round-trips; empty for NaN (missing value).
std::string fmt(double v) {
  if (std::isnan(v)) return {};
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InputError("scenario file: cannot parse " + what + ": '" + s + "'");
  }
}

long long parse_int(const std::string& s, const std::string& what) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("scenario file: cannot parse " + what + ": '" + s + "'");
  }
  return v;
}

}  // namespace

Eigen::MatrixXd gen_design(int n) {
  if (n < 6) throw std::invalid_argument("gen_design: n must be at least 6");
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(n, 4);
  X.col(0).setOnes();
  int block = (n + 2) / 3;  // ceil(n / 3): the last level may run short
  for (int i = 0; i < n; ++i) {
    X(i, 1) = static_cast<double>(i) / (n - 1);
    int level = i / block;
    if (level == 1) X(i, 2) = 1.0;
    if (level == 2) X(i, 3) = 1.0;
  }
  return X;
}

SimSummary run_scenario(const SimScenario& scenario) {
  if (scenario.beta_true.size() != 4) {
    throw std::invalid_argument(
        "run_scenario: beta_true must have 4 entries for the standard design");
  }
  if (scenario.replicates < 1) {
    throw std::invalid_argument("run_scenario: replicates must be positive");
  }
  if (!(scenario.level > 0.0 && scenario.level < 1.0)) {
    throw std::invalid_argument("run_scenario: level must be in (0, 1)");
  }

  const int n = scenario.n;
  const Eigen::MatrixXd X = gen_design(n);
  const Eigen::VectorXd mu = (X * scenario.beta_true).array().exp();

  // Inversion tables depend only on (mu_i, phi), so they are shared across
  // replicates.
  std::vector<std::vector<double>> cdfs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    MeanParams p(mu[i], scenario.phi_true);
    PmfTable table =
        pmf_table(p, scenario.series_rel_tol, scenario.series_max_terms);
    if (!table.complete) {
      throw SeriesNotConvergedError(
          "run_scenario: sampling table incomplete at observation " +
          std::to_string(i));
    }
    cdfs[static_cast<std::size_t>(i)] = std::move(table.cdf);
  }

  const int n_par = 5;
  Eigen::VectorXd truth(n_par);
  truth << scenario.beta_true, scenario.phi_true;
  const double z = normal_quantile(1.0 - 0.5 * (1.0 - scenario.level));

  std::vector<ReplicateRecord> records(
      static_cast<std::size_t>(scenario.replicates));

  auto run_replicate = [&](int k) {
    SplitMix64 rng = SplitMix64::stream(scenario.seed,
                                        static_cast<std::uint64_t>(k));
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      const auto& cdf = cdfs[static_cast<std::size_t>(i)];
      double u = rng.next_double();
      auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
      if (it == cdf.end()) --it;
      y[i] = static_cast<double>(it - cdf.begin());
    }

    RegressionSpec rspec;
    rspec.y = y;
    rspec.X = X;
    rspec.parametrization = scenario.parametrization;
    rspec.series_rel_tol = scenario.series_rel_tol;
    rspec.series_max_terms = scenario.series_max_terms;

    ReplicateRecord rec;
    rec.replicate = k;
    try {
      FitResult fit = fit_cmp(rspec);
      rec.estimate.resize(n_par);
      rec.estimate << fit.beta, fit.phi;
      // Coverage and correlations need standard errors, so a fit without a
      // usable covariance counts as excluded even if the search converged.
      if (fit.converged && fit.vcov_available) {
        rec.converged = true;
        rec.se = fit.se;
        rec.covered.resize(n_par);
        for (int j = 0; j < n_par; ++j) {
          rec.covered[j] =
              std::fabs(rec.estimate[j] - truth[j]) <= z * fit.se[j] ? 1.0
                                                                     : 0.0;
        }
        rec.corr_phi = estimator_correlation(fit);
      }
    } catch (const std::exception&) {
      rec.converged = false;
    }
    records[static_cast<std::size_t>(k)] = std::move(rec);
  };

  if (scenario.n_threads > 1 && scenario.replicates > 1) {
    int n_workers = std::min(scenario.n_threads, scenario.replicates);
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(n_workers));
    for (int t = 0; t < n_workers; ++t) {
      workers.emplace_back([&, t]() {
        for (int k = t; k < scenario.replicates; k += n_workers) {
          run_replicate(k);
        }
      });
    }
    for (auto& w : workers) w.join();
  } else {
    for (int k = 0; k < scenario.replicates; ++k) run_replicate(k);
  }

  SimSummary summary;
  summary.scenario = scenario;
  summary.parameter_names = {"beta0", "beta1", "beta21", "beta22", "phi"};
  summary.truth = truth;
  summary.mean_bias = Eigen::VectorXd::Zero(n_par);
  summary.mean_se = Eigen::VectorXd::Zero(n_par);
  summary.coverage = Eigen::VectorXd::Zero(n_par);
  summary.mean_corr_phi = Eigen::VectorXd::Zero(n_par - 1);
  summary.mean_abs_corr_phi = Eigen::VectorXd::Zero(n_par - 1);

  int used = 0;
  for (const ReplicateRecord& rec : records) {
    if (!rec.converged) continue;
    ++used;
    summary.mean_bias += rec.estimate - truth;
    summary.mean_se += rec.se;
    summary.coverage += rec.covered;
    summary.mean_corr_phi += rec.corr_phi;
    summary.mean_abs_corr_phi += rec.corr_phi.cwiseAbs();
  }
  summary.n_converged = used;
  summary.n_excluded = scenario.replicates - used;
  summary.excluded_flagged =
      summary.n_excluded * 10 > scenario.replicates;
  if (used > 0) {
    summary.mean_bias /= used;
    summary.mean_se /= used;
    summary.coverage /= used;
    summary.mean_corr_phi /= used;
    summary.mean_abs_corr_phi /= used;
  } else {
    summary.mean_bias.setConstant(kNaN);
    summary.mean_se.setConstant(kNaN);
    summary.coverage.setConstant(kNaN);
    summary.mean_corr_phi.setConstant(kNaN);
    summary.mean_abs_corr_phi.setConstant(kNaN);
  }
  summary.se_divisor = summary.mean_se;
  summary.standardized_bias =
      summary.mean_bias.cwiseQuotient(summary.se_divisor);
  summary.records = std::move(records);
  return summary;
}

void standardize_bias(SimSummary& summary, const Eigen::VectorXd& divisor) {
  if (divisor.size() != summary.mean_bias.size()) {
    throw std::invalid_argument("standardize_bias: divisor length mismatch");
  }
  summary.se_divisor = divisor;
  summary.standardized_bias = summary.mean_bias.cwiseQuotient(divisor);
}

void write_replicates_csv(const SimSummary& summary, std::ostream& out) {
  out << "replicate,parameter,truth,estimate,se,bias,covered,corr_with_phi,"
         "converged\n";
  const auto& names = summary.parameter_names;
  for (const ReplicateRecord& rec : summary.records) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      auto jj = static_cast<Eigen::Index>(j);
      out << rec.replicate << ',' << names[j] << ','
          << fmt(summary.truth[jj]) << ',';
      if (rec.estimate.size() > jj) out << fmt(rec.estimate[jj]);
      out << ',';
      if (rec.se.size() > jj) out << fmt(rec.se[jj]);
      out << ',';
      if (rec.estimate.size() > jj) {
        out << fmt(rec.estimate[jj] - summary.truth[jj]);
      }
      out << ',';
      if (rec.covered.size() > jj) out << fmt(rec.covered[jj]);
      out << ',';
      if (jj + 1 < static_cast<Eigen::Index>(names.size()) &&
          rec.corr_phi.size() > jj) {
        out << fmt(rec.corr_phi[jj]);
      }
      out << ',' << (rec.converged ? 1 : 0) << '\n';
    }
  }
}

std::string summary_to_json(const SimSummary& summary) {
  using json = nlohmann::ordered_json;
  auto opt = [](double v) {
    return std::isnan(v) ? json(nullptr) : json(v);
  };
  json j;
  j["schema"] = 1;
  j["kind"] = "simulation";
  json sc;
  sc["n"] = summary.scenario.n;
  sc["phi"] = summary.scenario.phi_true;
  sc["beta"] = std::vector<double>(
      summary.scenario.beta_true.data(),
      summary.scenario.beta_true.data() + summary.scenario.beta_true.size());
  sc["replicates"] = summary.scenario.replicates;
  sc["seed"] = summary.scenario.seed;
  sc["level"] = summary.scenario.level;
  sc["parametrization"] =
      summary.scenario.parametrization == Parametrization::mean ? "mean"
                                                                : "original";
  j["scenario"] = std::move(sc);
  json params = json::array();
  for (std::size_t k = 0; k < summary.parameter_names.size(); ++k) {
    auto kk = static_cast<Eigen::Index>(k);
    json row;
    row["name"] = summary.parameter_names[k];
    row["truth"] = summary.truth[kk];
    row["mean_bias"] = opt(summary.mean_bias[kk]);
    row["mean_se"] = opt(summary.mean_se[kk]);
    row["se_divisor"] = opt(summary.se_divisor[kk]);
    row["standardized_bias"] = opt(summary.standardized_bias[kk]);
    row["coverage"] = opt(summary.coverage[kk]);
    if (kk + 1 < static_cast<Eigen::Index>(summary.parameter_names.size())) {
      row["mean_corr_phi"] = opt(summary.mean_corr_phi[kk]);
      row["mean_abs_corr_phi"] = opt(summary.mean_abs_corr_phi[kk]);
    }
    params.push_back(std::move(row));
  }
  j["parameters"] = std::move(params);
  json reps;
  reps["total"] = summary.scenario.replicates;
  reps["converged"] = summary.n_converged;
  reps["excluded"] = summary.n_excluded;
  reps["excluded_flagged"] = summary.excluded_flagged;
  j["replicates"] = std::move(reps);
  return j.dump(2);
}

SimScenario read_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file: " + path);

  SimScenario s;
  s.replicates = 1000;
  s.seed = 1;
  bool have_n = false, have_phi = false, have_beta = false;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InputError("scenario file line " + std::to_string(line_no) +
                       ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "n") {
      s.n = static_cast<int>(parse_int(value, "n"));
      have_n = true;
    } else if (key == "phi") {
      s.phi_true = parse_double(value, "phi");
      have_phi = true;
    } else if (key == "beta") {
      std::vector<double> b;
      std::stringstream ss(value);
      std::string piece;
      while (std::getline(ss, piece, ',')) {
        b.push_back(parse_double(trim(piece), "beta"));
      }
      s.beta_true = Eigen::Map<Eigen::VectorXd>(
          b.data(), static_cast<Eigen::Index>(b.size()));
      have_beta = true;
    } else if (key == "replicates") {
      s.replicates = static_cast<int>(parse_int(value, "replicates"));
    } else if (key == "seed") {
      s.seed = static_cast<std::uint64_t>(parse_int(value, "seed"));
    } else {
      throw InputError("scenario file line " + std::to_string(line_no) +
                       ": unknown key '" + key + "'");
    }
  }
  if (!have_n || !have_phi || !have_beta) {
    throw InputError("scenario file: n, phi and beta are required");
  }
  return s;
}

DevianceGrid deviance_grid(const RegressionSpec& spec, const FitResult& fit,
                           double loc_lo, double loc_hi, double phi_lo,
                           double phi_hi, int loc_points, int phi_points) {
  if (loc_points < 2 || phi_points < 2) {
    throw std::invalid_argument("deviance_grid: need at least 2 grid points");
  }
  if (!(loc_lo > 0.0) || !(loc_lo < loc_hi) || !(phi_lo < phi_hi)) {
    throw std::invalid_argument("deviance_grid: bad grid ranges");
  }
  DevianceGrid grid;
  grid.location.resize(static_cast<std::size_t>(loc_points));
  grid.phi.resize(static_cast<std::size_t>(phi_points));
  for (int a = 0; a < loc_points; ++a) {
    grid.location[static_cast<std::size_t>(a)] =
        loc_lo + (loc_hi - loc_lo) * a / (loc_points - 1);
  }
  for (int b = 0; b < phi_points; ++b) {
    grid.phi[static_cast<std::size_t>(b)] =
        phi_lo + (phi_hi - phi_lo) * b / (phi_points - 1);
  }
  grid.deviance.resize(loc_points, phi_points);
  Eigen::VectorXd beta = fit.beta;
  const bool mean_scale = spec.parametrization == Parametrization::mean;
  for (int a = 0; a < loc_points; ++a) {
    beta[0] = std::log(grid.location[static_cast<std::size_t>(a)]);
    for (int b = 0; b < phi_points; ++b) {
      double phi = grid.phi[static_cast<std::size_t>(b)];
      double ll = mean_scale ? loglik_cmp_mu(beta, phi, spec)
                             : loglik_cmp_original(beta, phi, spec);
      grid.deviance(a, b) =
          std::isfinite(ll) ? 2.0 * (fit.loglik - ll) : kNaN;
    }
  }
  return grid;
}

void write_deviance_csv(const DevianceGrid& grid, std::ostream& out) {
  out << "location,phi,deviance\n";
  for (std::size_t a = 0; a < grid.location.size(); ++a) {
    for (std::size_t b = 0; b < grid.phi.size(); ++b) {
      out << fmt(grid.location[a]) << ',' << fmt(grid.phi[b]) << ','
          << fmt(grid.deviance(static_cast<Eigen::Index>(a),
                               static_cast<Eigen::Index>(b)))
          << '\n';
    }
  }
}

}  // namespace cmpreg
