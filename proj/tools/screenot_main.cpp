// Command-line front end: adaptive singular value thresholding from a
// spectrum file, matrix denoising from CSV, and the simulation harness.
//
// Exit codes (one per error category, printed as error[<category>]):
//   0 success, 2 usage, 3 io, 4 parse, 5 constraint, 6 degenerate, 7 solver.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "screenot/experiments.hpp"
#include "screenot/io.hpp"
#include "screenot/matrix_lab.hpp"
#include "screenot/screenot.hpp"

namespace {

int exit_code_for(screenot::ErrorCategory c) {
  switch (c) {
    case screenot::ErrorCategory::Io: return 3;
    case screenot::ErrorCategory::Parse: return 4;
    case screenot::ErrorCategory::Constraint: return 5;
    case screenot::ErrorCategory::Degenerate: return 6;
    case screenot::ErrorCategory::Solver: return 7;
  }
  return 1;
}

screenot::Strategy parse_strategy(const std::string& s) {
  if (s == "impute") return screenot::Strategy::Impute;
  if (s == "winsorize") return screenot::Strategy::Winsorize;
  if (s == "zero") return screenot::Strategy::TransportToZero;
  throw screenot::ParseError("unknown strategy '" + s + "' (expected impute|winsorize|zero)");
}

struct ThresholdArgs {
  std::string spectrum_file;
  int n = 0, p = 0, k = 0;
  std::string strategy = "impute";
  double tol = 1e-9;
};

int cmd_threshold(const ThresholdArgs& a) {
  std::vector<double> values = screenot::io::read_spectrum(a.spectrum_file);
  screenot::ThresholdResult res =
      screenot::screenot(std::move(values), a.n, a.p, a.k, parse_strategy(a.strategy), a.tol);
  std::cout << "theta_hat " << screenot::io::format_double(res.theta_hat) << "\n";
  std::cout << "retained_rank " << res.retained_rank << "\n";
  return 0;
}

struct DenoiseArgs {
  std::string matrix_file;
  std::string truth_file;
  std::string out_file;
  std::string report_file;
  int k = 0;
  std::string strategy = "impute";
  double tol = 1e-9;
};

int cmd_denoise(const DenoiseArgs& a) {
  using namespace screenot;
  Matrix y = io::read_csv_matrix(a.matrix_file);
  const int n = static_cast<int>(y.rows());
  const int p = static_cast<int>(y.cols());
  SvdTriple svd_y = svd(y);

  std::vector<double> spectrum(svd_y.s.data(), svd_y.s.data() + svd_y.s.size());
  nlohmann::json report;
  double theta = 0.0;
  bool degenerate_noise = false;
  try {
    ThresholdResult res = screenot::screenot(spectrum, n, p, a.k, parse_strategy(a.strategy), a.tol);
    theta = res.theta_hat;
    report["theta_hat"] = res.theta_hat;
    report["psi_at_theta"] = res.psi_at_theta;
    report["solver_iterations"] = res.solver_iterations;
  } catch (const DegenerateCdfError&) {
    // Pseudo-noise CDF is identically zero: the spectrum has no noise bulk
    // beyond rank k. Retain every positive singular value.
    theta = 0.0;
    degenerate_noise = true;
    report["theta_hat"] = 0.0;
  }
  Matrix denoised = hard_threshold_reconstruct(svd_y, theta);

  const std::string out_path =
      a.out_file.empty() ? a.matrix_file + ".denoised.csv" : a.out_file;
  const std::string report_path =
      a.report_file.empty() ? a.matrix_file + ".report.json" : a.report_file;
  io::write_csv_matrix(out_path, denoised);

  report["strategy"] = a.strategy;
  report["k"] = a.k;
  report["n"] = n;
  report["p"] = p;
  report["degenerate_noise"] = degenerate_noise;
  report["retained_rank"] =
      static_cast<int>(std::count_if(svd_y.s.data(), svd_y.s.data() + svd_y.s.size(),
                                     [&](double v) { return v > theta; }));

  if (!a.truth_file.empty()) {
    Matrix x = io::read_csv_matrix(a.truth_file);
    if (x.rows() != y.rows() || x.cols() != y.cols())
      throw ConstraintError("truth matrix shape does not match the data matrix");
    DenoiseReport rep = oracle(x, svd_y);
    rep.se_at_theta = se_loss(x, denoised);
    rep.attained_oracle = interval_contains(rep, theta);
    report["se_at_theta"] = rep.se_at_theta;
    report["oracle_se"] = rep.oracle_se;
    report["oracle_rank"] = rep.oracle_rank;
    report["oracle_interval_lo"] = rep.interval_lo;
    if (std::isinf(rep.interval_hi))
      report["oracle_interval_hi"] = "inf";  // JSON has no infinity literal
    else
      report["oracle_interval_hi"] = rep.interval_hi;
    report["attained_oracle"] = rep.attained_oracle;
  }

  std::ofstream rf(report_path);
  if (!rf) throw IoError("cannot write '" + report_path + "'");
  rf << report.dump(2) << "\n";
  std::cout << "wrote " << out_path << "\n";
  std::cout << "wrote " << report_path << "\n";
  return 0;
}

struct SimulateArgs {
  std::string config_file;
  std::string out_dir;
  int threads = -1;
  bool svg = false;
};

int cmd_simulate(const SimulateArgs& a) {
  screenot::ExperimentConfig cfg = screenot::parse_config(a.config_file);
  if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
  if (a.threads >= 0) cfg.threads = a.threads;
  if (a.svg) cfg.svg = true;
  screenot::ExperimentOutput out = screenot::run_experiment(cfg);
  std::cout << "wrote " << out.csv_path << "\n";
  if (out.svg_path) std::cout << "wrote " << *out.svg_path << "\n";
  std::cout << "wrote " << out.meta_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise-adaptive optimal hard thresholding of singular values"};
  app.require_subcommand(1);

  ThresholdArgs ta;
  CLI::App* th = app.add_subcommand("threshold", "Compute the adaptive threshold for a spectrum");
  th->add_option("--spectrum", ta.spectrum_file, "File with one singular value per line")
      ->required();
  th->add_option("--n", ta.n, "Row count of the data matrix")->required();
  th->add_option("--p", ta.p, "Column count of the data matrix")->required();
  th->add_option("--k", ta.k, "Upper bound on the signal rank")->required();
  th->add_option("--strategy", ta.strategy, "impute|winsorize|zero (default impute)");
  th->add_option("--tol", ta.tol, "Solver tolerance (default 1e-9)");

  DenoiseArgs da;
  CLI::App* de = app.add_subcommand("denoise", "Hard-threshold a dense CSV matrix");
  de->add_option("--matrix", da.matrix_file, "Headerless CSV data matrix")->required();
  de->add_option("--k", da.k, "Upper bound on the signal rank")->required();
  de->add_option("--strategy", da.strategy, "impute|winsorize|zero (default impute)");
  de->add_option("--tol", da.tol, "Solver tolerance (default 1e-9)");
  de->add_option("--out", da.out_file, "Output CSV (default <matrix>.denoised.csv)");
  de->add_option("--report", da.report_file, "Report sidecar (default <matrix>.report.json)");
  de->add_option("--truth", da.truth_file, "Known signal matrix; enables the oracle report");

  SimulateArgs sa;
  CLI::App* si = app.add_subcommand("simulate", "Run an experiment from a JSON config");
  si->add_option("--config", sa.config_file, "JSON experiment config")->required();
  si->add_option("--out", sa.out_dir, "Output directory (overrides config)");
  si->add_option("--threads", sa.threads, "Worker threads (0 = hardware)");
  si->add_flag("--svg", sa.svg, "Also emit SVG plots");

  try {
    app.parse(argc, argv);
    if (th->parsed()) return cmd_threshold(ta);
    if (de->parsed()) return cmd_denoise(da);
    if (si->parsed()) return cmd_simulate(sa);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const screenot::Error& e) {
    std::cerr << "error[" << screenot::category_name(e.category()) << "] " << e.what() << "\n";
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error[internal] " << e.what() << "\n";
    return 1;
  }
  return 2;
}
