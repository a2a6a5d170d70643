#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "screenot/asymptotic.hpp"
#include "screenot/errors.hpp"
#include "screenot/io.hpp"
#include "screenot/matrix_lab.hpp"
#include "screenot/noise_models.hpp"
#include "screenot/pseudo_noise.hpp"
#include "screenot/rng.hpp"
#include "screenot/screenot.hpp"
#include "screenot/svg.hpp"

namespace screenot {

enum class Experiment { Hist, R0vsR1, SEvsASE, OracleAttainment, Regret, ConvergenceRate };

inline const char* experiment_name(Experiment e) {
  switch (e) {
    case Experiment::Hist: return "Hist";
    case Experiment::R0vsR1: return "R0vsR1";
    case Experiment::SEvsASE: return "SEvsASE";
    case Experiment::OracleAttainment: return "OracleAttainment";
    case Experiment::Regret: return "Regret";
    case Experiment::ConvergenceRate: return "ConvergenceRate";
  }
  return "?";
}

/// All limiting ("plugin") reference quantities are evaluated on a spectrum
/// of this size generated from this fixed seed, so that reference
/// thresholds are stable numbers per (noise kind, gamma).
inline constexpr int kDefaultPluginP = 3000;
inline constexpr std::uint64_t kPluginSeed = 8ULL;

struct ExperimentConfig {
  Experiment experiment = Experiment::Hist;
  NoiseSpec noise;
  SignalSpec signal;                         // spikes; empty = experiment default
  std::vector<int> p_list;
  int k = 20;
  std::vector<Strategy> strategies = {Strategy::TransportToZero, Strategy::Winsorize,
                                      Strategy::Impute};
  int replicates = 50;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  bool svg = false;
  int threads = 0;                           // 0 = hardware concurrency
  int plugin_p = kDefaultPluginP;
  double tol = 1e-9;

  int n_for(int p) const {
    return static_cast<int>(std::ceil(static_cast<double>(p) / noise.gamma));
  }

  void validate() const {
    noise.validate();
    signal.validate();
    if (replicates < 1) throw ConstraintError("config.replicates must be >= 1");
    if (p_list.empty()) throw ConstraintError("config.p_list must be nonempty");
    for (int p : p_list)
      if (p < 2) throw ConstraintError("config.p_list entries must be >= 2");
    if (k < 0) throw ConstraintError("config.k must be >= 0");
    const int p_min = *std::min_element(p_list.begin(), p_list.end());
    for (Strategy s : strategies) {
      if (s == Strategy::Impute && 2 * k + 1 > p_min)
        throw ConstraintError("config.k: imputation needs 2k+1 <= p for every p in p_list (k=" +
                              std::to_string(k) + ", smallest p=" + std::to_string(p_min) + ")");
      if (s != Strategy::Impute && k >= p_min)
        throw ConstraintError("config.k must be < every p in p_list");
    }
    if (plugin_p < 10) throw ConstraintError("config.plugin_p must be >= 10");
    if (!(tol > 0.0)) throw ConstraintError("config.tol must be positive");
    if (strategies.empty()) throw ConstraintError("config.strategies must be nonempty");
  }
};

// --------------------------------------------------------------------------
// config file parsing (JSON)

namespace detail {

inline Experiment experiment_from_string(const std::string& s) {
  for (Experiment e : {Experiment::Hist, Experiment::R0vsR1, Experiment::SEvsASE,
                       Experiment::OracleAttainment, Experiment::Regret,
                       Experiment::ConvergenceRate})
    if (s == experiment_name(e)) return e;
  throw ParseError("config field 'experiment': unknown value '" + s + "'");
}

inline NoiseKind noise_kind_from_string(const std::string& s) {
  for (NoiseKind k : {NoiseKind::MarcenkoPastur, NoiseKind::Chi10, NoiseKind::Mix2,
                      NoiseKind::Unif, NoiseKind::Fisher3n, NoiseKind::PaddedIdentity,
                      NoiseKind::Ar1})
    if (s == noise_kind_name(k)) return k;
  throw ParseError("config field 'noise.kind': unknown value '" + s + "'");
}

inline Strategy strategy_from_string(const std::string& s) {
  for (Strategy st : {Strategy::TransportToZero, Strategy::Winsorize, Strategy::Impute})
    if (s == strategy_name(st)) return st;
  throw ParseError("unknown strategy '" + s + "' (expected zero|winsorize|impute)");
}

}  // namespace detail

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("config '" + path + "': " + e.what());
  }

  auto field = [&](const char* name) -> const nlohmann::json& {
    if (!j.contains(name)) throw ParseError("config '" + path + "': missing field '" + std::string(name) + "'");
    return j.at(name);
  };

  ExperimentConfig cfg;
  try {
    cfg.experiment = detail::experiment_from_string(field("experiment").get<std::string>());
    const auto& noise = field("noise");
    cfg.noise.kind = detail::noise_kind_from_string(noise.at("kind").get<std::string>());
    cfg.noise.gamma = noise.at("gamma").get<double>();
    if (noise.contains("rho")) cfg.noise.rho = noise.at("rho").get<double>();
    if (j.contains("signal")) {
      const auto& sig = j.at("signal");
      if (sig.contains("spikes")) cfg.signal.spikes = sig.at("spikes").get<std::vector<double>>();
    }
    cfg.p_list = field("p_list").get<std::vector<int>>();
    cfg.k = field("k").get<int>();
    if (j.contains("strategies")) {
      cfg.strategies.clear();
      for (const auto& s : j.at("strategies"))
        cfg.strategies.push_back(detail::strategy_from_string(s.get<std::string>()));
    }
    if (j.contains("replicates")) cfg.replicates = j.at("replicates").get<int>();
    cfg.seed = field("seed").get<std::uint64_t>();
    if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    if (j.contains("svg")) cfg.svg = j.at("svg").get<bool>();
    if (j.contains("threads")) cfg.threads = j.at("threads").get<int>();
    if (j.contains("plugin_p")) cfg.plugin_p = j.at("plugin_p").get<int>();
    if (j.contains("tol")) cfg.tol = j.at("tol").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config '" + path + "': " + e.what());
  }
  cfg.validate();
  return cfg;
}

// --------------------------------------------------------------------------
// shared machinery

/// Plugin reference model for a noise kind at shape gamma. The spectrum is
/// sampled once from the pinned seed; see kPluginSeed.
inline PluginModel make_plugin_model(NoiseKind kind, double gamma, int plugin_p = kDefaultPluginP,
                                     double rho = 0.2, double tol = 1e-9) {
  NoiseSpec spec{kind, gamma, rho, kPluginSeed};
  const int n = static_cast<int>(std::ceil(static_cast<double>(plugin_p) / gamma));
  Vector s = noise_spectrum(spec, n, plugin_p);
  return PluginModel(AtomicCDF(std::vector<double>(s.data(), s.data() + s.size())), gamma, tol);
}

struct R0R1Row {
  double x = 0.0;
  double r0 = 0.0;
  std::optional<double> r1;  // only above the transition
};

inline std::vector<R0R1Row> compute_r0_r1(std::span<const double> x_grid,
                                          const PluginModel& model) {
  std::vector<R0R1Row> rows;
  rows.reserve(x_grid.size());
  for (double x : x_grid) {
    R0R1Row row{x, PluginModel::r0(x), std::nullopt};
    if (model.above_transition(x)) row.r1 = model.r1(x);
    rows.push_back(row);
  }
  return rows;
}

namespace detail {

inline void run_parallel(int jobs, int threads, const std::function<void(int)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = std::max(1, std::min(threads, jobs));
  if (threads == 1) {
    for (int i = 0; i < jobs; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < jobs && !failed.load(); i = next.fetch_add(1)) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          failed.store(true);
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

class CsvWriter {
 public:
  CsvWriter(const std::string& path, std::vector<std::string> columns) : out_(path) {
    if (!out_) throw IoError("cannot write '" + path + "'");
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (i) out_ << ',';
      out_ << columns[i];
    }
    out_ << '\n';
    width_ = columns.size();
  }

  /// Cells: already formatted strings; empty string = empty cell.
  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw ConstraintError("CsvWriter: row width mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

 private:
  std::ofstream out_;
  std::size_t width_;
};

inline std::string fmt(double v) { return io::format_double(v); }
inline std::string fmt(int v) { return std::to_string(v); }

inline std::string gamma_token(double gamma) {
  std::string s = io::format_double(gamma);
  return s;
}

inline double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return (v.size() % 2) ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

/// Least-squares slope of log(y) against log(x).
inline double log_log_slope(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = xs.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline bool has_strategy(const ExperimentConfig& cfg, Strategy s) {
  return std::find(cfg.strategies.begin(), cfg.strategies.end(), s) != cfg.strategies.end();
}

}  // namespace detail

/// Midpoints between consecutive distinct spectrum values, plus endpoints
/// below and above: exactly one threshold per piecewise-constant loss level.
inline std::vector<double> threshold_grid(const Vector& spectrum) {
  std::vector<double> grid;
  grid.reserve(spectrum.size() + 2);
  grid.push_back(spectrum(spectrum.size() - 1) * 0.5);
  for (Eigen::Index i = spectrum.size() - 1; i > 0; --i) {
    if (spectrum(i) < spectrum(i - 1)) grid.push_back(0.5 * (spectrum(i) + spectrum(i - 1)));
  }
  grid.push_back(1.1 * spectrum(0));
  return grid;
}

// --------------------------------------------------------------------------
// per-replicate work shared by the Monte-Carlo experiments

namespace detail {

struct Replicate {
  SvdTriple svd_y;
  SignalSample signal;
  DenoiseReport oracle_rep;
  Vector spectrum_only;  // filled when vectors are not needed
};

/// Draw signal and noise from per-replicate derived streams and assemble Y.
/// `need_vectors` controls whether a full SVD (for oracle bookkeeping) or
/// just the spectrum is computed.
inline Replicate make_replicate(const ExperimentConfig& cfg, std::span<const double> spikes,
                                int n, int p, std::uint64_t rep_seed, bool need_vectors) {
  SplitMix64 seeder(rep_seed);
  SignalSpec sig{std::vector<double>(spikes.begin(), spikes.end()), seeder.next_u64()};
  NoiseSpec noise = cfg.noise;
  noise.seed = seeder.next_u64();

  Replicate rep;
  rep.signal = gen_signal(sig, n, p);
  if (!need_vectors && spikes.empty()) {
    rep.spectrum_only = noise_spectrum(noise, n, p);
    return rep;
  }
  Matrix y = gen_noise(noise, n, p);
  if (!spikes.empty()) y += rep.signal.materialize();
  if (need_vectors) {
    rep.svd_y = svd(y);
    rep.oracle_rep = oracle_low_rank(rep.signal.spikes, rep.signal.left, rep.signal.right,
                                     rep.svd_y);
  } else {
    rep.spectrum_only = singular_values(y);
  }
  return rep;
}

inline std::vector<double> to_vec(const Vector& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace detail

// --------------------------------------------------------------------------
// the experiments

struct ExperimentOutput {
  std::string csv_path;
  std::string meta_path;
  std::optional<std::string> svg_path;
  nlohmann::json meta;  // quantities recorded alongside the table
};

namespace detail {

inline ExperimentOutput open_output(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  const std::string stem = std::string(experiment_name(cfg.experiment)) + "_" +
                           noise_kind_name(cfg.noise.kind) + "_" + gamma_token(cfg.noise.gamma);
  ExperimentOutput out;
  out.csv_path = (fs::path(cfg.out_dir) / (stem + ".csv")).string();
  out.meta_path = (fs::path(cfg.out_dir) / (stem + "_meta.json")).string();
  if (cfg.svg) out.svg_path = (fs::path(cfg.out_dir) / (stem + ".svg")).string();
  return out;
}

inline void write_meta(ExperimentOutput& out, const ExperimentConfig& cfg) {
  out.meta["experiment"] = experiment_name(cfg.experiment);
  out.meta["noise"] = noise_kind_name(cfg.noise.kind);
  out.meta["gamma"] = cfg.noise.gamma;
  out.meta["k"] = cfg.k;
  out.meta["seed"] = cfg.seed;
  out.meta["replicates"] = cfg.replicates;
  out.meta["plugin_p"] = cfg.plugin_p;
  out.meta["plugin_seed"] = kPluginSeed;
  out.meta["rng"] = "splitmix64 + marsaglia-polar";
  // Timestamps live only here so the CSVs stay byte-identical across reruns.
  out.meta["written_at_unix"] =
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();
  std::ofstream m(out.meta_path);
  if (!m) throw IoError("cannot write '" + out.meta_path + "'");
  m << out.meta.dump(2) << '\n';
}

inline std::vector<double> default_spikes(const ExperimentConfig& cfg) {
  if (!cfg.signal.spikes.empty()) return cfg.signal.spikes;
  return {5.2, 2.5, 1.3, 1.0, 0.5};
}

}  // namespace detail

inline ExperimentOutput run_hist(const ExperimentConfig& cfg) {
  PluginModel model = make_plugin_model(cfg.noise.kind, cfg.noise.gamma, cfg.plugin_p,
                                        cfg.noise.rho, cfg.tol);
  ExperimentOutput out = detail::open_output(cfg);

  const auto& atoms = model.spectrum().atoms();
  const int bins = 100;
  const double hi = atoms.front() * 1.02;
  std::vector<int> counts(bins, 0);
  for (double a : atoms) {
    int b = std::min(bins - 1, static_cast<int>(a / hi * bins));
    ++counts[b];
  }
  detail::CsvWriter csv(out.csv_path, {"bin_lo", "bin_hi", "count"});
  for (int b = 0; b < bins; ++b)
    csv.row({detail::fmt(b * hi / bins), detail::fmt((b + 1) * hi / bins),
             detail::fmt(counts[b])});

  if (out.svg_path) {
    std::vector<double> xs(bins), ys(bins);
    for (int b = 0; b < bins; ++b) {
      xs[b] = (b + 0.5) * hi / bins;
      ys[b] = counts[b];
    }
    svg::LineChart chart("singular value histogram", "singular value", "count");
    chart.add_series("count", xs, ys);
    chart.write(*out.svg_path);
  }
  out.meta["z_plus"] = model.bulk_edge();
  out.meta["t_gamma"] = model.threshold();
  out.meta["x_plus"] = model.transition();
  out.meta["x_star"] = model.crossing_spike();
  detail::write_meta(out, cfg);
  return out;
}

inline ExperimentOutput run_r0_vs_r1(const ExperimentConfig& cfg) {
  PluginModel model = make_plugin_model(cfg.noise.kind, cfg.noise.gamma, cfg.plugin_p,
                                        cfg.noise.rho, cfg.tol);
  ExperimentOutput out = detail::open_output(cfg);

  const double x_star = model.crossing_spike();
  std::vector<double> grid;
  const double lo = std::max(0.02, 0.15 * x_star), hi = 2.5 * x_star;
  for (int i = 0; i < 200; ++i) grid.push_back(lo + (hi - lo) * i / 199.0);
  grid.push_back(x_star);
  std::sort(grid.begin(), grid.end());

  const auto rows = compute_r0_r1(grid, model);
  detail::CsvWriter csv(out.csv_path, {"x", "r0", "r1", "x_star"});
  for (const auto& r : rows)
    csv.row({detail::fmt(r.x), detail::fmt(r.r0), r.r1 ? detail::fmt(*r.r1) : "",
             detail::fmt(x_star)});

  if (out.svg_path) {
    std::vector<double> xs, r0s, xs1, r1s;
    for (const auto& r : rows) {
      xs.push_back(r.x);
      r0s.push_back(r.r0);
      if (r.r1) {
        xs1.push_back(r.x);
        r1s.push_back(*r.r1);
      }
    }
    svg::LineChart chart("spike loss curves", "spike strength x", "loss");
    chart.add_series("R0", xs, r0s);
    chart.add_series("R1", xs1, r1s);
    chart.add_vline("x*", x_star);
    chart.write(*out.svg_path);
  }
  out.meta["z_plus"] = model.bulk_edge();
  out.meta["t_gamma"] = model.threshold();
  out.meta["x_plus"] = model.transition();
  out.meta["x_star"] = x_star;
  detail::write_meta(out, cfg);
  return out;
}

inline ExperimentOutput run_se_vs_ase(const ExperimentConfig& cfg) {
  PluginModel model = make_plugin_model(cfg.noise.kind, cfg.noise.gamma, cfg.plugin_p,
                                        cfg.noise.rho, cfg.tol);
  ExperimentOutput out = detail::open_output(cfg);

  const std::vector<double> spikes = detail::default_spikes(cfg);
  const int p = cfg.p_list.front();
  const int n = cfg.n_for(p);
  detail::Replicate rep =
      detail::make_replicate(cfg, spikes, n, p, derive_seed(cfg.seed, 0), true);

  Matrix x = rep.signal.materialize();
  const std::vector<double> levels = threshold_loss_levels(x, rep.svd_y);
  const Vector& y = rep.svd_y.s;

  detail::CsvWriter csv(out.csv_path, {"theta", "se_n", "ase"});
  std::vector<double> plot_theta, plot_se, plot_ase_theta, plot_ase;
  for (double theta : threshold_grid(y)) {
    const int kept = static_cast<int>(
        std::count_if(y.data(), y.data() + y.size(), [&](double v) { return v > theta; }));
    std::string ase_cell;
    if (theta > model.bulk_edge()) {
      const double a = model.ase(spikes, theta);
      ase_cell = detail::fmt(a);
      plot_theta.push_back(theta);
      plot_se.push_back(levels[kept]);
      plot_ase_theta.push_back(theta);
      plot_ase.push_back(a);
    }
    csv.row({detail::fmt(theta), detail::fmt(levels[kept]), ase_cell});
  }

  if (out.svg_path) {
    svg::LineChart chart("empirical vs asymptotic loss", "threshold", "squared error");
    chart.add_series("SE_n", plot_theta, plot_se);
    chart.add_series("ASE", plot_ase_theta, plot_ase);
    chart.add_vline("T", model.threshold());
    chart.write(*out.svg_path);
  }

  for (Strategy s : cfg.strategies) {
    ThresholdResult t = screenot(detail::to_vec(y), n, p, cfg.k, s, cfg.tol);
    out.meta[std::string("theta_hat_") + strategy_name(s)] = t.theta_hat;
  }
  out.meta["z_plus"] = model.bulk_edge();
  out.meta["t_gamma"] = model.threshold();
  out.meta["ase_star"] = model.ase_star(spikes);
  out.meta["p"] = p;
  out.meta["n"] = n;
  detail::write_meta(out, cfg);
  return out;
}

namespace detail {

struct AttainmentRow {
  int p = 0, replicate = 0;
  double se_star = 0.0;
  double theta[4] = {0, 0, 0, 0};   // ref, zero, winsorize, impute
  double se[4] = {0, 0, 0, 0};
  bool attained[4] = {false, false, false, false};
  bool enabled[4] = {true, false, false, false};
};

/// Thresholds indexed ref=0, zero=1, winsorize=2, impute=3.
inline int strategy_slot(Strategy s) {
  switch (s) {
    case Strategy::TransportToZero: return 1;
    case Strategy::Winsorize: return 2;
    case Strategy::Impute: return 3;
  }
  return -1;
}

}  // namespace detail

inline ExperimentOutput run_oracle_attainment(const ExperimentConfig& cfg) {
  PluginModel model = make_plugin_model(cfg.noise.kind, cfg.noise.gamma, cfg.plugin_p,
                                        cfg.noise.rho, cfg.tol);
  ExperimentOutput out = detail::open_output(cfg);
  const std::vector<double> spikes = detail::default_spikes(cfg);

  const int T = cfg.replicates;
  const int jobs = static_cast<int>(cfg.p_list.size()) * T;
  std::vector<detail::AttainmentRow> rows(jobs);

  detail::run_parallel(jobs, cfg.threads, [&](int job) {
    const int pi = job / T, t = job % T;
    const int p = cfg.p_list[pi];
    const int n = cfg.n_for(p);
    detail::Replicate rep = detail::make_replicate(
        cfg, spikes, n, p, derive_seed(cfg.seed, static_cast<std::uint64_t>(job)), true);
    const std::vector<double> levels = threshold_loss_levels_low_rank(
        rep.signal.spikes, rep.signal.left, rep.signal.right, rep.svd_y);

    detail::AttainmentRow row;
    row.p = p;
    row.replicate = t;
    row.se_star = rep.oracle_rep.oracle_se;
    auto eval = [&](int slot, double theta) {
      const int kept = static_cast<int>(std::count_if(
          rep.svd_y.s.data(), rep.svd_y.s.data() + rep.svd_y.s.size(),
          [&](double v) { return v > theta; }));
      row.theta[slot] = theta;
      row.se[slot] = levels[kept];
      row.attained[slot] = interval_contains(rep.oracle_rep, theta);
      row.enabled[slot] = true;
    };
    eval(0, model.threshold());
    for (Strategy s : cfg.strategies) {
      ThresholdResult th = screenot(detail::to_vec(rep.svd_y.s), n, p, cfg.k, s, cfg.tol);
      eval(detail::strategy_slot(s), th.theta_hat);
    }
    rows[job] = row;
  });

  detail::CsvWriter csv(out.csv_path,
                        {"row", "p", "replicate", "se_star", "theta_ref", "theta_zero",
                         "theta_winsorize", "theta_impute", "se_ref", "se_zero", "se_winsorize",
                         "se_impute", "attain_ref", "attain_zero", "attain_winsorize",
                         "attain_impute"});
  auto cell = [](bool enabled, double v) { return enabled ? detail::fmt(v) : std::string(); };
  for (const auto& r : rows) {
    std::vector<std::string> cells{"rep", detail::fmt(r.p), detail::fmt(r.replicate),
                                   detail::fmt(r.se_star)};
    for (int s = 0; s < 4; ++s) cells.push_back(cell(r.enabled[s], r.theta[s]));
    for (int s = 0; s < 4; ++s) cells.push_back(cell(r.enabled[s], r.se[s]));
    for (int s = 0; s < 4; ++s)
      cells.push_back(r.enabled[s] ? (r.attained[s] ? "1" : "0") : std::string());
    csv.row(cells);
  }
  std::vector<double> agg_p, agg_impute;
  for (std::size_t pi = 0; pi < cfg.p_list.size(); ++pi) {
    double frac[4] = {0, 0, 0, 0};
    for (int t = 0; t < T; ++t) {
      const auto& r = rows[pi * T + t];
      for (int s = 0; s < 4; ++s) frac[s] += r.attained[s] ? 1.0 : 0.0;
    }
    std::vector<std::string> cells{"agg", detail::fmt(cfg.p_list[pi]), "", ""};
    for (int s = 0; s < 4; ++s) cells.push_back("");
    for (int s = 0; s < 4; ++s) cells.push_back("");
    for (int s = 0; s < 4; ++s)
      cells.push_back(rows[pi * T].enabled[s] ? detail::fmt(frac[s] / T) : std::string());
    csv.row(cells);
    agg_p.push_back(cfg.p_list[pi]);
    agg_impute.push_back(frac[3] / T);
  }

  if (out.svg_path && rows.front().enabled[3]) {
    svg::LineChart chart("oracle attainment", "p", "fraction attaining oracle loss");
    chart.add_series("impute", agg_p, agg_impute);
    chart.write(*out.svg_path);
  }
  if (rows.front().enabled[3]) {
    nlohmann::json fr = nlohmann::json::array();
    for (std::size_t i = 0; i < agg_p.size(); ++i) fr.push_back({agg_p[i], agg_impute[i]});
    out.meta["impute_attainment"] = fr;
  }
  out.meta["t_gamma"] = model.threshold();
  out.meta["z_plus"] = model.bulk_edge();
  detail::write_meta(out, cfg);
  return out;
}

inline ExperimentOutput run_regret(const ExperimentConfig& cfg) {
  PluginModel model = make_plugin_model(cfg.noise.kind, cfg.noise.gamma, cfg.plugin_p,
                                        cfg.noise.rho, cfg.tol);
  ExperimentOutput out = detail::open_output(cfg);

  // Single-spike sweep. The grid comes from the config when supplied
  // (descending spikes), otherwise brackets the crossing point.
  std::vector<double> x_grid = cfg.signal.spikes;
  if (x_grid.empty()) {
    const double xs = model.crossing_spike();
    for (int i = 0; i < 25; ++i) x_grid.push_back(0.3 * xs + (2.7 - 0.3) * xs * i / 24.0);
  }
  std::sort(x_grid.begin(), x_grid.end());

  const int p = cfg.p_list.front();
  const int n = cfg.n_for(p);
  const int T = cfg.replicates;
  const int jobs = static_cast<int>(x_grid.size()) * T;

  struct Cell {
    double ratio[4] = {0, 0, 0, 0};
    bool enabled[4] = {true, false, false, false};
  };
  std::vector<Cell> cells(jobs);

  detail::run_parallel(jobs, cfg.threads, [&](int job) {
    const int xi = job / T;
    const std::vector<double> spike{x_grid[xi]};
    detail::Replicate rep = detail::make_replicate(
        cfg, spike, n, p, derive_seed(cfg.seed, static_cast<std::uint64_t>(job)), true);
    const std::vector<double> levels = threshold_loss_levels_low_rank(
        rep.signal.spikes, rep.signal.left, rep.signal.right, rep.svd_y);
    Cell c;
    auto eval = [&](int slot, double theta) {
      const int kept = static_cast<int>(std::count_if(
          rep.svd_y.s.data(), rep.svd_y.s.data() + rep.svd_y.s.size(),
          [&](double v) { return v > theta; }));
      c.ratio[slot] = levels[kept] / rep.oracle_rep.oracle_se;
      c.enabled[slot] = true;
    };
    eval(0, model.threshold());
    for (Strategy s : cfg.strategies) {
      ThresholdResult th =
          screenot(detail::to_vec(rep.svd_y.s), n, p, cfg.k, s, cfg.tol);
      eval(detail::strategy_slot(s), th.theta_hat);
    }
    cells[job] = c;
  });

  detail::CsvWriter csv(out.csv_path, {"row", "x", "replicate", "ratio_ref", "ratio_zero",
                                       "ratio_winsorize", "ratio_impute"});
  for (std::size_t xi = 0; xi < x_grid.size(); ++xi)
    for (int t = 0; t < T; ++t) {
      const Cell& c = cells[xi * T + t];
      std::vector<std::string> row{"rep", detail::fmt(x_grid[xi]), detail::fmt(t)};
      for (int s = 0; s < 4; ++s)
        row.push_back(c.enabled[s] ? detail::fmt(c.ratio[s]) : std::string());
      csv.row(row);
    }
  std::vector<double> mean_imp;
  for (std::size_t xi = 0; xi < x_grid.size(); ++xi) {
    double mean[4] = {0, 0, 0, 0};
    for (int t = 0; t < T; ++t)
      for (int s = 0; s < 4; ++s) mean[s] += cells[xi * T + t].ratio[s] / T;
    std::vector<std::string> row{"agg", detail::fmt(x_grid[xi]), ""};
    for (int s = 0; s < 4; ++s)
      row.push_back(cells[xi * T].enabled[s] ? detail::fmt(mean[s]) : std::string());
    csv.row(row);
    mean_imp.push_back(mean[3]);
  }

  if (out.svg_path) {
    svg::LineChart chart("regret", "spike strength x", "SE / SE*");
    chart.add_series("impute", x_grid, mean_imp);
    chart.add_vline("x*", model.crossing_spike());
    chart.write(*out.svg_path);
  }
  out.meta["t_gamma"] = model.threshold();
  out.meta["x_star"] = model.crossing_spike();
  out.meta["p"] = p;
  detail::write_meta(out, cfg);
  return out;
}

inline ExperimentOutput run_convergence_rate(const ExperimentConfig& cfg) {
  PluginModel model = make_plugin_model(cfg.noise.kind, cfg.noise.gamma, cfg.plugin_p,
                                        cfg.noise.rho, cfg.tol);
  ExperimentOutput out = detail::open_output(cfg);

  std::vector<double> spikes = cfg.signal.spikes;
  if (spikes.empty()) {
    for (int i = 10; i >= 1; --i) spikes.push_back(static_cast<double>(i));
  }

  const int T = cfg.replicates;
  const int jobs = static_cast<int>(cfg.p_list.size()) * T;
  struct Errs {
    double err[4] = {0, 0, 0, 0};
    bool enabled[4] = {false, false, false, false};
  };
  std::vector<Errs> cells(jobs);
  const double t_ref = model.threshold();

  detail::run_parallel(jobs, cfg.threads, [&](int job) {
    const int pi = job / T;
    const int p = cfg.p_list[pi];
    const int n = cfg.n_for(p);
    detail::Replicate rep = detail::make_replicate(
        cfg, spikes, n, p, derive_seed(cfg.seed, static_cast<std::uint64_t>(job)), false);
    Errs e;
    for (Strategy s : cfg.strategies) {
      ThresholdResult th =
          screenot(detail::to_vec(rep.spectrum_only), n, p, cfg.k, s, cfg.tol);
      const int slot = detail::strategy_slot(s);
      e.err[slot] = std::abs(th.theta_hat - t_ref) / t_ref;
      e.enabled[slot] = true;
    }
    cells[job] = e;
  });

  detail::CsvWriter csv(out.csv_path,
                        {"row", "p", "replicate", "err_zero", "err_winsorize", "err_impute"});
  for (std::size_t pi = 0; pi < cfg.p_list.size(); ++pi)
    for (int t = 0; t < T; ++t) {
      const Errs& e = cells[pi * T + t];
      std::vector<std::string> row{"rep", detail::fmt(cfg.p_list[pi]), detail::fmt(t)};
      for (int s = 1; s < 4; ++s)
        row.push_back(e.enabled[s] ? detail::fmt(e.err[s]) : std::string());
      csv.row(row);
    }

  std::vector<double> ps, med_impute;
  for (std::size_t pi = 0; pi < cfg.p_list.size(); ++pi) {
    std::vector<std::string> row{"agg", detail::fmt(cfg.p_list[pi]), ""};
    for (int s = 1; s < 4; ++s) {
      if (!cells[pi * T].enabled[s]) {
        row.push_back("");
        continue;
      }
      std::vector<double> errs;
      for (int t = 0; t < T; ++t) errs.push_back(cells[pi * T + t].err[s]);
      const double med = detail::median_of(std::move(errs));
      row.push_back(detail::fmt(med));
      if (s == 3) {
        ps.push_back(cfg.p_list[pi]);
        med_impute.push_back(med);
      }
    }
    csv.row(row);
  }

  if (ps.size() >= 2) out.meta["impute_log_log_slope"] = detail::log_log_slope(ps, med_impute);
  {
    nlohmann::json med = nlohmann::json::array();
    for (std::size_t i = 0; i < ps.size(); ++i) med.push_back({ps[i], med_impute[i]});
    out.meta["impute_medians"] = med;
  }
  out.meta["t_gamma"] = t_ref;
  detail::write_meta(out, cfg);

  if (out.svg_path && !ps.empty()) {
    std::vector<double> lx(ps.size()), ly(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
      lx[i] = std::log10(ps[i]);
      ly[i] = std::log10(med_impute[i]);
    }
    svg::LineChart chart("convergence of the adaptive threshold", "log10 p",
                         "log10 median relative error");
    chart.add_series("impute", lx, ly);
    chart.write(*out.svg_path);
  }
  return out;
}

inline ExperimentOutput run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  switch (cfg.experiment) {
    case Experiment::Hist: return run_hist(cfg);
    case Experiment::R0vsR1: return run_r0_vs_r1(cfg);
    case Experiment::SEvsASE: return run_se_vs_ase(cfg);
    case Experiment::OracleAttainment: return run_oracle_attainment(cfg);
    case Experiment::Regret: return run_regret(cfg);
    case Experiment::ConvergenceRate: return run_convergence_rate(cfg);
  }
  throw ConstraintError("run_experiment: unknown experiment");
}

}  // namespace screenot
