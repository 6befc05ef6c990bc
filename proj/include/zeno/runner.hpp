#pragma once

// Batch experiments: each writes <experiment>.csv and summary.txt into the
// configured output directory.

#include "zeno/analysis.hpp"
#include "zeno/config.hpp"
#include "zeno/csv.hpp"
#include "zeno/ensemble.hpp"
#include "zeno/master_equation.hpp"
#include "zeno/noise.hpp"
#include "zeno/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace zeno {

/// Column layouts, fixed per experiment.
namespace schema {
inline const std::vector<std::string> decay_curve = {"t",    "p00",   "p11",     "re01",
                                                     "im01", "abs01", "fidelity"};
inline const std::vector<std::string> crossover = {"t", "abs01", "abs01_stderr", "abs01_exact"};
inline const std::vector<std::string> selective = {"t", "N", "P_analytic", "P_mc", "P_mc_stderr"};
inline const std::vector<std::string> nonselective = {"t", "N", "abs01", "ratio"};
inline const std::vector<std::string> validation = {"check", "t",      "N",
                                                    "analytic", "mc", "stderr",
                                                    "deviation_sigma"};
inline const std::vector<std::string> trajectory = {"t", "f"};
}  // namespace schema

/// Ordered key/value lines for summary.txt.
class Summary {
 public:
  void add(const std::string& key, double value) { lines_.emplace_back(key, format_double(value)); }
  void add(const std::string& key, const std::string& value) { lines_.emplace_back(key, value); }

  void write(std::ostream& out) const {
    for (const auto& [key, value] : lines_) out << key << " = " << value << '\n';
  }
  const std::vector<std::pair<std::string, std::string>>& lines() const { return lines_; }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
};

struct RunOutcome {
  int exit_status = 0;
  std::vector<std::string> files;
  Summary summary;
};

namespace detail {

inline Cell cell(double v) { return v; }
inline Cell cell(int v) { return static_cast<long long>(v); }
inline Cell cell(std::optional<double> v) { return v ? Cell(*v) : Cell(std::monostate{}); }

inline std::vector<double> linspace(double a, double b, int n) {
  if (n == 1) return {a};
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(a + (b - a) * i / (n - 1));
  return out;
}

inline double deviation_sigma(double analytic, double mc, double stderr_value) {
  const double diff = std::abs(mc - analytic);
  if (diff == 0.0) return 0.0;
  return stderr_value > 0.0 ? diff / stderr_value : std::numeric_limits<double>::infinity();
}

inline Table decay_curve(const ExperimentConfig& c, Summary& s) {
  const DecoherenceParams p = c.params();
  const DensityMatrix rho0 = DensityMatrix::pure(plus_state());
  Table table{schema::decay_curve, {}};
  const int intervals = c.samples - 1;

  std::vector<double> times;
  std::vector<DensityMatrix> states;  // interaction picture
  double rk4_vs_closed = 0.0;
  if (c.t_end == 0.0) {
    times = {0.0};
    states = {rho0};
  } else if (c.method == DecayMethod::ClosedForm) {
    times = linspace(0.0, c.t_end, c.samples);
    for (double t : times) states.push_back(closed_form_rho_interaction(p, t));
  } else {
    double base = c.dt;
    if (base == 0.0) base = std::min({p.t1(), p.t2(), c.t_end}) / 1000.0;
    const auto substeps = static_cast<std::size_t>(std::ceil(c.t_end / intervals / base - 1e-9));
    const double h = c.t_end / (static_cast<double>(intervals) * substeps);
    const IntegrationResult path = integrate(rho0, p, c.t_end, h);
    for (std::size_t i = 0; i < path.times.size(); i += substeps) {
      times.push_back(path.times[i]);
      states.push_back(path.states[i]);
      rk4_vs_closed = std::max(rk4_vs_closed, max_abs(path.states[i].matrix() -
                                                      closed_form_rho_interaction(p, path.times[i]).matrix()));
    }
    s.add("rk4_step_ns", h);
    s.add("max_abs_rk4_minus_closed_form", rk4_vs_closed);
  }

  for (std::size_t i = 0; i < times.size(); ++i) {
    const DensityMatrix lab = to_lab_frame(states[i], p.hs, times[i]);
    const Matrix2& m = lab.matrix();
    table.add_row({cell(times[i]), cell(m(0, 0).real()), cell(m(1, 1).real()), cell(m(0, 1).real()),
                   cell(m(0, 1).imag()), cell(std::abs(m(0, 1))),
                   cell(dynamical_fidelity(lab, plus_state(), p.hs, times[i]))});
  }
  const DensityMatrix last = to_lab_frame(states.back(), p.hs, times.back());
  s.add("t_end_ns", times.back());
  s.add("final_fidelity", dynamical_fidelity(last, plus_state(), p.hs, times.back()));
  s.add("final_excited_population", last(1, 1).real());
  s.add("final_abs01", last.coherence());
  return table;
}

inline Table crossover_scan(const ExperimentConfig& c, Summary& s,
                            std::vector<std::pair<std::string, Table>>& extra) {
  const NoiseModel model = NoiseModel::ornstein_uhlenbeck(c.lambda, c.tau_c);
  const double split = c.tau_c / 10.0;
  const std::vector<double> grid = two_scale_grid(split, c.tau_c / 1000.0, c.t_end, c.tau_c / 10.0);
  const EnsembleResult ens =
      ensemble_average(plus_state(), model, grid, c.trajectories, c.seed, c.worker_count());

  Table table{schema::crossover, {}};
  std::vector<double> short_t, short_c, long_t, long_log;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double exact = 0.5 * gaussian_phase_average(c.lambda, ou_integral_variance(c.tau_c, grid[i]));
    table.add_row({cell(grid[i]), cell(ens.coherence(i)), cell(ens.coherence_stderr(i)), cell(exact)});
    if (grid[i] > 0.0 && grid[i] <= split * (1 + 1e-12)) {
      short_t.push_back(grid[i]);
      short_c.push_back(ens.coherence(i));
    }
    if (grid[i] >= 20.0 * c.tau_c - 1e-9) {
      long_t.push_back(grid[i]);
      long_log.push_back(std::log(ens.coherence(i)));
    }
  }
  s.add("trajectories", static_cast<double>(c.trajectories));
  s.add("predicted_long_time_slope", -4.0 * c.lambda * c.lambda * c.tau_c);
  if (c.lambda > 0.0 && short_t.size() >= 2) {
    s.add("short_time_exponent", decay_exponent(short_t, short_c, 0.5));
  }
  if (c.lambda > 0.0 && long_t.size() >= 2) {
    std::vector<double> long_c;
    for (double v : long_log) long_c.push_back(std::exp(v));
    s.add("long_time_slope", fit_line(long_t, long_log).slope);
    s.add("long_time_exponent", decay_exponent(long_t, long_c, 0.5));
  }

  for (int j = 0; j < c.dump_trajectories; ++j) {
    RandomStream stream(c.seed, static_cast<std::uint64_t>(j), StreamPurpose::Noise);
    const Trajectory traj = sample_ou(model, grid, stream);
    Table dump{schema::trajectory, {}};
    for (std::size_t i = 0; i < grid.size(); ++i) dump.add_row({cell(grid[i]), cell(traj.values[i])});
    extra.emplace_back("trajectory_" + std::to_string(j) + ".csv", std::move(dump));
  }
  return table;
}

inline std::optional<MonteCarloEngine> engine_for(const ExperimentConfig& c, bool enabled) {
  if (!enabled) return std::nullopt;
  return MonteCarloEngine{c.trajectories, c.seed, c.worker_count()};
}

inline Table figure2(const ExperimentConfig& c, Summary& s) {
  const DecoherenceParams p = c.params();
  const auto rows = figure2_sweep(p, c.times, c.n_max, engine_for(c, c.monte_carlo), c.noise_reset);
  Table table{schema::selective, {}};
  bool monotone = true;
  double worst_sigma = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    table.add_row({cell(r.t), cell(r.n), cell(r.p_analytic), cell(r.p_mc), cell(r.p_mc_stderr)});
    if (r.n > 1 && r.p_analytic < rows[i - 1].p_analytic) monotone = false;
    if (r.p_mc) worst_sigma = std::max(worst_sigma, deviation_sigma(r.p_analytic, *r.p_mc, *r.p_mc_stderr));
    if (r.n == 1) s.add("P_analytic(t=" + format_double(r.t) + ",N=1)", r.p_analytic);
    if (r.n == c.n_max) s.add("P_analytic(t=" + format_double(r.t) + ",N=" + std::to_string(r.n) + ")", r.p_analytic);
  }
  s.add("monotone_in_N", monotone ? "yes" : "no");
  if (c.monte_carlo) s.add("max_mc_deviation_sigma", worst_sigma);
  return table;
}

inline Table nonselective_table(const DecoherenceParams& p, std::span<const double> times,
                                std::span<const int> counts, Summary& s) {
  const auto rows = figure3_surface(p, times, counts);
  Table table{schema::nonselective, {}};
  for (const auto& r : rows) table.add_row({cell(r.t), cell(r.n), cell(r.abs01), cell(r.ratio)});
  const int n_lo = *std::min_element(counts.begin(), counts.end());
  const int n_hi = *std::max_element(counts.begin(), counts.end());
  double best_uplift = 1.0;
  for (double t : times) {
    const double uplift = coherence_ratio(p, t, n_hi) / coherence_ratio(p, t, n_lo);
    best_uplift = std::max(best_uplift, uplift);
    s.add("abs01(t=" + format_double(t) + ",N=" + std::to_string(n_hi) + ")",
          nonselective_rho_interaction(p, t, n_hi).coherence());
  }
  s.add("max_ratio_uplift(N=" + std::to_string(n_hi) + "/N=" + std::to_string(n_lo) + ")", best_uplift);
  return table;
}

inline RunOutcome validate_mc(const ExperimentConfig& c, Table& table) {
  RunOutcome out;
  Summary& s = out.summary;
  const DecoherenceParams p = c.params();
  table = Table{schema::validation, {}};
  double worst = 0.0;
  int over = 0;
  auto record = [&](const char* check, double t, std::optional<int> n, double analytic, double mc,
                    double err) {
    const double dev = deviation_sigma(analytic, mc, err);
    worst = std::max(worst, dev);
    if (dev > 3.0) ++over;
    table.add_row({std::string(check), cell(t), n ? cell(*n) : Cell(std::monostate{}), cell(analytic),
                   cell(mc), cell(err), cell(dev)});
  };

  const MonteCarloEngine mc{c.trajectories, c.seed, c.worker_count()};
  for (const auto& r : figure2_sweep(p, c.times, c.n_max, mc, c.noise_reset)) {
    record("selective", r.t, r.n, r.p_analytic, *r.p_mc, *r.p_mc_stderr);
  }

  // Quasi-static ensemble against exp(-(G2 t)^2).
  if (p.gamma2 > 0.0) {
    const NoiseModel qs = NoiseModel::quasi_static(p.gamma2 / std::sqrt(2.0));
    const std::vector<double> grid = linspace(0.0, 2.0 * p.t2(), 21);
    const EnsembleResult ens = ensemble_average(plus_state(), qs, grid, c.trajectories,
                                                c.seed ^ 0xD1B54A32D192ED03ull, c.worker_count());
    for (std::size_t i = 1; i < grid.size(); ++i) {
      record("gaussian_decay", grid[i], std::nullopt, 0.5 * pure_dephasing_coherence(p.gamma2, grid[i]),
             ens.coherence(i), ens.coherence_stderr(i));
    }
  }

  // Non-selective engine against the closed form.
  for (double t : c.times) {
    for (int n : {1, c.n_max}) {
      ProtocolConfig cfg;
      cfg.total_time = t;
      cfg.measurements = n;
      cfg.kind = ProtocolKind::NonSelective;
      cfg.noise_reset = c.noise_reset;
      cfg.engine = MonteCarloEngine{c.trajectories, c.seed + static_cast<std::uint64_t>(n), c.worker_count()};
      const ProtocolResult r = nonselective_run_mc(p, cfg);
      record("nonselective", t, n, nonselective_rho_interaction(p, t, n).coherence(), r.coherence,
             r.coherence_stderr);
      if (n == 1 && c.n_max == 1) break;
    }
  }

  s.add("checks", static_cast<double>(table.rows.size()));
  s.add("max_deviation_sigma", worst);
  s.add("checks_over_3_sigma", static_cast<double>(over));
  s.add("verdict", over == 0 ? "pass" : "fail");
  out.exit_status = over == 0 ? 0 : 3;
  return out;
}

}  // namespace detail

/// Runs one experiment and writes its artifacts. Engine and I/O errors
/// propagate as exceptions; a failed Monte Carlo validation returns a
/// nonzero exit status.
inline RunOutcome run(const ExperimentConfig& c, std::ostream& log) {
  validate_config(c);
  for (const auto& w : c.warnings) log << "warning: " << w << '\n';
  if (c.experiment != Experiment::CrossoverScan && !c.params().hs.delta_negligible()) {
    log << "warning: delta/epsilon > 0.1; the commuting-noise decoherence model ignores delta\n";
  }

  RunOutcome out;
  Table table;
  std::vector<std::pair<std::string, Table>> extra;
  out.summary.add("experiment", to_string(c.experiment));
  switch (c.experiment) {
    case Experiment::DecayCurve:
      table = detail::decay_curve(c, out.summary);
      break;
    case Experiment::CrossoverScan:
      table = detail::crossover_scan(c, out.summary, extra);
      break;
    case Experiment::Figure2:
      table = detail::figure2(c, out.summary);
      break;
    case Experiment::Figure3: {
      const auto ts = detail::linspace(c.t_start, c.t_end, c.t_points);
      table = detail::nonselective_table(c.params(), ts, c.n_values, out.summary);
      break;
    }
    case Experiment::RatioPlot: {
      std::vector<int> counts;
      for (int n = 1; n <= c.n_max; ++n) counts.push_back(n);
      table = detail::nonselective_table(c.params(), c.times, counts, out.summary);
      break;
    }
    case Experiment::McValidate: {
      RunOutcome v = detail::validate_mc(c, table);
      for (const auto& [k, val] : v.summary.lines()) out.summary.add(k, val);
      out.exit_status = v.exit_status;
      break;
    }
  }

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(c.output_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + c.output_dir + "': " + ec.message());
  const fs::path dir(c.output_dir);
  const std::string csv_path = (dir / (std::string(to_string(c.experiment)) + ".csv")).string();
  emit_csv(table, csv_path);
  out.files.push_back(csv_path);
  for (const auto& [name, t] : extra) {
    emit_csv(t, (dir / name).string());
    out.files.push_back((dir / name).string());
  }
  const std::string summary_path = (dir / "summary.txt").string();
  std::ofstream summary(summary_path, std::ios::binary | std::ios::trunc);
  if (!summary) throw std::runtime_error("cannot open '" + summary_path + "' for writing");
  out.summary.write(summary);
  if (!summary.flush()) throw std::runtime_error("write to '" + summary_path + "' failed");
  out.files.push_back(summary_path);
  return out;
}

}  // namespace zeno
