#pragma once

// Flat key=value experiment configuration.
//
//   # comment
//   experiment=figure2
//   T1=1000
//   times=20,25,30,35
//
// Unknown keys are rejected. A repeated key keeps its last value and adds
// a warning. Every error names the line it came from.

#include "zeno/protocols.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace zeno {

enum class Experiment { DecayCurve, CrossoverScan, Figure2, Figure3, RatioPlot, McValidate };

inline const char* to_string(Experiment e) {
  switch (e) {
    case Experiment::DecayCurve: return "decay_curve";
    case Experiment::CrossoverScan: return "crossover_scan";
    case Experiment::Figure2: return "figure2";
    case Experiment::Figure3: return "figure3";
    case Experiment::RatioPlot: return "ratio_plot";
    case Experiment::McValidate: return "mc_validate";
  }
  return "?";
}

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& message)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

enum class DecayMethod { RungeKutta, ClosedForm };

struct ExperimentConfig {
  Experiment experiment = Experiment::Figure2;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  std::size_t trajectories = 100000;
  unsigned workers = 0;  // 0: one per hardware thread

  // Decoherence, ns and rad/ns.
  double t1 = 1000.0;
  double t2 = 20.0;
  double epsilon = 0.0;
  double delta = 0.0;

  // decay_curve
  double t_end = 100.0;
  double dt = 0.0;  // 0: min(T1, T2, t_end)/1000
  int samples = 101;
  DecayMethod method = DecayMethod::RungeKutta;

  // crossover_scan
  double lambda = 0.1;
  double tau_c = 1.0;
  int dump_trajectories = 0;

  // figure2, ratio_plot, mc_validate
  std::vector<double> times = {20.0, 25.0, 30.0, 35.0};
  int n_max = 20;
  bool monte_carlo = false;
  NoiseReset noise_reset = NoiseReset::ResamplePerInterval;

  // figure3
  double t_start = 0.0;
  int t_points = 41;
  std::vector<int> n_values = {1, 2, 4, 8, 16};

  std::vector<std::string> warnings;

  DecoherenceParams params() const {
    return DecoherenceParams::from_times(t1, t2, SystemHamiltonian{epsilon, delta});
  }
  unsigned worker_count() const { return workers == 0 ? default_workers() : workers; }
};

/// Per-experiment defaults: T1 = 1 us, with T2 = 20 ns for the selective
/// experiments and 400 ns for the non-selective ones.
inline ExperimentConfig default_config(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::DecayCurve:
      c.t1 = 1000.0;
      c.t2 = 20.0;
      c.t_end = 100.0;
      break;
    case Experiment::CrossoverScan:
      c.lambda = 0.1;
      c.tau_c = 1.0;
      c.t_end = 40.0;
      break;
    case Experiment::Figure2:
    case Experiment::McValidate:
      c.t1 = 1000.0;
      c.t2 = 20.0;
      c.times = {20.0, 25.0, 30.0, 35.0};
      c.n_max = 20;
      break;
    case Experiment::Figure3:
      c.t1 = 1000.0;
      c.t2 = 400.0;
      c.t_start = 0.0;
      c.t_end = 2000.0;
      c.t_points = 41;
      c.n_values = {1, 2, 4, 8, 16};
      break;
    case Experiment::RatioPlot:
      c.t1 = 1000.0;
      c.t2 = 400.0;
      c.times = {400.0};
      c.n_max = 16;
      break;
  }
  return c;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_number(std::string_view text, const std::string& key, int line) {
  const std::string s(trim(text));
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  double value = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError(line, key + ": expected a number, got '" + s + "'");
  }
  return value;
}

template <class Int>
Int parse_integer(std::string_view text, const std::string& key, int line) {
  const std::string s(trim(text));
  Int value = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw ConfigError(line, key + ": expected an integer, got '" + s + "'");
  }
  return value;
}

inline std::vector<std::string_view> split_list(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    parts.push_back(trim(text.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

inline Experiment parse_experiment(std::string_view text, int line) {
  for (Experiment e : {Experiment::DecayCurve, Experiment::CrossoverScan, Experiment::Figure2,
                       Experiment::Figure3, Experiment::RatioPlot, Experiment::McValidate}) {
    if (text == to_string(e)) return e;
  }
  throw ConfigError(line, "experiment: unknown experiment '" + std::string(text) + "'");
}

struct KeySpec {
  std::set<Experiment> experiments;  // empty: valid for all
  std::function<void(ExperimentConfig&, std::string_view, const std::string&, int)> apply;
};

inline const std::map<std::string, KeySpec>& key_table() {
  using E = Experiment;
  auto number = [](double ExperimentConfig::*field) {
    return [field](ExperimentConfig& c, std::string_view v, const std::string& k, int line) {
      c.*field = parse_number(v, k, line);
    };
  };
  auto integer = [](int ExperimentConfig::*field) {
    return [field](ExperimentConfig& c, std::string_view v, const std::string& k, int line) {
      c.*field = parse_integer<int>(v, k, line);
    };
  };
  const std::set<E> rates = {E::DecayCurve, E::Figure2, E::Figure3, E::RatioPlot, E::McValidate};
  static const std::map<std::string, KeySpec> table = {
      {"experiment", {{}, [](auto&, auto, auto&, int) {}}},
      {"out", {{}, [](ExperimentConfig& c, std::string_view v, auto&, int) {
                 c.output_dir = std::string(v);
               }}},
      {"seed", {{}, [](ExperimentConfig& c, std::string_view v, const std::string& k, int line) {
                  c.seed = parse_integer<std::uint64_t>(v, k, line);
                }}},
      {"workers", {{}, [](ExperimentConfig& c, std::string_view v, const std::string& k, int line) {
                     c.workers = parse_integer<unsigned>(v, k, line);
                   }}},
      {"trajectories",
       {{E::CrossoverScan, E::Figure2, E::McValidate},
        [](ExperimentConfig& c, std::string_view v, const std::string& k, int line) {
          c.trajectories = parse_integer<std::size_t>(v, k, line);
        }}},
      {"T1", {rates, number(&ExperimentConfig::t1)}},
      {"T2", {rates, number(&ExperimentConfig::t2)}},
      {"epsilon", {rates, number(&ExperimentConfig::epsilon)}},
      {"delta", {rates, number(&ExperimentConfig::delta)}},
      {"t_end", {{E::DecayCurve, E::CrossoverScan, E::Figure3}, number(&ExperimentConfig::t_end)}},
      {"dt", {{E::DecayCurve}, number(&ExperimentConfig::dt)}},
      {"samples", {{E::DecayCurve}, integer(&ExperimentConfig::samples)}},
      {"method", {{E::DecayCurve}, [](ExperimentConfig& c, std::string_view v, const std::string& k,
                                      int line) {
                    if (v == "rk4") c.method = DecayMethod::RungeKutta;
                    else if (v == "closed_form") c.method = DecayMethod::ClosedForm;
                    else throw ConfigError(line, k + ": expected rk4 or closed_form");
                  }}},
      {"lambda", {{E::CrossoverScan}, number(&ExperimentConfig::lambda)}},
      {"tau_c", {{E::CrossoverScan}, number(&ExperimentConfig::tau_c)}},
      {"dump_trajectories", {{E::CrossoverScan}, integer(&ExperimentConfig::dump_trajectories)}},
      {"times",
       {{E::Figure2, E::RatioPlot, E::McValidate},
        [](ExperimentConfig& c, std::string_view v, const std::string& k, int line) {
          c.times.clear();
          for (auto part : split_list(v)) c.times.push_back(parse_number(part, k, line));
        }}},
      {"n_max", {{E::Figure2, E::RatioPlot, E::McValidate}, integer(&ExperimentConfig::n_max)}},
      {"monte_carlo", {{E::Figure2}, [](ExperimentConfig& c, std::string_view v,
                                          const std::string& k, int line) {
                         if (v == "true") c.monte_carlo = true;
                         else if (v == "false") c.monte_carlo = false;
                         else throw ConfigError(line, k + ": expected true or false");
                       }}},
      {"noise_reset",
       {{E::Figure2, E::McValidate},
        [](ExperimentConfig& c, std::string_view v, const std::string& k, int line) {
          if (v == "resample") c.noise_reset = NoiseReset::ResamplePerInterval;
          else if (v == "persistent") c.noise_reset = NoiseReset::Persistent;
          else throw ConfigError(line, k + ": expected resample or persistent");
        }}},
      {"t_start", {{E::Figure3}, number(&ExperimentConfig::t_start)}},
      {"t_points", {{E::Figure3}, integer(&ExperimentConfig::t_points)}},
      {"n_values",
       {{E::Figure3}, [](ExperimentConfig& c, std::string_view v, const std::string& k, int line) {
          c.n_values.clear();
          for (auto part : split_list(v)) c.n_values.push_back(parse_integer<int>(part, k, line));
        }}},
  };
  return table;
}

}  // namespace detail

/// Checks value constraints; `lines` maps keys to the line that set them.
inline void validate_config(const ExperimentConfig& c, const std::map<std::string, int>& lines = {}) {
  auto fail = [&](const std::string& key, const std::string& msg) {
    const auto it = lines.find(key);
    throw ConfigError(it == lines.end() ? 0 : it->second, key + ": " + msg);
  };
  auto is_time = [](double v) { return v > 0.0 && !std::isnan(v); };
  const Experiment e = c.experiment;
  const bool uses_rates = e != Experiment::CrossoverScan;
  if (uses_rates) {
    if (!is_time(c.t1)) fail("T1", "must be > 0 ns (inf disables relaxation)");
    if (!is_time(c.t2)) fail("T2", "must be > 0 ns (inf disables dephasing)");
    if (!std::isfinite(c.epsilon)) fail("epsilon", "must be finite");
    if (!std::isfinite(c.delta)) fail("delta", "must be finite");
  }
  switch (e) {
    case Experiment::DecayCurve:
      if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) fail("t_end", "must be finite and >= 0");
      if (!(c.dt >= 0.0) || !std::isfinite(c.dt)) fail("dt", "must be finite and >= 0");
      if (c.samples < 2) fail("samples", "must be >= 2");
      break;
    case Experiment::CrossoverScan:
      if (!(c.lambda >= 0.0) || !std::isfinite(c.lambda)) fail("lambda", "must be finite and >= 0");
      if (!(c.tau_c > 0.0) || !std::isfinite(c.tau_c)) fail("tau_c", "must be finite and > 0");
      if (!(c.t_end > 0.1 * c.tau_c) || !std::isfinite(c.t_end)) {
        fail("t_end", "must be finite and > tau_c/10");
      }
      if (c.trajectories < 100) fail("trajectories", "must be >= 100");
      if (c.dump_trajectories < 0) fail("dump_trajectories", "must be >= 0");
      break;
    case Experiment::Figure2:
    case Experiment::McValidate:
    case Experiment::RatioPlot:
      if (c.times.empty()) fail("times", "must not be empty");
      for (double t : c.times) {
        if (!(t > 0.0) || !std::isfinite(t)) fail("times", "every time must be finite and > 0");
      }
      if (c.n_max < 1) fail("n_max", "must be >= 1");
      if (e != Experiment::RatioPlot && (c.monte_carlo || e == Experiment::McValidate) &&
          c.trajectories < 1000) {
        fail("trajectories", "must be >= 1000 for the selective Monte Carlo engine");
      }
      break;
    case Experiment::Figure3:
      if (!(c.t_start >= 0.0) || !std::isfinite(c.t_start)) fail("t_start", "must be >= 0");
      if (!(c.t_end >= c.t_start) || !std::isfinite(c.t_end)) fail("t_end", "must be >= t_start");
      if (c.t_points < 1) fail("t_points", "must be >= 1");
      if (c.n_values.empty()) fail("n_values", "must not be empty");
      for (int n : c.n_values) {
        if (n < 1) fail("n_values", "every N must be >= 1");
      }
      break;
  }
}

inline ExperimentConfig parse_config(std::string_view text) {
  struct Entry {
    std::string key;
    std::string value;
    int line;
  };
  std::vector<Entry> entries;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(line_no, "expected key=value, got '" + std::string(line) + "'");
    }
    const std::string key(detail::trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError(line_no, "missing key before '='");
    entries.push_back({key, std::string(detail::trim(line.substr(eq + 1))), line_no});
  }

  const Entry* experiment_entry = nullptr;
  std::map<std::string, int> lines;
  std::vector<std::string> warnings;
  for (const Entry& en : entries) {
    if (auto it = lines.find(en.key); it != lines.end()) {
      warnings.push_back("line " + std::to_string(en.line) + ": duplicate key '" + en.key +
                         "' overrides line " + std::to_string(it->second));
    }
    lines[en.key] = en.line;
    if (en.key == "experiment") experiment_entry = &en;
  }
  if (!experiment_entry) throw ConfigError(0, "missing required key 'experiment'");

  ExperimentConfig config =
      default_config(detail::parse_experiment(experiment_entry->value, experiment_entry->line));
  const auto& table = detail::key_table();
  for (const Entry& en : entries) {
    const auto it = table.find(en.key);
    if (it == table.end()) throw ConfigError(en.line, "unknown key '" + en.key + "'");
    const auto& allowed = it->second.experiments;
    if (!allowed.empty() && !allowed.contains(config.experiment)) {
      throw ConfigError(en.line, "key '" + en.key + "' does not apply to experiment " +
                                     to_string(config.experiment));
    }
    it->second.apply(config, en.value, en.key, en.line);
  }
  validate_config(config, lines);
  config.warnings = std::move(warnings);
  return config;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw ConfigError(0, "cannot read config file '" + path + "'");
  std::ostringstream text;
  text << file.rdbuf();
  return parse_config(text.str());
}

}  // namespace zeno
