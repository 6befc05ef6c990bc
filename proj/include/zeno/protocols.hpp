#pragma once

// Repeated-measurement protocols on a qubit prepared in |+>.
//
// Selective: after every interval tau = t/N the state is projected onto the
// co-rotating |+>, and only runs where every outcome is positive count.
// Non-selective: every interval ends with a measurement in the co-rotating
// {|+>, |->} basis whose outcome is discarded.
//
// Both come with closed forms and a Monte Carlo engine that samples the
// dephasing noise and relaxation jumps explicitly.

#include "zeno/ensemble.hpp"
#include "zeno/master_equation.hpp"
#include "zeno/noise.hpp"
#include "zeno/qubit.hpp"
#include "zeno/rng.hpp"

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace zeno {

enum class ProtocolKind { Selective, NonSelective };

/// Whether dephasing noise is redrawn after every projection or one
/// realization spans the whole run.
enum class NoiseReset { ResamplePerInterval, Persistent };

struct AnalyticEngine {};

struct MonteCarloEngine {
  std::size_t trajectories = 100000;
  std::uint64_t base_seed = 0;
  unsigned workers = default_workers();
};

using Engine = std::variant<AnalyticEngine, MonteCarloEngine>;

struct ProtocolConfig {
  double total_time = 0.0;  // ns
  int measurements = 1;
  ProtocolKind kind = ProtocolKind::Selective;
  Engine engine = AnalyticEngine{};
  NoiseReset noise_reset = NoiseReset::ResamplePerInterval;
  /// Dephasing source for the Monte Carlo engine. When empty, quasi-static
  /// noise with lambda = gamma2/sqrt(2) reproduces the exp(-(G2 t)^2) law.
  std::optional<NoiseModel> dephasing_noise;

  double interval() const { return total_time / measurements; }

  void validate() const {
    if (measurements < 1) throw std::invalid_argument("protocol: need N >= 1 measurements");
    if (!(total_time > 0.0) || !std::isfinite(total_time)) {
      throw std::invalid_argument("protocol: total time must be finite and > 0");
    }
    if (dephasing_noise) dephasing_noise->validate();
  }
};

struct StepRecord {
  int step = 0;       // 1-based measurement index
  double time = 0.0;  // ns, time of the measurement
  /// Selective: fraction of runs with all outcomes positive so far.
  /// Non-selective: |<0|rho|1>| right after the measurement.
  double value = 0.0;
};

struct ProtocolResult {
  ProtocolKind kind = ProtocolKind::Selective;
  double success_probability = 0.0;  // selective only
  double success_stderr = 0.0;       // binomial; 0 for the analytic engine
  std::optional<DensityMatrix> final_rho;  // non-selective only, lab frame
  double coherence = 0.0;                  // non-selective |<0|rho|1>|
  double coherence_stderr = 0.0;
  std::size_t trajectory_count = 0;
  std::vector<StepRecord> steps;
};

// ---------------------------------------------------------------------------
// Closed forms

/// Probability that one projection after tau succeeds:
/// 1/2 + 1/2 exp(-tau/(2 T1) - tau^2/T2^2).
inline double selective_step_probability(const DecoherenceParams& p, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("selective_step_probability: tau must be > 0");
  return 0.5 + 0.5 * std::exp(-0.5 * p.gamma1 * tau - p.gamma2 * p.gamma2 * tau * tau);
}

/// Success probability of N postselected projections spread over t.
inline double pn_analytic(const DecoherenceParams& p, double t, int n) {
  if (n < 1) throw std::invalid_argument("pn_analytic: N must be >= 1");
  if (!(t >= 0.0)) throw std::invalid_argument("pn_analytic: t must be >= 0");
  if (t == 0.0) return 1.0;
  return std::pow(selective_step_probability(p, t / n), n);
}

/// (1 - t/(4 T1)) exp(-t^2/(2 N T2^2)); only accurate for t << T1, T2.
inline double pn_approx(const DecoherenceParams& p, double t, int n) {
  if (n < 1) throw std::invalid_argument("pn_approx: N must be >= 1");
  return (1.0 - 0.25 * p.gamma1 * t) * std::exp(-0.5 * p.gamma2 * p.gamma2 * t * t / n);
}

/// Interaction-picture state after N non-selective measurements over t.
inline DensityMatrix nonselective_rho_interaction(const DecoherenceParams& p, double t, int n) {
  if (n < 1) throw std::invalid_argument("nonselective_rho: N must be >= 1");
  if (!(t >= 0.0)) throw std::invalid_argument("nonselective_rho: t must be >= 0");
  const double off = 0.5 * std::exp(-0.5 * p.gamma1 * t - p.gamma2 * p.gamma2 * t * t / n);
  Matrix2 m;
  m << 0.5, off, off, 0.5;
  return DensityMatrix::unchecked(m);
}

inline DensityMatrix nonselective_rho(const DecoherenceParams& p, double t, int n) {
  return to_lab_frame(nonselective_rho_interaction(p, t, n), p.hs, t);
}

/// |<0|rho(N,t)|1>| normalized by the relaxation-only envelope
/// (1/2) exp(-t/(2 T1)); equals exp(-t^2/(N T2^2)) with no T1 dependence.
/// Uses the co-rotating frame, where |<0|rho|1>| is frame-independent.
inline double coherence_ratio(const DecoherenceParams& p, double t, int n) {
  const double envelope = 0.5 * std::exp(-0.5 * p.gamma1 * t);
  return nonselective_rho_interaction(p, t, n).coherence() / envelope;
}

// ---------------------------------------------------------------------------
// Monte Carlo engine

namespace detail {

inline NoiseModel effective_dephasing(const DecoherenceParams& p, const ProtocolConfig& cfg) {
  if (cfg.dephasing_noise) return *cfg.dephasing_noise;
  return NoiseModel::quasi_static(p.gamma2 / std::sqrt(2.0));
}

/// Per-trajectory phases for every interval of a run of N measurements.
/// Persistent paths are sampled once per trajectory and shared by all N.
class IntervalPhases {
 public:
  IntervalPhases(const NoiseModel& model, NoiseReset reset, double total_time)
      : model_(model), reset_(reset), total_time_(total_time) {
    model_.validate();
    if (!model_.couples_through_sigma_z()) {
      throw std::invalid_argument("protocol: only sigma_z dephasing coupling is supported");
    }
  }

  /// Starts trajectory j: draws the persistent realization if there is one.
  void begin(RandomStream& noise) {
    if (reset_ != NoiseReset::Persistent || model_.lambda == 0.0) return;
    if (model_.kind == NoiseKind::QuasiStatic) {
      path_ = sample_quasi_static(model_, noise);
    } else {
      const std::vector<double> grid = uniform_grid(total_time_, model_.tau_c / 10.0);
      path_ = sample_ou(model_, grid, noise);
      cumulative_ = cumulative_integral(path_);
    }
  }

  /// Phases for N equal intervals.
  void phases(int n, RandomStream& noise, std::vector<double>& out) {
    out.assign(static_cast<std::size_t>(n), 0.0);
    if (model_.lambda == 0.0) return;
    const double tau = total_time_ / n;
    if (reset_ == NoiseReset::Persistent) {
      double previous = 0.0;
      for (int k = 0; k < n; ++k) {
        const double t_next = k + 1 == n ? total_time_ : (k + 1) * tau;
        const double current = integral_at(path_, cumulative_, t_next);
        out[static_cast<std::size_t>(k)] = model_.lambda * (current - previous);
        previous = current;
      }
      return;
    }
    if (model_.kind == NoiseKind::QuasiStatic) {
      std::normal_distribution<double> normal;
      for (auto& phi : out) phi = model_.lambda * normal(noise) * tau;
      return;
    }
    const std::vector<double> grid = uniform_grid(tau, model_.tau_c / 10.0);
    for (auto& phi : out) {
      const Trajectory piece = sample_ou(model_, grid, noise);
      phi = model_.lambda * cumulative_integral(piece).back();
    }
  }

 private:
  NoiseModel model_;
  NoiseReset reset_;
  double total_time_;
  Trajectory path_;
  std::vector<double> cumulative_;
};

/// One interval of relaxation for a state given in the co-rotating frame,
/// as a sampled quantum jump. Returns the post-interval state.
inline Matrix2 sample_relaxation(const Matrix2& rho, double jump_probability_scale, double u) {
  if (jump_probability_scale == 0.0) return rho;
  const double p_jump = jump_probability_scale * rho(1, 1).real();
  if (u < p_jump) {
    Matrix2 ground = Matrix2::Zero();
    ground(0, 0) = 1.0;
    return ground;
  }
  Matrix2 k0 = Matrix2::Identity();
  k0(1, 1) = std::sqrt(1.0 - jump_probability_scale);
  return k0 * rho * k0.adjoint() / (1.0 - p_jump);
}

/// Averaged relaxation channel (amplitude damping) over one interval.
inline Matrix2 relaxation_channel(const Matrix2& rho, double gamma) {
  Matrix2 k0 = Matrix2::Identity();
  k0(1, 1) = std::sqrt(1.0 - gamma);
  Matrix2 k1 = Matrix2::Zero();
  k1(0, 1) = std::sqrt(gamma);
  return k0 * rho * k0.adjoint() + k1 * rho * k1.adjoint();
}

inline Matrix2 with_phase(const Matrix2& rho, double phi) {
  Matrix2 m = rho;
  const cplx rot = std::polar(1.0, -2.0 * phi);
  m(0, 1) *= rot;
  m(1, 0) *= std::conj(rot);
  return m;
}

/// Lab-frame propagators and co-rotating |+> projectors at each
/// measurement time of a run with N intervals.
struct MeasurementFrames {
  std::vector<Matrix2> propagators;
  std::vector<Matrix2> projectors;

  MeasurementFrames(const SystemHamiltonian& hs, double total_time, int n) {
    const double tau = total_time / n;
    for (int k = 0; k < n; ++k) {
      const double t_k = k + 1 == n ? total_time : (k + 1) * tau;
      propagators.push_back(hs.propagator(t_k).matrix());
      projectors.push_back(corotating_projector(plus_state(), hs, t_k).matrix());
    }
  }
};

/// Number of successful projections (N means every outcome was positive).
inline int run_selective_trajectory(const DecoherenceParams& p, double total_time, int n,
                                    std::span<const double> phases,
                                    const MeasurementFrames& frames, RandomStream& outcomes) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const double gamma = -std::expm1(-p.gamma1 * total_time / n);
  const Matrix2 plus = DensityMatrix::pure(plus_state()).matrix();
  for (int k = 0; k < n; ++k) {
    const auto idx = static_cast<std::size_t>(k);
    const double u_jump = uniform(outcomes);
    const double u_measure = uniform(outcomes);
    Matrix2 rho = with_phase(plus, phases[idx]);
    rho = sample_relaxation(rho, gamma, u_jump);
    const Matrix2& u = frames.propagators[idx];
    const Matrix2 lab = u * rho * u.adjoint();
    const double p_success = (frames.projectors[idx] * lab).trace().real();
    if (u_measure >= p_success) return k;
    // Success leaves the qubit in the co-rotating |+>, i.e. |+> in the
    // interaction frame: the next interval starts fresh.
  }
  return n;
}

}  // namespace detail

/// Monte Carlo success probabilities for several measurement counts over
/// the same total time. Trajectory j uses noise stream (seed, j, Noise)
/// and outcome stream (seed, j, Outcomes); a persistent noise path is
/// shared by every N.
inline std::vector<ProtocolResult> selective_scan_mc(const DecoherenceParams& p, double total_time,
                                                     std::span<const int> counts,
                                                     const MonteCarloEngine& mc,
                                                     NoiseReset reset = NoiseReset::ResamplePerInterval,
                                                     std::optional<NoiseModel> noise = std::nullopt) {
  p.validate();
  if (mc.trajectories < 1000) {
    throw std::invalid_argument("selective MC: need at least 1000 trajectories");
  }
  ProtocolConfig probe;
  probe.total_time = total_time;
  probe.dephasing_noise = noise;
  for (int n : counts) {
    probe.measurements = n;
    probe.validate();
  }
  const NoiseModel model = detail::effective_dephasing(p, probe);

  const std::size_t n_counts = counts.size();
  const std::size_t n_blocks = (mc.trajectories + kBlockSize - 1) / kBlockSize;
  // survivors[block][c][k]: runs of counts[c] that passed measurement k+1
  std::vector<std::vector<std::vector<std::size_t>>> survivors(n_blocks);

  for_each_block(n_blocks, mc.workers, [&](std::size_t block) {
    std::vector<std::vector<std::size_t>> local(n_counts);
    for (std::size_t c = 0; c < n_counts; ++c) local[c].assign(static_cast<std::size_t>(counts[c]), 0);
    detail::IntervalPhases source(model, reset, total_time);
    std::vector<double> phases;
    std::vector<detail::MeasurementFrames> frames;
    for (int n : counts) frames.emplace_back(p.hs, total_time, n);
    const std::size_t begin = block * kBlockSize;
    const std::size_t end = std::min(mc.trajectories, begin + kBlockSize);
    for (std::size_t j = begin; j < end; ++j) {
      RandomStream noise(mc.base_seed, j, StreamPurpose::Noise);
      RandomStream outcomes(mc.base_seed, j, StreamPurpose::Outcomes);
      source.begin(noise);
      for (std::size_t c = 0; c < n_counts; ++c) {
        source.phases(counts[c], noise, phases);
        const int passed =
            detail::run_selective_trajectory(p, total_time, counts[c], phases, frames[c], outcomes);
        for (int k = 0; k < passed; ++k) ++local[c][static_cast<std::size_t>(k)];
      }
    }
    survivors[block] = std::move(local);
  });

  std::vector<ProtocolResult> results(n_counts);
  const double m = static_cast<double>(mc.trajectories);
  for (std::size_t c = 0; c < n_counts; ++c) {
    ProtocolResult& r = results[c];
    r.kind = ProtocolKind::Selective;
    r.trajectory_count = mc.trajectories;
    const int n = counts[c];
    const double tau = total_time / n;
    for (int k = 0; k < n; ++k) {
      std::size_t total = 0;
      for (const auto& block : survivors) total += block[c][static_cast<std::size_t>(k)];
      r.steps.push_back({k + 1, (k + 1) * tau, static_cast<double>(total) / m});
    }
    r.success_probability = r.steps.back().value;
    const double q = r.success_probability;
    r.success_stderr = std::sqrt(q * (1.0 - q) / m);
  }
  return results;
}

inline ProtocolResult selective_run_mc(const DecoherenceParams& p, const ProtocolConfig& cfg) {
  cfg.validate();
  const auto* mc = std::get_if<MonteCarloEngine>(&cfg.engine);
  if (!mc) throw std::invalid_argument("selective_run_mc: engine must be Monte Carlo");
  if (cfg.kind != ProtocolKind::Selective) {
    throw std::invalid_argument("selective_run_mc: protocol must be selective");
  }
  const int counts[] = {cfg.measurements};
  return selective_scan_mc(p, cfg.total_time, counts, *mc, cfg.noise_reset, cfg.dephasing_noise)
      .front();
}

/// Monte Carlo mean state under N non-selective measurements. Relaxation
/// enters as its exact averaged channel; the noise is sampled.
inline ProtocolResult nonselective_run_mc(const DecoherenceParams& p, const ProtocolConfig& cfg) {
  cfg.validate();
  p.validate();
  const auto* mc = std::get_if<MonteCarloEngine>(&cfg.engine);
  if (!mc) throw std::invalid_argument("nonselective_run_mc: engine must be Monte Carlo");
  if (mc->trajectories < 100) {
    throw std::invalid_argument("nonselective MC: need at least 100 trajectories");
  }
  const NoiseModel model = detail::effective_dephasing(p, cfg);
  const int n = cfg.measurements;
  const double tau = cfg.interval();
  const double gamma = -std::expm1(-p.gamma1 * tau);
  const Matrix2 plus_proj = DensityMatrix::pure(plus_state()).matrix();
  const Matrix2 minus_proj = DensityMatrix::pure(minus_state()).matrix();

  const std::size_t n_blocks = (mc->trajectories + kBlockSize - 1) / kBlockSize;
  // Per block: moments of the interaction-frame state after each measurement.
  std::vector<std::vector<MomentSums>> partial(n_blocks);
  for_each_block(n_blocks, mc->workers, [&](std::size_t block) {
    std::vector<MomentSums> sums(static_cast<std::size_t>(n));
    detail::IntervalPhases source(model, cfg.noise_reset, cfg.total_time);
    std::vector<double> phases;
    const std::size_t begin = block * kBlockSize;
    const std::size_t end = std::min(mc->trajectories, begin + kBlockSize);
    for (std::size_t j = begin; j < end; ++j) {
      RandomStream noise(mc->base_seed, j, StreamPurpose::Noise);
      source.begin(noise);
      source.phases(n, noise, phases);
      Matrix2 rho = plus_proj;
      for (int k = 0; k < n; ++k) {
        rho = detail::with_phase(rho, phases[static_cast<std::size_t>(k)]);
        rho = detail::relaxation_channel(rho, gamma);
        // The co-rotating {|+>,|->} measurement is the fixed {|+>,|->}
        // measurement in this frame.
        rho = plus_proj * rho * plus_proj + minus_proj * rho * minus_proj;
        sums[static_cast<std::size_t>(k)].add(rho);
      }
    }
    partial[block] = std::move(sums);
  });

  std::vector<MomentSums> total(static_cast<std::size_t>(n));
  for (const auto& block : partial) {
    for (std::size_t k = 0; k < total.size(); ++k) total[k].merge(block[k]);
  }
  std::vector<double> times;
  for (int k = 0; k < n; ++k) times.push_back(k + 1 == n ? cfg.total_time : (k + 1) * tau);
  const EnsembleResult ens = finalize_moments(times, total, mc->trajectories);

  ProtocolResult r;
  r.kind = ProtocolKind::NonSelective;
  r.trajectory_count = mc->trajectories;
  for (int k = 0; k < n; ++k) {
    r.steps.push_back({k + 1, times[static_cast<std::size_t>(k)],
                       ens.coherence(static_cast<std::size_t>(k))});
  }
  r.final_rho = to_lab_frame(ens.mean_rho.back(), p.hs, cfg.total_time);
  r.coherence = ens.coherence(ens.mean_rho.size() - 1);
  r.coherence_stderr = ens.coherence_stderr(ens.mean_rho.size() - 1);
  return r;
}

/// Dispatches on protocol kind and engine.
inline ProtocolResult run_protocol(const DecoherenceParams& p, const ProtocolConfig& cfg) {
  cfg.validate();
  if (std::holds_alternative<MonteCarloEngine>(cfg.engine)) {
    return cfg.kind == ProtocolKind::Selective ? selective_run_mc(p, cfg)
                                               : nonselective_run_mc(p, cfg);
  }
  ProtocolResult r;
  r.kind = cfg.kind;
  const int n = cfg.measurements;
  const double tau = cfg.interval();
  for (int k = 1; k <= n; ++k) {
    const double t_k = k == n ? cfg.total_time : k * tau;
    const double value = cfg.kind == ProtocolKind::Selective
                             ? std::pow(selective_step_probability(p, tau), k)
                             : nonselective_rho_interaction(p, t_k, k).coherence();
    r.steps.push_back({k, t_k, value});
  }
  if (cfg.kind == ProtocolKind::Selective) {
    r.success_probability = pn_analytic(p, cfg.total_time, n);
  } else {
    r.final_rho = nonselective_rho(p, cfg.total_time, n);
    r.coherence = nonselective_rho_interaction(p, cfg.total_time, n).coherence();
  }
  return r;
}

// ---------------------------------------------------------------------------
// Figure tables

struct SelectiveRow {
  double t = 0.0;
  int n = 1;
  double p_analytic = 0.0;
  std::optional<double> p_mc;
  std::optional<double> p_mc_stderr;
};

/// P(N) for every t in `times` and N = 1..n_max; Monte Carlo columns are
/// filled when `mc` is given.
inline std::vector<SelectiveRow> figure2_sweep(const DecoherenceParams& p,
                                               std::span<const double> times, int n_max,
                                               std::optional<MonteCarloEngine> mc = std::nullopt,
                                               NoiseReset reset = NoiseReset::ResamplePerInterval) {
  if (n_max < 1) throw std::invalid_argument("figure2_sweep: N_max must be >= 1");
  std::vector<int> counts;
  for (int n = 1; n <= n_max; ++n) counts.push_back(n);
  std::vector<SelectiveRow> rows;
  for (std::size_t ti = 0; ti < times.size(); ++ti) {
    const double t = times[ti];
    std::vector<ProtocolResult> sampled;
    if (mc) {
      MonteCarloEngine engine = *mc;
      // Distinct seed per time so rows are statistically independent.
      engine.base_seed = mc->base_seed + 0x9E3779B97F4A7C15ull * (ti + 1);
      sampled = selective_scan_mc(p, t, counts, engine, reset);
    }
    for (int n : counts) {
      SelectiveRow row{t, n, pn_analytic(p, t, n), std::nullopt, std::nullopt};
      if (mc) {
        row.p_mc = sampled[static_cast<std::size_t>(n - 1)].success_probability;
        row.p_mc_stderr = sampled[static_cast<std::size_t>(n - 1)].success_stderr;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

struct NonSelectiveRow {
  double t = 0.0;
  int n = 1;
  double abs01 = 0.0;
  double ratio = 0.0;
};

/// |<0|rho(N,t)|1>| and the relaxation-normalized ratio over a (t, N) grid.
inline std::vector<NonSelectiveRow> figure3_surface(const DecoherenceParams& p,
                                                    std::span<const double> t_grid,
                                                    std::span<const int> n_grid) {
  std::vector<NonSelectiveRow> rows;
  for (double t : t_grid) {
    for (int n : n_grid) {
      rows.push_back({t, n, nonselective_rho_interaction(p, t, n).coherence(),
                      coherence_ratio(p, t, n)});
    }
  }
  return rows;
}

}  // namespace zeno
