#pragma once

// Classical Gaussian noise f(t) coupled as H_I = lambda f(t) A, with
// A = sigma_z (commutes with the retained system Hamiltonian). Per
// realization the qubit only picks up a phase, so each trajectory state
// stays pure; dephasing appears in the ensemble mean.

#include "zeno/qubit.hpp"
#include "zeno/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace zeno {

enum class NoiseKind { QuasiStatic, OrnsteinUhlenbeck, White };

inline const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::QuasiStatic: return "quasi-static";
    case NoiseKind::OrnsteinUhlenbeck: return "ornstein-uhlenbeck";
    case NoiseKind::White: return "white";
  }
  return "?";
}

/// Zero-mean, unit-variance Gaussian noise with coupling lambda (rad/ns)
/// and correlation time tau_c (ns).
///
/// QuasiStatic is the infinite-tau_c limit used for 1/f noise. White
/// noise (tau_c = 0) has no normalized sample path; it is described here
/// for completeness but its effect enters through the Lindblad relaxation
/// term of the master equation, and the samplers reject it.
struct NoiseModel {
  NoiseKind kind = NoiseKind::QuasiStatic;
  double lambda = 0.0;
  double tau_c = std::numeric_limits<double>::infinity();
  QubitOperator coupling = QubitOperator(pauli::z());

  static NoiseModel quasi_static(double lambda) {
    return {NoiseKind::QuasiStatic, lambda, std::numeric_limits<double>::infinity(),
            QubitOperator(pauli::z())};
  }
  static NoiseModel ornstein_uhlenbeck(double lambda, double tau_c) {
    return {NoiseKind::OrnsteinUhlenbeck, lambda, tau_c, QubitOperator(pauli::z())};
  }
  static NoiseModel white(double lambda) {
    return {NoiseKind::White, lambda, 0.0, QubitOperator(pauli::z())};
  }

  bool couples_through_sigma_z() const {
    return max_abs(coupling.matrix() - pauli::z()) <= 1e-12;
  }

  /// Throws std::invalid_argument describing the first violated constraint.
  void validate() const {
    if (!std::isfinite(lambda) || lambda < 0.0) {
      throw std::invalid_argument("noise model: lambda must be finite and >= 0");
    }
    if (!coupling.hermitian()) {
      throw std::invalid_argument("noise model: coupling operator must be Hermitian");
    }
    switch (kind) {
      case NoiseKind::QuasiStatic:
        break;
      case NoiseKind::OrnsteinUhlenbeck:
        if (!(tau_c > 0.0) || !std::isfinite(tau_c)) {
          throw std::invalid_argument("noise model: OU tau_c must be finite and > 0");
        }
        break;
      case NoiseKind::White:
        throw std::invalid_argument(
            "noise model: white noise has no sampled trajectory; model it as relaxation "
            "(gamma1) in the master equation");
    }
  }
};

/// One realization f(t_i) on a time grid. Quasi-static trajectories are
/// constant and are defined for every t >= 0 regardless of the grid.
struct Trajectory {
  NoiseKind kind = NoiseKind::QuasiStatic;
  std::vector<double> sample_times;
  std::vector<double> values;
  std::uint64_t rng_stream_id = 0;
};

// ---------------------------------------------------------------------------
// Time grids

/// Checks that the grid starts at 0, is finite and strictly increasing.
inline void validate_grid(std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("time grid is empty");
  if (grid.front() != 0.0) throw std::invalid_argument("time grid must start at t=0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || !(grid[i] > grid[i - 1])) {
      throw std::invalid_argument("time grid must be finite and strictly increasing (index " +
                                  std::to_string(i) + ")");
    }
  }
}

/// 0, step, 2 step, ..., t_end. The last step is shortened if step does not
/// divide t_end.
inline std::vector<double> uniform_grid(double t_end, double step) {
  if (!(step > 0.0) || !(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw std::invalid_argument("uniform_grid: need step > 0 and finite t_end >= 0");
  }
  const auto n = static_cast<std::size_t>(std::ceil(t_end / step - 1e-9));
  std::vector<double> grid;
  grid.reserve(n + 1);
  for (std::size_t i = 0; i < n; ++i) grid.push_back(static_cast<double>(i) * step);
  grid.push_back(t_end);
  return grid;
}

/// Fine steps up to `split`, coarse steps after it.
inline std::vector<double> two_scale_grid(double split, double fine_step, double t_end,
                                          double coarse_step) {
  if (!(split > 0.0) || !(t_end > split)) {
    throw std::invalid_argument("two_scale_grid: need 0 < split < t_end");
  }
  std::vector<double> grid = uniform_grid(split, fine_step);
  const std::vector<double> tail = uniform_grid(t_end - split, coarse_step);
  for (std::size_t i = 1; i < tail.size(); ++i) grid.push_back(split + tail[i]);
  return grid;
}

// ---------------------------------------------------------------------------
// Sampling

inline Trajectory sample_quasi_static(const NoiseModel& model, RandomStream& stream,
                                      std::span<const double> grid = {}) {
  if (model.kind != NoiseKind::QuasiStatic) {
    throw std::invalid_argument("sample_quasi_static: model is not quasi-static");
  }
  model.validate();
  std::normal_distribution<double> normal;
  const double f0 = normal(stream);
  Trajectory traj;
  traj.kind = NoiseKind::QuasiStatic;
  traj.rng_stream_id = stream.stream_id();
  if (grid.empty()) {
    traj.sample_times = {0.0};
  } else {
    validate_grid(grid);
    traj.sample_times.assign(grid.begin(), grid.end());
  }
  traj.values.assign(traj.sample_times.size(), f0);
  return traj;
}

/// Constant f(t) = f0 with f0 ~ N(0,1). Deterministic in `seed`.
inline Trajectory sample_quasi_static(const NoiseModel& model, std::uint64_t seed,
                                      std::span<const double> grid = {}) {
  RandomStream stream(seed, 0);
  return sample_quasi_static(model, stream, grid);
}

/// Stationary OU path with exact transitions f' = a f + sqrt(1-a^2) xi,
/// a = exp(-dt/tau_c). Refuses grids whose step exceeds tau_c/10.
inline Trajectory sample_ou(const NoiseModel& model, std::span<const double> grid,
                            RandomStream& stream) {
  if (model.kind != NoiseKind::OrnsteinUhlenbeck) {
    throw std::invalid_argument("sample_ou: model is not Ornstein-Uhlenbeck");
  }
  model.validate();
  validate_grid(grid);
  const double max_step = model.tau_c / 10.0;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] - grid[i - 1] > max_step * (1.0 + 1e-9)) {
      throw std::invalid_argument("sample_ou: grid step " + std::to_string(grid[i] - grid[i - 1]) +
                                  " ns exceeds tau_c/10 = " + std::to_string(max_step) + " ns");
    }
  }
  std::normal_distribution<double> normal;
  Trajectory traj;
  traj.kind = NoiseKind::OrnsteinUhlenbeck;
  traj.rng_stream_id = stream.stream_id();
  traj.sample_times.assign(grid.begin(), grid.end());
  traj.values.resize(grid.size());
  double f = normal(stream);
  traj.values[0] = f;
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double a = std::exp(-(grid[i] - grid[i - 1]) / model.tau_c);
    f = a * f + std::sqrt(1.0 - a * a) * normal(stream);
    traj.values[i] = f;
  }
  return traj;
}

inline Trajectory sample_ou(const NoiseModel& model, std::span<const double> grid,
                            std::uint64_t seed) {
  RandomStream stream(seed, 0);
  return sample_ou(model, grid, stream);
}

/// Draws whichever path kind the model describes.
inline Trajectory sample(const NoiseModel& model, std::span<const double> grid,
                         RandomStream& stream) {
  switch (model.kind) {
    case NoiseKind::QuasiStatic: return sample_quasi_static(model, stream, grid);
    case NoiseKind::OrnsteinUhlenbeck: return sample_ou(model, grid, stream);
    case NoiseKind::White: break;
  }
  model.validate();  // throws for white noise
  return {};
}

// ---------------------------------------------------------------------------
// Phases and states

/// Running trapezoid integral of f over the trajectory grid.
inline std::vector<double> cumulative_integral(const Trajectory& traj) {
  std::vector<double> out(traj.sample_times.size(), 0.0);
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double dt = traj.sample_times[i] - traj.sample_times[i - 1];
    out[i] = out[i - 1] + 0.5 * dt * (traj.values[i] + traj.values[i - 1]);
  }
  return out;
}

/// Integral of f from 0 to t given the running integral; t inside the grid.
inline double integral_at(const Trajectory& traj, std::span<const double> cumulative, double t) {
  if (traj.kind == NoiseKind::QuasiStatic) {
    if (!(t >= 0.0)) throw std::invalid_argument("dephasing time must be >= 0");
    return traj.values.front() * t;
  }
  const auto& times = traj.sample_times;
  if (!(t >= times.front()) || !(t <= times.back())) {
    throw std::invalid_argument("time " + std::to_string(t) + " ns lies outside the trajectory grid");
  }
  auto upper = std::lower_bound(times.begin(), times.end(), t);
  const auto i = static_cast<std::size_t>(upper - times.begin());
  if (*upper == t) return cumulative[i];
  // Partial trapezoid on [t_{i-1}, t] with f linearly interpolated.
  const double t0 = times[i - 1];
  const double w = (t - t0) / (times[i] - t0);
  const double f_t = traj.values[i - 1] + w * (traj.values[i] - traj.values[i - 1]);
  return cumulative[i - 1] + 0.5 * (t - t0) * (traj.values[i - 1] + f_t);
}

/// phi(t) = lambda * integral_0^t f(s) ds (trapezoid rule; exact when f is constant).
inline double dephasing_phase(const Trajectory& traj, double lambda, double t) {
  if (traj.kind == NoiseKind::QuasiStatic) return lambda * integral_at(traj, {}, t);
  const std::vector<double> cumulative = cumulative_integral(traj);
  return lambda * integral_at(traj, cumulative, t);
}

/// exp(-i phi sigma_z) rho exp(i phi sigma_z): rho_01 picks up e^{-2i phi}.
inline DensityMatrix apply_phase(const DensityMatrix& rho, double phi) {
  Matrix2 m = rho.matrix();
  const cplx rot = std::polar(1.0, -2.0 * phi);
  m(0, 1) *= rot;
  m(1, 0) *= std::conj(rot);
  return DensityMatrix::unchecked(m);
}

/// Interaction-picture state at time t for one noise realization.
inline DensityMatrix trajectory_rho(const PureState& psi0, const Trajectory& traj,
                                    const NoiseModel& model, double t) {
  if (!model.couples_through_sigma_z()) {
    throw std::invalid_argument("trajectory_rho: only sigma_z noise coupling is supported");
  }
  return apply_phase(DensityMatrix::pure(psi0), dephasing_phase(traj, model.lambda, t));
}

// ---------------------------------------------------------------------------
// Closed forms for Gaussian phase statistics

/// Var[integral_0^t f] for OU noise with unit variance: 2 tau_c^2 (x - 1 + e^{-x}), x = t/tau_c.
inline double ou_integral_variance(double tau_c, double t) {
  const double x = t / tau_c;
  // -expm1(-x) - x underflows badly for tiny x; use the series there.
  if (x < 1e-4) return tau_c * tau_c * x * x * (1.0 - x / 3.0 + x * x / 12.0);
  return 2.0 * tau_c * tau_c * (x + std::expm1(-x));
}

/// E[e^{-2i phi}] for Gaussian phi with the given integral variance.
inline double gaussian_phase_average(double lambda, double integral_variance) {
  return std::exp(-2.0 * lambda * lambda * integral_variance);
}

}  // namespace zeno
