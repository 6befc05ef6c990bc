#pragma once

#include "zeno/noise.hpp"
#include "zeno/qubit.hpp"
#include "zeno/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <stdexcept>
#include <thread>
#include <vector>

namespace zeno {

/// Trajectories per work unit. Fixed so that partial sums, and therefore
/// the final reduction, do not depend on the number of workers.
inline constexpr std::size_t kBlockSize = 512;

inline unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Runs fn(block) for block = 0..n_blocks-1 across `workers` threads.
/// fn must write only to per-block storage. The first exception thrown by
/// any block is rethrown on the calling thread.
inline void for_each_block(std::size_t n_blocks, unsigned workers,
                           const std::function<void(std::size_t)>& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n_blocks)));
  if (workers <= 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) fn(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t b = next++; b < n_blocks; b = next++) {
        try {
          fn(b);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n_blocks;
        }
      }
    });
  }
  pool.clear();
  if (error) std::rethrow_exception(error);
}

/// Per-element first and second moments of complex 2x2 samples, real and
/// imaginary parts tracked separately.
struct MomentSums {
  Matrix2 sum = Matrix2::Zero();
  Eigen::Matrix2d sum_sq_re = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d sum_sq_im = Eigen::Matrix2d::Zero();

  void add(const Matrix2& m) {
    sum += m;
    sum_sq_re += m.real().cwiseAbs2();
    sum_sq_im += m.imag().cwiseAbs2();
  }
  void merge(const MomentSums& other) {
    sum += other.sum;
    sum_sq_re += other.sum_sq_re;
    sum_sq_im += other.sum_sq_im;
  }
};

struct EnsembleResult {
  std::vector<double> time_grid;
  std::vector<DensityMatrix> mean_rho;
  /// Standard error of the mean per element: real part holds the error of
  /// Re(rho_ij), imaginary part the error of Im(rho_ij).
  std::vector<Matrix2> stderr_rho;
  std::size_t trajectory_count = 0;

  double coherence(std::size_t i) const { return mean_rho[i].coherence(); }
  /// Error of |rho_01| propagated from the Re/Im errors.
  double coherence_stderr(std::size_t i) const {
    const cplx m = mean_rho[i](0, 1);
    const cplx e = stderr_rho[i](0, 1);
    const double a = std::abs(m);
    if (a == 0.0) return std::hypot(e.real(), e.imag());
    return std::hypot(m.real() * e.real(), m.imag() * e.imag()) / a;
  }
};

inline EnsembleResult finalize_moments(std::vector<double> grid, const std::vector<MomentSums>& sums,
                                       std::size_t count) {
  EnsembleResult out;
  out.time_grid = std::move(grid);
  out.trajectory_count = count;
  const double n = static_cast<double>(count);
  for (const MomentSums& s : sums) {
    const Matrix2 mean = s.sum / n;
    auto stderr_of = [&](const Eigen::Matrix2d& sq, const Eigen::Matrix2d& mu) {
      Eigen::Matrix2d var = (sq / n - mu.cwiseAbs2()) * (n / (n - 1.0));
      return Eigen::Matrix2d(var.cwiseMax(0.0).cwiseSqrt() / std::sqrt(n));
    };
    Matrix2 err;
    err.real() = stderr_of(s.sum_sq_re, mean.real());
    err.imag() = stderr_of(s.sum_sq_im, mean.imag());
    out.mean_rho.push_back(DensityMatrix::from_matrix(mean, 1e-9));
    out.stderr_rho.push_back(err);
  }
  return out;
}

/// Mean interaction-picture state over M noise realizations on `grid`.
/// Trajectory j draws from RandomStream(base_seed, j); block partial sums
/// are reduced in block order, so the result is bit-identical for any
/// worker count.
inline EnsembleResult ensemble_average(const PureState& psi0, const NoiseModel& model,
                                       std::span<const double> grid, std::size_t trajectories,
                                       std::uint64_t base_seed, unsigned workers = default_workers()) {
  if (trajectories < 100) {
    throw std::invalid_argument("ensemble_average: need at least 100 trajectories");
  }
  model.validate();
  if (!model.couples_through_sigma_z()) {
    throw std::invalid_argument("ensemble_average: only sigma_z noise coupling is supported");
  }
  validate_grid(grid);

  const DensityMatrix rho0 = DensityMatrix::pure(psi0);
  const std::size_t n_blocks = (trajectories + kBlockSize - 1) / kBlockSize;
  std::vector<std::vector<MomentSums>> partial(n_blocks);

  for_each_block(n_blocks, workers, [&](std::size_t block) {
    std::vector<MomentSums> sums(grid.size());
    const std::size_t begin = block * kBlockSize;
    const std::size_t end = std::min(trajectories, begin + kBlockSize);
    std::vector<double> cumulative;
    for (std::size_t j = begin; j < end; ++j) {
      RandomStream stream(base_seed, j, StreamPurpose::Noise);
      const Trajectory traj = sample(model, model.kind == NoiseKind::QuasiStatic
                                                ? std::span<const double>{}
                                                : grid,
                                     stream);
      if (traj.kind != NoiseKind::QuasiStatic) cumulative = cumulative_integral(traj);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double phi = traj.kind == NoiseKind::QuasiStatic
                               ? model.lambda * traj.values.front() * grid[i]
                               : model.lambda * cumulative[i];
        sums[i].add(apply_phase(rho0, phi).matrix());
      }
    }
    partial[block] = std::move(sums);
  });

  std::vector<MomentSums> total(grid.size());
  for (const auto& block : partial) {
    for (std::size_t i = 0; i < grid.size(); ++i) total[i].merge(block[i]);
  }
  return finalize_moments(std::vector<double>(grid.begin(), grid.end()), total, trajectories);
}

}  // namespace zeno
