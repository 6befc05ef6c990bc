#include "zeno/noise.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

namespace zeno {
namespace {

TEST(QuasiStatic, SameSeedSameValue) {
  const NoiseModel m = NoiseModel::quasi_static(0.1);
  EXPECT_EQ(sample_quasi_static(m, 17).values, sample_quasi_static(m, 17).values);
  EXPECT_NE(sample_quasi_static(m, 17).values, sample_quasi_static(m, 18).values);
}

TEST(QuasiStatic, StandardNormalMoments) {
  const NoiseModel m = NoiseModel::quasi_static(0.1);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0, sum_cube = 0.0, sum_four = 0.0;
  for (int s = 0; s < n; ++s) {
    const double f = sample_quasi_static(m, static_cast<std::uint64_t>(s)).values.front();
    sum += f;
    sum_sq += f * f;
    sum_cube += f * f * f;
    sum_four += f * f * f * f;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sum_sq / n - (sum / n) * (sum / n), 1.0, 0.02);
  // Gaussian structure: odd moments vanish, E f^4 = 3. sd(f^3) = sqrt(15), sd(f^4) = sqrt(96).
  EXPECT_NEAR(sum_cube / n, 0.0, 4.0 * std::sqrt(15.0 / n));
  EXPECT_NEAR(sum_four / n, 3.0, 4.0 * std::sqrt(96.0 / n));
}

TEST(QuasiStatic, DoubleIntegralIsHalfTSquared) {
  // E[int_0^t int_0^t' f(t') f(s) ds dt'] = E[f0^2] t^2/2.
  const NoiseModel m = NoiseModel::quasi_static(1.0);
  const double t = 3.0;
  const int n = 100000;
  double acc = 0.0;
  for (int s = 0; s < n; ++s) {
    const double f = sample_quasi_static(m, static_cast<std::uint64_t>(s)).values.front();
    acc += f * f * t * t / 2.0;
  }
  // sd of f^2 is sqrt(2)
  EXPECT_NEAR(acc / n, t * t / 2.0, 4.0 * std::sqrt(2.0 / n) * t * t / 2.0);
}

TEST(OrnsteinUhlenbeck, LagAutocorrelationMatchesExponential) {
  const double tau_c = 1.0;
  const NoiseModel m = NoiseModel::ornstein_uhlenbeck(0.1, tau_c);
  const std::vector<double> grid = uniform_grid(1.0, 0.1);
  const int n = 100000;
  const std::vector<int> lags = {0, 1, 3, 5, 10};
  std::vector<double> sum(lags.size(), 0.0), sum_sq(lags.size(), 0.0);
  for (int s = 0; s < n; ++s) {
    const Trajectory tr = sample_ou(m, grid, static_cast<std::uint64_t>(s));
    for (std::size_t l = 0; l < lags.size(); ++l) {
      const double prod = tr.values[0] * tr.values[static_cast<std::size_t>(lags[l])];
      sum[l] += prod;
      sum_sq[l] += prod * prod;
    }
  }
  for (std::size_t l = 0; l < lags.size(); ++l) {
    const double mean = sum[l] / n;
    const double se = std::sqrt((sum_sq[l] / n - mean * mean) / (n - 1));
    const double expected = std::exp(-lags[l] * 0.1 / tau_c);
    EXPECT_LE(std::abs(mean - expected), 3.0 * se) << "lag " << lags[l];
  }
}

TEST(OrnsteinUhlenbeck, LongCorrelationTimeIsNearlyStatic) {
  const NoiseModel m = NoiseModel::ornstein_uhlenbeck(0.1, 1e6);
  const std::vector<double> grid = uniform_grid(10.0, 0.1);
  const Trajectory tr = sample_ou(m, grid, 5);
  double worst = 0.0;
  for (double f : tr.values) worst = std::max(worst, std::abs(f - tr.values.front()));
  // Increments have sd sqrt(2 dt/tau_c) ~ 4.5e-4 per step, ~4.5e-3 over 100 steps.
  EXPECT_LT(worst, 0.03);
}

TEST(OrnsteinUhlenbeck, SameSeedSameTrajectory) {
  const NoiseModel m = NoiseModel::ornstein_uhlenbeck(0.1, 2.0);
  const std::vector<double> grid = uniform_grid(5.0, 0.2);
  EXPECT_EQ(sample_ou(m, grid, 99).values, sample_ou(m, grid, 99).values);
}

TEST(OrnsteinUhlenbeck, RejectsCoarseGrid) {
  const NoiseModel m = NoiseModel::ornstein_uhlenbeck(0.1, 1.0);
  const std::vector<double> grid = uniform_grid(5.0, 0.2);
  EXPECT_THROW(sample_ou(m, grid, 1), std::invalid_argument);
}

TEST(OrnsteinUhlenbeck, RejectsBadModelsAndGrids) {
  EXPECT_THROW(sample_ou(NoiseModel::ornstein_uhlenbeck(0.1, 0.0), uniform_grid(1.0, 0.01), 1),
               std::invalid_argument);
  EXPECT_THROW(sample_ou(NoiseModel::white(0.1), uniform_grid(1.0, 0.01), 1), std::invalid_argument);
  const std::vector<double> not_increasing = {0.0, 0.05, 0.05};
  EXPECT_THROW(sample_ou(NoiseModel::ornstein_uhlenbeck(0.1, 1.0), not_increasing, 1),
               std::invalid_argument);
  const std::vector<double> late_start = {0.5, 0.55};
  EXPECT_THROW(sample_ou(NoiseModel::ornstein_uhlenbeck(0.1, 1.0), late_start, 1),
               std::invalid_argument);
}

TEST(DephasingPhase, ConstantIntegrand) {
  Trajectory tr;
  tr.kind = NoiseKind::QuasiStatic;
  tr.sample_times = {0.0};
  tr.values = {0.5};
  EXPECT_DOUBLE_EQ(dephasing_phase(tr, 0.1, 10.0), 0.5);
  EXPECT_EQ(dephasing_phase(tr, 0.0, 10.0), 0.0);
}

TEST(DephasingPhase, OutsideGridThrows) {
  const NoiseModel m = NoiseModel::ornstein_uhlenbeck(0.1, 1.0);
  const Trajectory tr = sample_ou(m, uniform_grid(2.0, 0.1), 3);
  EXPECT_THROW(dephasing_phase(tr, 0.1, 2.5), std::invalid_argument);
  EXPECT_THROW(dephasing_phase(tr, 0.1, -0.1), std::invalid_argument);
  EXPECT_NO_THROW(dephasing_phase(tr, 0.1, 1.234));
}

TEST(DephasingPhase, TrapezoidAgreesWithHalfStepRefinement) {
  // The refined path shares every other sample with the coarse one; the
  // reference integral is accumulated here, independently of the library.
  const double tau_c = 1.0;
  const double h = tau_c / 10000.0;
  const NoiseModel m = NoiseModel::ornstein_uhlenbeck(1.0, tau_c);
  const std::vector<double> fine_grid = uniform_grid(tau_c, h / 2.0);
  const double scale = std::sqrt(ou_integral_variance(tau_c, tau_c));
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Trajectory fine = sample_ou(m, fine_grid, seed);
    Trajectory coarse;
    coarse.kind = NoiseKind::OrnsteinUhlenbeck;
    for (std::size_t i = 0; i < fine.values.size(); i += 2) {
      coarse.sample_times.push_back(fine.sample_times[i]);
      coarse.values.push_back(fine.values[i]);
    }
    double reference = 0.0;
    for (std::size_t i = 1; i < fine.values.size(); ++i) {
      reference += 0.5 * (fine.sample_times[i] - fine.sample_times[i - 1]) *
                   (fine.values[i] + fine.values[i - 1]);
    }
    const double coarse_phase = dephasing_phase(coarse, 1.0, tau_c);
    EXPECT_LE(std::abs(coarse_phase - reference), 1e-3 * scale) << "seed " << seed;
  }
}

TEST(TrajectoryRho, ZeroPhaseLeavesStateUnchanged) {
  const NoiseModel m = NoiseModel::quasi_static(0.0);
  const Trajectory tr = sample_quasi_static(m, 1);
  const DensityMatrix rho = trajectory_rho(plus_state(), tr, m, 5.0);
  EXPECT_LE(max_abs(rho.matrix() - DensityMatrix::pure(plus_state()).matrix()), 1e-15);
}

TEST(TrajectoryRho, QuarterPiPhaseRotatesToY) {
  // phi = lambda f0 t = pi/4 with f0 = 1.
  Trajectory tr;
  tr.kind = NoiseKind::QuasiStatic;
  tr.sample_times = {0.0};
  tr.values = {1.0};
  const NoiseModel m = NoiseModel::quasi_static(std::numbers::pi / 4.0);
  const BlochVector b = bloch_vector(trajectory_rho(plus_state(), tr, m, 1.0));
  EXPECT_NEAR(b.x, 0.0, 1e-15);
  // exp(-i phi sz) is a right-handed rotation by 2 phi about z: +x -> +y.
  EXPECT_NEAR(b.y, 1.0, 1e-15);
  EXPECT_NEAR(b.z, 0.0, 1e-15);
}

TEST(TrajectoryRho, DiagonalUnchangedAndStatePure) {
  const NoiseModel m = NoiseModel::ornstein_uhlenbeck(0.7, 1.0);
  const Trajectory tr = sample_ou(m, uniform_grid(3.0, 0.05), 8);
  const PureState psi(std::sqrt(0.3), cplx(0.0, std::sqrt(0.7)));
  const DensityMatrix rho0 = DensityMatrix::pure(psi);
  for (double t : {0.0, 0.4, 1.9, 3.0}) {
    const DensityMatrix rho = trajectory_rho(psi, tr, m, t);
    EXPECT_EQ(rho(0, 0), rho0(0, 0));
    EXPECT_EQ(rho(1, 1), rho0(1, 1));
    EXPECT_NEAR(rho.purity(), 1.0, 1e-14);
  }
}

TEST(TrajectoryRho, RejectsNonSigmaZCoupling) {
  NoiseModel m = NoiseModel::quasi_static(0.1);
  m.coupling = QubitOperator(pauli::x());
  const Trajectory tr = sample_quasi_static(NoiseModel::quasi_static(0.1), 1);
  EXPECT_THROW(trajectory_rho(plus_state(), tr, m, 1.0), std::invalid_argument);
}

TEST(OuIntegralVariance, MatchesQuadrature) {
  // Var = 2 int_0^t (t - u) exp(-u/tau_c) du, by composite Simpson.
  const double tau_c = 1.3;
  for (double t : {0.01, 0.5, 4.0, 60.0}) {
    const int n = 4000;
    const double h = t / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double u = i * h;
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += w * (t - u) * std::exp(-u / tau_c);
    }
    acc *= 2.0 * h / 3.0;
    EXPECT_NEAR(ou_integral_variance(tau_c, t) / acc, 1.0, 1e-9) << "t=" << t;
  }
}

}  // namespace
}  // namespace zeno
