#include "zeno/analysis.hpp"
#include "zeno/master_equation.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <vector>

namespace zeno {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

DensityMatrix ground() { return DensityMatrix::pure(PureState::ground()); }
DensityMatrix excited() { return DensityMatrix::pure(PureState::excited()); }
DensityMatrix plus() { return DensityMatrix::pure(plus_state()); }

TEST(DecoherenceParams, FromTimes) {
  const DecoherenceParams p = DecoherenceParams::from_times(1000.0, 20.0);
  EXPECT_DOUBLE_EQ(p.gamma1, 1e-3);
  EXPECT_DOUBLE_EQ(p.gamma2, 0.05);
  EXPECT_DOUBLE_EQ(p.t2(), 20.0);
  const DecoherenceParams q = DecoherenceParams::from_times(kInf, 50.0);
  EXPECT_EQ(q.gamma1, 0.0);
  EXPECT_TRUE(std::isinf(q.t1()));
  EXPECT_THROW(DecoherenceParams::from_times(-1.0, 20.0), std::invalid_argument);
  EXPECT_THROW((DecoherenceParams{-0.1, 0.0, {}}.validate()), std::invalid_argument);
}

TEST(MasterRhs, GroundStateIsStationary) {
  const DecoherenceParams p = DecoherenceParams::from_times(100.0, 20.0);
  EXPECT_EQ(max_abs(master_rhs(ground(), 3.0, p)), 0.0);
}

TEST(MasterRhs, ExcitedStateRelaxes) {
  const DecoherenceParams p = DecoherenceParams::from_times(100.0, 20.0);
  const Matrix2 expected = p.gamma1 * (ground().matrix() - excited().matrix());
  EXPECT_LE(max_abs(master_rhs(excited(), 3.0, p) - expected), 1e-16);
}

TEST(MasterRhs, DephasingVanishesAtTimeZero) {
  const DecoherenceParams with = DecoherenceParams::from_times(100.0, 20.0);
  const DecoherenceParams without = DecoherenceParams::from_times(100.0, kInf);
  EXPECT_LE(max_abs(master_rhs(plus(), 0.0, with) - master_rhs(plus(), 0.0, without)), 1e-18);
  EXPECT_GT(max_abs(master_rhs(plus(), 1.0, with) - master_rhs(plus(), 1.0, without)), 1e-4);
}

TEST(MasterRhs, TracelessAndRejectsNegativeTime) {
  const DecoherenceParams p = DecoherenceParams::from_times(70.0, 15.0);
  for (double t : {0.0, 1.0, 10.0, 100.0}) {
    EXPECT_LE(std::abs(master_rhs(plus(), t, p).trace()), 1e-12);
  }
  EXPECT_THROW(master_rhs(plus(), -1.0, p), std::invalid_argument);
}

TEST(Integrate, NoDecayKeepsInitialState) {
  const DecoherenceParams p = DecoherenceParams::from_times(kInf, kInf);
  const IntegrationResult r = integrate(plus(), p, 50.0, 0.5);
  for (const auto& s : r.states) EXPECT_LE(max_abs(s.matrix() - plus().matrix()), 1e-12);
}

TEST(Integrate, FourthOrderConvergence) {
  const DecoherenceParams p = DecoherenceParams::from_times(1000.0, 20.0);
  const double dt = 0.2;  // min(T1, T2)/100
  auto final_state = [&](double h) { return integrate(plus(), p, 60.0, h).states.back().matrix(); };
  const Matrix2 a = final_state(dt), b = final_state(dt / 2), c = final_state(dt / 4);
  const double ratio = max_abs(a - b) / max_abs(b - c);
  EXPECT_GT(ratio, 14.0);
  EXPECT_LT(ratio, 18.0);
}

TEST(Integrate, StepMustResolveFastestRate) {
  const DecoherenceParams p = DecoherenceParams::from_times(1000.0, 20.0);
  EXPECT_THROW(integrate(plus(), p, 10.0, 0.3), std::invalid_argument);
  EXPECT_THROW(integrate(plus(), p, -1.0, 0.1), std::invalid_argument);
}

TEST(Integrate, ShortensStepToLandOnEndTime) {
  const DecoherenceParams p = DecoherenceParams::from_times(1000.0, 20.0);
  const IntegrationResult r = integrate(plus(), p, 1.0, 0.15);
  EXPECT_EQ(r.times.size(), 8u);
  EXPECT_DOUBLE_EQ(r.times.back(), 1.0);
}

struct ParamCase {
  double t1, t2;
};

class IntegratorVsClosedForm : public ::testing::TestWithParam<ParamCase> {};

TEST_P(IntegratorVsClosedForm, AgreeElementwise) {
  const auto [t1, t2] = GetParam();
  const DecoherenceParams p = DecoherenceParams::from_times(t1, t2, SystemHamiltonian{0.8, 0.0});
  const double horizon = 5.0 * (std::isinf(t2) ? t1 : t2);
  const double dt = max_integration_step(p) / 10.0;
  const IntegrationResult r = integrate(plus(), p, horizon, dt);
  double worst = 0.0;
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    const DensityMatrix lab = to_lab_frame(r.states[i], p.hs, r.times[i]);
    worst = std::max(worst, max_abs(lab.matrix() - closed_form_rho(p, r.times[i]).matrix()));
    EXPECT_NEAR(r.states[i].trace(), 1.0, 1e-10);
    EXPECT_GE(r.states[i].eigenvalues()[0], -1e-8);
  }
  EXPECT_LE(worst, 1e-8);
}

INSTANTIATE_TEST_SUITE_P(ParameterSets, IntegratorVsClosedForm,
                         ::testing::Values(ParamCase{1000, 20}, ParamCase{1000, 400},
                                           ParamCase{kInf, 50}, ParamCase{200, kInf}));

TEST(ClosedForm, StartsInPlusState) {
  const DecoherenceParams p = DecoherenceParams::from_times(1000.0, 20.0, SystemHamiltonian{1.0, 0.0});
  EXPECT_LE(max_abs(closed_form_rho(p, 0.0).matrix() - plus().matrix()), 1e-15);
}

TEST(ClosedForm, ReferencePointInRotatingFrame) {
  // Oracle values evaluated at 30 digits: 1/2 e^{-0.02}, 1 - 1/2 e^{-0.02}, 1/2 e^{-1.01}.
  const DecoherenceParams p = DecoherenceParams::from_times(1000.0, 20.0);
  const DensityMatrix rho = closed_form_rho_interaction(p, 20.0);
  EXPECT_NEAR(rho(1, 1).real(), 0.490099336653377651, 1e-15);
  EXPECT_NEAR(rho(0, 0).real(), 0.509900663346622349, 1e-15);
  EXPECT_NEAR(rho.coherence(), 0.182109489785761660, 1e-15);
}

TEST(ClosedForm, RelaxesToGround) {
  const DecoherenceParams p = DecoherenceParams::from_times(10.0, 20.0);
  EXPECT_LE(max_abs(closed_form_rho_interaction(p, 1e4).matrix() - ground().matrix()), 1e-15);
  EXPECT_THROW(closed_form_rho(p, -1.0), std::invalid_argument);
}

TEST(ClosedForm, ValidStateEverywhere) {
  const DecoherenceParams p = DecoherenceParams::from_times(300.0, 40.0, SystemHamiltonian{2.0, 0.1});
  for (double t = 0.0; t < 500.0; t += 7.0) {
    EXPECT_TRUE(DensityMatrix::satisfies_invariants(closed_form_rho(p, t).matrix()));
  }
}

TEST(ClosedForm, ShortTimeDeficitIsQuadratic) {
  // 1 - e^{-(G2 t)^2} = G2^2 t^2 - G2^4 t^4/2 + ...; fitting deficit/t^2
  // against t^2 recovers G2^2 as the intercept.
  const DecoherenceParams p = DecoherenceParams::from_times(kInf, 20.0);
  std::vector<double> x, y;
  for (int i = 1; i <= 20; ++i) {
    const double t = 0.1 * p.t2() * i / 20.0;
    const double deficit = 1.0 - 2.0 * closed_form_rho_interaction(p, t).coherence();
    x.push_back(t * t);
    y.push_back(deficit / (t * t));
  }
  EXPECT_NEAR(fit_line(x, y).intercept / (p.gamma2 * p.gamma2), 1.0, 0.01);
}

TEST(PureDephasingCoherence, ReferenceValues) {
  EXPECT_EQ(pure_dephasing_coherence(0.05, 0.0), 1.0);
  EXPECT_NEAR(pure_dephasing_coherence(0.05, 20.0), 0.36788, 1e-5);
  const DecoherenceParams p = DecoherenceParams::from_times(kInf, 20.0);
  for (double t : {3.0, 11.0, 37.0}) {
    EXPECT_NEAR(2.0 * closed_form_rho_interaction(p, t).coherence(),
                pure_dephasing_coherence(p.gamma2, t), 1e-15);
  }
}

}  // namespace
}  // namespace zeno
