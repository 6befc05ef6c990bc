#pragma once

// Relaxation plus time-dependent 1/f dephasing, in the interaction picture:
//
//   d rho/dt = -(G1/2)(s+s- rho + rho s+s- - 2 s- rho s+)
//              -(G2^2 t / 2)[sz,[sz,rho]]
//
// The dephasing coefficient grows linearly with the time since preparation,
// which is what turns the off-diagonal decay into exp(-(G2 t)^2).

#include "zeno/qubit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace zeno {

struct DecoherenceParams {
  double gamma1 = 0.0;  // 1/ns
  double gamma2 = 0.0;  // 1/ns
  SystemHamiltonian hs{};

  /// Rates from times in ns; an infinite time means no decay channel.
  static DecoherenceParams from_times(double t1, double t2, SystemHamiltonian hs = {}) {
    auto rate = [](double time, const char* name) {
      if (!(time > 0.0)) throw std::invalid_argument(std::string(name) + " must be > 0");
      return std::isinf(time) ? 0.0 : 1.0 / time;
    };
    DecoherenceParams p{rate(t1, "T1"), rate(t2, "T2"), hs};
    p.validate();
    return p;
  }

  double t1() const { return gamma1 > 0.0 ? 1.0 / gamma1 : std::numeric_limits<double>::infinity(); }
  double t2() const { return gamma2 > 0.0 ? 1.0 / gamma2 : std::numeric_limits<double>::infinity(); }

  void validate() const {
    if (!(gamma1 >= 0.0) || !std::isfinite(gamma1)) {
      throw std::invalid_argument("gamma1 must be finite and >= 0");
    }
    if (!(gamma2 >= 0.0) || !std::isfinite(gamma2)) {
      throw std::invalid_argument("gamma2 must be finite and >= 0");
    }
    require_finite(hs.epsilon, "epsilon");
    require_finite(hs.delta, "delta");
  }
};

/// Right-hand side on a raw matrix (Runge-Kutta stages are not states).
inline Matrix2 master_rhs(const Matrix2& rho, double t, const DecoherenceParams& p) {
  if (!(t >= 0.0)) throw std::invalid_argument("master_rhs: t must be >= 0");
  const Matrix2 sp = pauli::raising();
  const Matrix2 sm = pauli::lowering();
  const Matrix2 sz = pauli::z();
  const Matrix2 excited = sp * sm;
  const Matrix2 relax = excited * rho + rho * excited - 2.0 * sm * rho * sp;
  const Matrix2 inner = sz * rho - rho * sz;
  const Matrix2 dephase = sz * inner - inner * sz;
  return -0.5 * p.gamma1 * relax - 0.5 * p.gamma2 * p.gamma2 * t * dephase;
}

inline Matrix2 master_rhs(const DensityMatrix& rho, double t, const DecoherenceParams& p) {
  return master_rhs(rho.matrix(), t, p);
}

/// States of a fixed-step integration, interaction picture.
struct IntegrationResult {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
};

/// Largest step integrate() accepts: min(T1, T2)/100, over the finite times.
inline double max_integration_step(const DecoherenceParams& p) {
  const double shortest = std::min(p.t1(), p.t2());
  return std::isinf(shortest) ? std::numeric_limits<double>::infinity() : shortest / 100.0;
}

/// Classical fixed-step RK4 from t=0 to t_end. The step actually used is
/// t_end / ceil(t_end / dt) so that the grid ends exactly on t_end.
/// Throws std::domain_error if any state drifts out of the physical set.
inline IntegrationResult integrate(const DensityMatrix& rho0, const DecoherenceParams& p,
                                   double t_end, double dt) {
  p.validate();
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) {
    throw std::invalid_argument("integrate: t_end must be finite and >= 0");
  }
  if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be > 0");
  if (dt > max_integration_step(p) * (1.0 + 1e-12)) {
    throw std::invalid_argument("integrate: dt = " + std::to_string(dt) +
                                " ns exceeds min(T1, T2)/100 = " +
                                std::to_string(max_integration_step(p)) + " ns");
  }
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double h = steps > 0 ? t_end / static_cast<double>(steps) : 0.0;

  IntegrationResult out;
  out.times.reserve(steps + 1);
  out.states.reserve(steps + 1);
  out.times.push_back(0.0);
  out.states.push_back(rho0);

  Matrix2 rho = rho0.matrix();
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const Matrix2 k1 = master_rhs(rho, t, p);
    const Matrix2 k2 = master_rhs(rho + 0.5 * h * k1, t + 0.5 * h, p);
    const Matrix2 k3 = master_rhs(rho + 0.5 * h * k2, t + 0.5 * h, p);
    const Matrix2 k4 = master_rhs(rho + h * k3, t + h, p);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const double t_next = static_cast<double>(k + 1) * h;
    const auto eig = hermitian_eigenvalues(rho);
    if (eig[0] < -1e-8 || !rho.allFinite()) {
      throw std::domain_error("integrate: non-physical state at t = " + std::to_string(t_next) +
                              " ns (min eigenvalue " + std::to_string(eig[0]) + ")");
    }
    out.times.push_back(t_next);
    out.states.push_back(DensityMatrix::from_matrix(rho, 1e-9));
  }
  return out;
}

/// Interaction-picture solution for rho(0) = |+><+|.
inline DensityMatrix closed_form_rho_interaction(const DecoherenceParams& p, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("closed_form_rho: t must be >= 0");
  const double excited = 0.5 * std::exp(-p.gamma1 * t);
  const double off = 0.5 * std::exp(-0.5 * p.gamma1 * t - p.gamma2 * p.gamma2 * t * t);
  Matrix2 m;
  m << 1.0 - excited, off, off, excited;
  return DensityMatrix::unchecked(m);
}

/// Lab-frame solution for rho(0) = |+><+|: the interaction-picture solution
/// rotated by e^{-i H_s t}.
inline DensityMatrix closed_form_rho(const DecoherenceParams& p, double t) {
  return to_lab_frame(closed_form_rho_interaction(p, t), p.hs, t);
}

/// exp(-(G2 t)^2): the |+> off-diagonal envelope under pure 1/f dephasing.
inline double pure_dephasing_coherence(double gamma2, double t) {
  const double x = gamma2 * t;
  return std::exp(-x * x);
}

}  // namespace zeno
