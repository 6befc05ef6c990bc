#pragma once

// Exact 2x2 complex algebra for a single qubit.
//
// Conventions: sigma_z|0> = +|0>, |1> is the excited state and
// sigma_plus|0> = |1>. Time is in ns, angular frequencies in rad/ns.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace zeno {

using cplx = std::complex<double>;
using Matrix2 = Eigen::Matrix2cd;
using Vector2 = Eigen::Vector2cd;

inline constexpr double kTraceTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kPositivityTolerance = 1e-10;
inline constexpr double kUnitaryCheckTolerance = 1e-9;

namespace pauli {

inline Matrix2 identity() { return Matrix2::Identity(); }

inline Matrix2 x() {
  Matrix2 m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline Matrix2 y() {
  Matrix2 m;
  m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  return m;
}

inline Matrix2 z() {
  Matrix2 m;
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}

/// |1><0|, raises the ground state to the excited state.
inline Matrix2 raising() {
  Matrix2 m = Matrix2::Zero();
  m(1, 0) = 1.0;
  return m;
}

/// |0><1|
inline Matrix2 lowering() {
  Matrix2 m = Matrix2::Zero();
  m(0, 1) = 1.0;
  return m;
}

}  // namespace pauli

inline double max_abs(const Matrix2& m) { return m.cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const Matrix2& m, double tol = kHermitianTolerance) {
  return max_abs(m - m.adjoint()) <= tol;
}

inline bool is_unitary(const Matrix2& m, double tol = kUnitaryCheckTolerance) {
  return max_abs(m * m.adjoint() - Matrix2::Identity()) <= tol;
}

/// Eigenvalues of the Hermitian part of m, ascending.
inline std::array<double, 2> hermitian_eigenvalues(const Matrix2& m) {
  const double a = m(0, 0).real();
  const double d = m(1, 1).real();
  const cplx b = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
  const double mean = 0.5 * (a + d);
  const double radius = std::sqrt(0.25 * (a - d) * (a - d) + std::norm(b));
  return {mean - radius, mean + radius};
}

/// A Hermitian 2x2 operator: Hamiltonian, noise coupling, projector or
/// unitary, depending on context.
class QubitOperator {
 public:
  QubitOperator() : m_(Matrix2::Zero()) {}
  explicit QubitOperator(Matrix2 m) : m_(std::move(m)) {}

  const Matrix2& matrix() const { return m_; }
  cplx operator()(int row, int col) const { return m_(row, col); }

  bool hermitian(double tol = kHermitianTolerance) const { return is_hermitian(m_, tol); }
  bool unitary(double tol = kUnitaryCheckTolerance) const { return is_unitary(m_, tol); }
  bool commutes_with(const QubitOperator& other, double tol = 1e-12) const {
    return max_abs(m_ * other.m_ - other.m_ * m_) <= tol;
  }

  friend QubitOperator operator*(const QubitOperator& a, const QubitOperator& b) {
    return QubitOperator(a.m_ * b.m_);
  }

 private:
  Matrix2 m_;
};

class PureState {
 public:
  /// Throws std::invalid_argument unless |a0|^2 + |a1|^2 = 1 within 1e-12.
  PureState(cplx a0, cplx a1) : v_(a0, a1) {
    if (std::abs(v_.squaredNorm() - 1.0) > 1e-12) {
      throw std::invalid_argument("PureState: amplitudes are not normalized");
    }
  }

  static PureState ground() { return {1.0, 0.0}; }
  static PureState excited() { return {0.0, 1.0}; }

  const Vector2& amplitudes() const { return v_; }
  cplx operator[](int i) const { return v_(i); }

 private:
  Vector2 v_;
};

/// u|psi>; u must be unitary.
inline PureState apply(const QubitOperator& u, const PureState& psi) {
  const Vector2 v = u.matrix() * psi.amplitudes();
  return {v(0), v(1)};
}

/// (|0> + |1>)/sqrt(2), the +1 eigenstate of sigma_x.
inline PureState plus_state() {
  const double h = 1.0 / std::sqrt(2.0);
  return {h, h};
}

inline PureState minus_state() {
  const double h = 1.0 / std::sqrt(2.0);
  return {h, -h};
}

class DensityMatrix {
 public:
  /// Validated construction: unit trace and Hermiticity within `tol`,
  /// eigenvalues >= -1e-10 (or -tol if larger).
  static DensityMatrix from_matrix(const Matrix2& m, double tol = kTraceTolerance) {
    std::string why;
    if (!satisfies_invariants(m, tol, &why)) {
      throw std::invalid_argument("DensityMatrix: " + why);
    }
    return DensityMatrix(m);
  }

  /// Skips validation; for hot loops whose output is valid by construction.
  static DensityMatrix unchecked(const Matrix2& m) { return DensityMatrix(m); }

  static DensityMatrix pure(const PureState& psi) {
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
  }

  static DensityMatrix maximally_mixed() { return DensityMatrix(0.5 * Matrix2::Identity()); }

  static bool satisfies_invariants(const Matrix2& m, double tol = kTraceTolerance,
                                   std::string* why = nullptr) {
    auto fail = [&](const char* msg) {
      if (why) *why = msg;
      return false;
    };
    if (!m.allFinite()) return fail("non-finite element");
    if (std::abs(m.trace() - 1.0) > tol) return fail("trace differs from 1");
    if (!is_hermitian(m, tol)) return fail("not Hermitian");
    if (hermitian_eigenvalues(m)[0] < -std::max(kPositivityTolerance, tol)) {
      return fail("negative eigenvalue");
    }
    return true;
  }

  const Matrix2& matrix() const { return m_; }
  cplx operator()(int row, int col) const { return m_(row, col); }

  double trace() const { return m_.trace().real(); }
  double purity() const { return (m_ * m_).trace().real(); }
  std::array<double, 2> eigenvalues() const { return hermitian_eigenvalues(m_); }
  /// |<0|rho|1>|
  double coherence() const { return std::abs(m_(0, 1)); }

 private:
  explicit DensityMatrix(Matrix2 m) : m_(std::move(m)) {}

  Matrix2 m_;
};

/// (1/2) epsilon sigma_z + (1/2) delta sigma_x.
struct SystemHamiltonian {
  double epsilon = 0.0;
  double delta = 0.0;

  QubitOperator matrix() const {
    return QubitOperator(0.5 * epsilon * pauli::z() + 0.5 * delta * pauli::x());
  }

  /// The part kept in the decoherence model, (1/2) epsilon sigma_z.
  QubitOperator retained() const { return QubitOperator(0.5 * epsilon * pauli::z()); }

  /// Dropping delta from the decoherence structure is only justified for
  /// delta << epsilon.
  bool delta_negligible(double max_ratio = 0.1) const {
    if (delta == 0.0) return true;
    return epsilon != 0.0 && std::abs(delta / epsilon) <= max_ratio;
  }

  /// True when the noise coupling commutes with the retained Hamiltonian.
  bool commuting_noise_valid(const QubitOperator& noise_op) const {
    return retained().commutes_with(noise_op);
  }

  /// exp(-i H t), closed form for a 2x2 Hermitian traceless generator.
  QubitOperator propagator(double time) const {
    const double omega = std::hypot(epsilon, delta);
    if (omega == 0.0) return QubitOperator(Matrix2::Identity());
    const double half = 0.5 * omega * time;
    const Matrix2 n_sigma = (epsilon * pauli::z() + delta * pauli::x()) / omega;
    return QubitOperator(std::cos(half) * Matrix2::Identity() -
                         cplx(0.0, std::sin(half)) * n_sigma);
  }
};

inline void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) {
    throw std::invalid_argument(std::string(what) + " must be finite");
  }
}

/// exp(-i angle sigma_y / 2)
inline QubitOperator rotation_y(double angle) {
  require_finite(angle, "rotation angle");
  const double c = std::cos(0.5 * angle);
  const double s = std::sin(0.5 * angle);
  Matrix2 m;
  m << c, -s, s, c;
  return QubitOperator(m);
}

/// U rho U^dagger. Throws std::invalid_argument if u is not unitary within 1e-9.
inline DensityMatrix evolve_unitary(const DensityMatrix& rho, const QubitOperator& u) {
  if (!u.unitary()) throw std::invalid_argument("evolve_unitary: operator is not unitary");
  return DensityMatrix::unchecked(u.matrix() * rho.matrix() * u.matrix().adjoint());
}

/// Interaction picture to lab frame: e^{-iHt} rho_I e^{iHt}.
inline DensityMatrix to_lab_frame(const DensityMatrix& rho_interaction,
                                  const SystemHamiltonian& hs, double time) {
  return evolve_unitary(rho_interaction, hs.propagator(time));
}

inline DensityMatrix to_interaction_frame(const DensityMatrix& rho_lab,
                                          const SystemHamiltonian& hs, double time) {
  return evolve_unitary(rho_lab, hs.propagator(-time));
}

/// Projector onto e^{-i H_s t}|psi>.
inline QubitOperator corotating_projector(const PureState& psi, const SystemHamiltonian& hs,
                                          double time) {
  const Vector2 v = hs.propagator(time).matrix() * psi.amplitudes();
  return QubitOperator(v * v.adjoint());
}

/// <psi| e^{iH_s t} rho e^{-iH_s t} |psi>: overlap of rho with the
/// noise-free evolution of psi.
inline double dynamical_fidelity(const DensityMatrix& rho, const PureState& psi,
                                 const SystemHamiltonian& hs, double time) {
  const Vector2 v = hs.propagator(time).matrix() * psi.amplitudes();
  const cplx f = v.dot(rho.matrix() * v);
  if (std::abs(f.imag()) >= 1e-10) {
    throw std::logic_error("dynamical_fidelity: overlap has an imaginary part");
  }
  return f.real();
}

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

inline BlochVector bloch_vector(const DensityMatrix& rho) {
  const Matrix2& m = rho.matrix();
  return {(m * pauli::x()).trace().real(), (m * pauli::y()).trace().real(),
          (m * pauli::z()).trace().real()};
}

}  // namespace zeno
