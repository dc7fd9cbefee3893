#pragma once

// Truncated Fock-space algebra for a single driven, damped Kerr mode.
//
// All rates are dimensionless (scaled by the anharmonicity); the circuit
// mapping in circuit.hpp is the only place SI units appear.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "duffing/errors.hpp"

namespace duffing {

using complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Numerical floors shared by every module.
namespace tol {
inline constexpr double herm = 1e-9;      // max |rho - rho^dagger|
inline constexpr double trace = 1e-9;     // |Tr rho - 1|
inline constexpr double psd = 1e-8;       // smallest admissible eigenvalue is -psd
inline constexpr double eig = 1e-8;       // |lambda_0| for the stationary eigenvalue
inline constexpr double resid = 1e-10;    // max |S[rho0]|
inline constexpr double boundary = 1e-7;  // |lambda_min| at the metastable extremes
inline constexpr double series = 1e-14;   // relative tail of hypergeometric sums
}  // namespace tol

/// Rotating-frame model rates: H = delta a'a + chi a'^2 a^2 + epsilon (a + a'),
/// single decay channel with rate gamma.
struct ModelParams {
  double delta = 0.0;
  double chi = 1.0;
  double epsilon = 0.0;
  double gamma = 1.0;

  void require_finite() const {
    if (!std::isfinite(delta) || !std::isfinite(chi) || !std::isfinite(epsilon) ||
        !std::isfinite(gamma)) {
      throw Error(ErrorCode::invalid_argument, "model parameters must be finite");
    }
  }

  /// The physical domain of the model: chi > 0, gamma > 0, epsilon >= 0.
  /// Individual operations accept wider inputs where their formulas allow it
  /// (chi = 0 harmonic limit, gamma = 0 closed dynamics, odd-in-epsilon checks).
  void require_physical() const {
    require_finite();
    if (!(chi > 0.0)) throw Error(ErrorCode::invalid_argument, "chi must be > 0");
    if (!(gamma > 0.0)) throw Error(ErrorCode::invalid_argument, "gamma must be > 0");
    if (epsilon < 0.0) throw Error(ErrorCode::invalid_argument, "epsilon must be >= 0");
  }

  ModelParams with_epsilon(double eps) const {
    ModelParams p = *this;
    p.epsilon = eps;
    return p;
  }
  ModelParams with_delta(double d) const {
    ModelParams p = *this;
    p.delta = d;
    return p;
  }
};

inline void require_dimension(int dim) {
  if (dim < 2) {
    throw Error(ErrorCode::invalid_dimension,
                "Fock truncation dimension must be >= 2, got " + std::to_string(dim));
  }
}

// Ladder operators on levels 0..dim-1.

inline Matrix annihilation(int dim) {
  require_dimension(dim);
  Matrix a = Matrix::Zero(dim, dim);
  for (int n = 0; n + 1 < dim; ++n) a(n, n + 1) = std::sqrt(static_cast<double>(n + 1));
  return a;
}

inline Matrix creation(int dim) { return annihilation(dim).adjoint(); }

inline Matrix number_operator(int dim) {
  require_dimension(dim);
  Matrix n = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

inline Matrix parity_operator(int dim) {
  require_dimension(dim);
  Matrix p = Matrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  return p;
}

/// H/hbar in the number basis. Built entry by entry so the result is exactly
/// Hermitian: diagonal delta n + chi n(n-1), off-diagonal epsilon sqrt(n+1).
inline Matrix build_hamiltonian(const ModelParams& p, int dim) {
  require_dimension(dim);
  p.require_finite();
  Matrix h = Matrix::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) {
    const double nn = n;
    h(n, n) = p.delta * nn + p.chi * nn * (nn - 1.0);
    if (n + 1 < dim) {
      const double v = p.epsilon * std::sqrt(nn + 1.0);
      h(n, n + 1) = v;
      h(n + 1, n) = v;
    }
  }
  return h;
}

inline double max_abs(const Matrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_defect(const Matrix& m) {
  return max_abs(m - m.adjoint());
}

/// Eigenvalues (ascending) of the Hermitian part of m.
inline RealVector hermitian_eigenvalues(const Matrix& m) {
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// Hermitian, unit-trace, positive-semidefinite matrix on a truncated Fock
/// space. Construction validates against tol::herm, tol::trace and tol::psd
/// and stores the exactly Hermitian part.
class DensityMatrix {
 public:
  explicit DensityMatrix(const Matrix& m) {
    if (m.rows() != m.cols()) {
      throw Error(ErrorCode::dimension_mismatch, "density matrix must be square");
    }
    require_dimension(static_cast<int>(m.rows()));
    if (!m.allFinite()) throw Error(ErrorCode::invalid_argument, "density matrix has non-finite entries");
    const double herm = hermiticity_defect(m);
    if (herm > tol::herm) {
      throw Error(ErrorCode::non_hermitian,
                  "density matrix is not Hermitian (defect " + std::to_string(herm) + ")");
    }
    m_ = 0.5 * (m + m.adjoint());
    const double tr = m_.trace().real();
    if (std::abs(tr - 1.0) > tol::trace) {
      throw Error(ErrorCode::invalid_argument,
                  "density matrix trace is " + std::to_string(tr) + ", expected 1");
    }
    const double lmin = hermitian_eigenvalues(m_).minCoeff();
    if (lmin < -tol::psd) {
      throw Error(ErrorCode::invalid_argument,
                  "density matrix is not positive semidefinite (min eigenvalue " +
                      std::to_string(lmin) + ")");
    }
  }

  static DensityMatrix fock(int n, int dim) {
    require_dimension(dim);
    if (n < 0 || n >= dim) throw Error(ErrorCode::invalid_argument, "Fock level outside truncation");
    Matrix m = Matrix::Zero(dim, dim);
    m(n, n) = 1.0;
    return DensityMatrix(m);
  }

  static DensityMatrix pure(const Vector& psi) {
    const double norm = psi.norm();
    if (norm == 0.0) throw Error(ErrorCode::invalid_argument, "zero state vector");
    const Vector u = psi / norm;
    return DensityMatrix(u * u.adjoint());
  }

  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& matrix() const { return m_; }
  complex operator()(int i, int j) const { return m_(i, j); }

 private:
  Matrix m_;
};

inline complex expectation(const Matrix& op, const Matrix& rho) {
  if (op.rows() != rho.rows() || op.cols() != rho.cols() || op.rows() != op.cols()) {
    throw Error(ErrorCode::dimension_mismatch, "operator and state dimensions differ");
  }
  // Tr(op rho) = sum_ij op_ij rho_ji
  return op.transpose().cwiseProduct(rho).sum();
}

inline complex expectation(const Matrix& op, const DensityMatrix& rho) {
  return expectation(op, rho.matrix());
}

/// -sum x log2 x over the spectrum, eigenvalues below tol::psd counted as zero.
inline double entropy_of_spectrum(const RealVector& w) {
  double s = 0.0;
  for (double x : w) {
    if (x > tol::psd) s -= x * std::log2(x);
  }
  return s;
}

/// Von Neumann entropy in bits. Accepts any Hermitian matrix; the spectrum
/// is clamped at the PSD floor.
inline double von_neumann_entropy(const Matrix& rho) {
  if (rho.rows() != rho.cols()) throw Error(ErrorCode::dimension_mismatch, "matrix must be square");
  const double herm = hermiticity_defect(rho);
  if (herm > tol::herm) {
    throw Error(ErrorCode::non_hermitian,
                "entropy of a non-Hermitian matrix (defect " + std::to_string(herm) + ")");
  }
  return entropy_of_spectrum(hermitian_eigenvalues(rho));
}

inline double von_neumann_entropy(const DensityMatrix& rho) {
  return von_neumann_entropy(rho.matrix());
}

inline double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "binary entropy needs x in [0, 1]");
  }
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

inline double purity(const Matrix& rho) { return rho.cwiseAbs2().sum(); }

}  // namespace duffing
