#pragma once

// Lindblad generator in explicit matrix form, its stationary state, its
// slowest eigenmodes, and the extremal metastable states built from them.
//
// Vectorization is row-major: rho(k, l) sits at index k * dim + l.

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include "duffing/fock.hpp"
#include "duffing/krylov.hpp"
#include "duffing/semiclassical.hpp"

namespace duffing {

using SparseMatrix = Eigen::SparseMatrix<complex>;

inline int vec_index(int k, int l, int dim) { return k * dim + l; }

inline Vector vectorize(const Matrix& rho) {
  const int d = static_cast<int>(rho.rows());
  Vector v(d * d);
  for (int k = 0; k < d; ++k)
    for (int l = 0; l < d; ++l) v(vec_index(k, l, d)) = rho(k, l);
  return v;
}

inline Matrix unvectorize(const Vector& v, int dim) {
  Matrix m(dim, dim);
  for (int k = 0; k < dim; ++k)
    for (int l = 0; l < dim; ++l) m(k, l) = v(vec_index(k, l, dim));
  return m;
}

class Superoperator {
 public:
  Superoperator(const ModelParams& p, int dim, SparseMatrix s)
      : params_(p), dim_(dim), s_(std::move(s)) {}

  int dim() const { return dim_; }
  const ModelParams& params() const { return params_; }
  const SparseMatrix& matrix() const { return s_; }

  Matrix apply(const Matrix& rho) const {
    if (rho.rows() != dim_ || rho.cols() != dim_) {
      throw Error(ErrorCode::dimension_mismatch, "superoperator applied to a matrix of the wrong size");
    }
    return unvectorize(s_ * vectorize(rho), dim_);
  }

  Matrix dense() const { return Matrix(s_); }

  /// max over (i,j) of |sum_k S_{kk,ij}|; zero for a trace-preserving generator.
  double trace_defect() const {
    Eigen::RowVectorXcd sums = Eigen::RowVectorXcd::Zero(dim_ * dim_);
    for (int col = 0; col < s_.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(s_, col); it; ++it) {
        const int k = static_cast<int>(it.row()) / dim_;
        const int l = static_cast<int>(it.row()) % dim_;
        if (k == l) sums(col) += it.value();
      }
    }
    return sums.cwiseAbs().maxCoeff();
  }

 private:
  ModelParams params_;
  int dim_;
  SparseMatrix s_;
};

namespace detail {

inline void push_coherent_and_damping(std::vector<Eigen::Triplet<complex>>& t, const ModelParams& p,
                                      int d) {
  const complex i(0.0, 1.0);
  for (int k = 0; k < d; ++k) {
    for (int l = 0; l < d; ++l) {
      const double kk = k, ll = l;
      const int row = vec_index(k, l, d);
      const complex diag = -i * (p.delta * (kk - ll) + p.chi * (kk * (kk - 1.0) - ll * (ll - 1.0))) -
                           0.5 * p.gamma * (kk + ll);
      if (diag != 0.0) t.emplace_back(row, row, diag);
      if (p.gamma != 0.0 && k + 1 < d && l + 1 < d) {
        t.emplace_back(row, vec_index(k + 1, l + 1, d), p.gamma * std::sqrt((kk + 1.0) * (ll + 1.0)));
      }
    }
  }
}

// -i eps [a + a', rho]
inline void push_drive(std::vector<Eigen::Triplet<complex>>& t, double eps, int d) {
  if (eps == 0.0) return;
  const complex c(0.0, -eps);
  for (int k = 0; k < d; ++k) {
    for (int l = 0; l < d; ++l) {
      const int row = vec_index(k, l, d);
      if (k + 1 < d) t.emplace_back(row, vec_index(k + 1, l, d), c * std::sqrt(k + 1.0));
      if (k >= 1) t.emplace_back(row, vec_index(k - 1, l, d), c * std::sqrt(static_cast<double>(k)));
      if (l >= 1) t.emplace_back(row, vec_index(k, l - 1, d), -c * std::sqrt(static_cast<double>(l)));
      if (l + 1 < d) t.emplace_back(row, vec_index(k, l + 1, d), -c * std::sqrt(l + 1.0));
    }
  }
}

}  // namespace detail

/// S with entries S_{kl,ij}: coherent diagonal, four drive couplings and the
/// zero-temperature decay term. At most seven nonzeros per row.
inline Superoperator build_superoperator(const ModelParams& p, int dim) {
  require_dimension(dim);
  p.require_finite();
  std::vector<Eigen::Triplet<complex>> t;
  t.reserve(static_cast<std::size_t>(dim) * dim * 7);
  detail::push_coherent_and_damping(t, p, dim);
  detail::push_drive(t, p.epsilon, dim);
  SparseMatrix s(dim * dim, dim * dim);
  s.setFromTriplets(t.begin(), t.end());
  s.makeCompressed();
  return Superoperator(p, dim, std::move(s));
}

/// Drive part V of S = S0 + eps V (unit drive amplitude).
inline SparseMatrix build_drive_superoperator(int dim) {
  require_dimension(dim);
  std::vector<Eigen::Triplet<complex>> t;
  detail::push_drive(t, 1.0, dim);
  SparseMatrix v(dim * dim, dim * dim);
  v.setFromTriplets(t.begin(), t.end());
  v.makeCompressed();
  return v;
}

/// Right-hand side of the master equation by dense operator algebra.
inline Matrix lindblad_rhs(const ModelParams& p, const Matrix& rho) {
  const int d = static_cast<int>(rho.rows());
  const Matrix h = build_hamiltonian(p, d);
  const Matrix a = annihilation(d);
  const Matrix ad = a.adjoint();
  const Matrix n = ad * a;
  const complex i(0.0, 1.0);
  return -i * (h * rho - rho * h) + 0.5 * p.gamma * (2.0 * a * rho * ad - n * rho - rho * n);
}

inline double steady_state_residual(const Superoperator& s, const Matrix& rho) {
  return max_abs(s.apply(rho));
}

namespace detail {

inline Matrix normalize_state(const Matrix& m) {
  Matrix h = 0.5 * (m + m.adjoint());
  return h / h.trace().real();
}

inline std::optional<Matrix> bordered_solve(const Superoperator& s) {
  const int d = s.dim();
  const int n = d * d;
  std::vector<Eigen::Triplet<complex>> t;
  t.reserve(static_cast<std::size_t>(s.matrix().nonZeros()) + d);
  for (int col = 0; col < s.matrix().outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(s.matrix(), col); it; ++it) {
      if (it.row() != 0) t.emplace_back(static_cast<int>(it.row()), col, it.value());
    }
  }
  // row 0 becomes the trace functional
  for (int i = 0; i < d; ++i) t.emplace_back(0, vec_index(i, i, d), complex(1.0, 0.0));
  SparseMatrix a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  a.makeCompressed();

  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) return std::nullopt;
  Vector b = Vector::Zero(n);
  b(0) = 1.0;
  Vector x = lu.solve(b);
  if (lu.info() != Eigen::Success || !x.allFinite()) return std::nullopt;
  const Vector r = b - a * x;
  x += lu.solve(r);
  if (!x.allFinite()) return std::nullopt;
  const Matrix rho = normalize_state(unvectorize(x, d));
  if (!rho.allFinite() || steady_state_residual(s, rho) > tol::resid) return std::nullopt;
  return rho;
}

inline Matrix inverse_iteration_steady_state(const Superoperator& s) {
  const int d = s.dim();
  const int n = d * d;
  const double shift = 1e-9 * std::max(1.0, s.params().gamma);
  SparseMatrix id(n, n);
  id.setIdentity();
  SparseMatrix a = s.matrix() - complex(shift, 0.0) * id;
  a.makeCompressed();
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCode::degenerate_kernel, "superoperator is singular beyond its stationary kernel");
  }
  Vector x = vectorize(Matrix::Identity(d, d) / static_cast<double>(d));
  for (int it = 0; it < 60; ++it) {
    x = lu.solve(x);
    if (!x.allFinite()) break;
    x /= x.norm();
    const Matrix rho = normalize_state(unvectorize(x, d));
    if (rho.allFinite() && steady_state_residual(s, rho) <= tol::resid) return rho;
  }
  throw Error(ErrorCode::iteration_limit, "steady-state inverse iteration did not reach the residual floor");
}

}  // namespace detail

/// Stationary state: S[rho0] = 0, Tr rho0 = 1. Bordered sparse LU (one row
/// replaced by the trace constraint) with a shift-invert fallback.
inline DensityMatrix steady_state(const Superoperator& s) {
  if (!(s.params().gamma > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "steady state needs gamma > 0");
  }
  if (auto rho = detail::bordered_solve(s)) return DensityMatrix(*rho);
  return DensityMatrix(detail::inverse_iteration_steady_state(s));
}

/// Starting truncation: max(10, ceil(4 (n_classical + 1))).
inline int initial_dimension(const ModelParams& p) {
  const double n_cl = classical_steady_states(p).max_photons();
  return std::max(10, static_cast<int>(std::ceil(4.0 * (n_cl + 1.0))));
}

struct ConvergedSteadyState {
  int dim;
  DensityMatrix rho;
  double top_population;  // weight on the two highest retained levels
  double residual;
};

inline constexpr double kTopPopulationFloor = 1e-8;

/// Steady state with the truncation doubled until the two highest levels
/// carry less than 1e-8 of the population. fixed_dim > 0 disables adaptation.
inline ConvergedSteadyState converged_steady_state(const ModelParams& p, int fixed_dim = 0,
                                                   int max_dim = 192) {
  p.require_finite();
  int d = fixed_dim > 0 ? fixed_dim : std::min(initial_dimension(p), max_dim);
  while (true) {
    const Superoperator s = build_superoperator(p, d);
    DensityMatrix rho = steady_state(s);
    const double top = rho(d - 1, d - 1).real() + rho(d - 2, d - 2).real();
    const double res = steady_state_residual(s, rho.matrix());
    if (fixed_dim > 0 || top < kTopPopulationFloor) return {d, std::move(rho), top, res};
    if (d >= max_dim) {
      throw Error(ErrorCode::iteration_limit,
                  "truncation did not converge below dim " + std::to_string(max_dim));
    }
    d = std::min(2 * d, max_dim);
  }
}

// ---------------------------------------------------------------------------
// Spectrum

struct SpectrumSlice {
  std::vector<complex> eigenvalues;         // ascending |lambda|
  std::vector<Matrix> right_eigenmatrices;  // see normalize_eigenmatrix
};

struct SpectrumOptions {
  int dense_max_dim = 32;
  double shift = 0.0;  // 0 selects 0.05 gamma
  KrylovOptions krylov{};
};

inline bool is_real_eigenvalue(complex lambda) {
  return std::abs(lambda.imag()) <= tol::eig * std::max(1.0, std::abs(lambda));
}

/// Stationary mode: unit trace. Real modes: Hermitian, unit Frobenius norm,
/// first non-negligible diagonal entry positive. Complex modes: unit norm,
/// largest entry real positive.
inline Matrix normalize_eigenmatrix(const Matrix& m, complex lambda) {
  if (std::abs(lambda) < tol::eig) return detail::normalize_state(m);
  if (is_real_eigenvalue(lambda)) {
    Matrix h = m + m.adjoint();
    if (h.norm() < 1e-6 * m.norm()) h = complex(0.0, 1.0) * (m - m.adjoint());
    h = 0.5 * (h + h.adjoint());
    h /= h.norm();
    const double floor = 1e-10 * max_abs(h);
    for (int i = 0; i < h.rows(); ++i) {
      const double x = h(i, i).real();
      if (std::abs(x) > floor) {
        if (x < 0.0) h = -h;
        break;
      }
    }
    return h;
  }
  Matrix c = m / m.norm();
  Eigen::Index r = 0, col = 0;
  c.cwiseAbs().maxCoeff(&r, &col);
  const complex ph = c(r, col) / std::abs(c(r, col));
  return c / ph;
}

inline SpectrumSlice low_lying_spectrum(const Superoperator& s, int count, const SpectrumOptions& opt = {}) {
  const int d = s.dim();
  const int n = d * d;
  if (count < 2 || count > n) throw Error(ErrorCode::invalid_argument, "spectrum count must be in [2, dim^2]");

  std::vector<complex> values;
  std::vector<Vector> vectors;
  if (d <= opt.dense_max_dim || count + 6 >= n) {
    Eigen::ComplexEigenSolver<Matrix> es(s.dense());
    if (es.info() != Eigen::Success) throw Error(ErrorCode::eigensolver_failure, "dense eigensolver failed");
    for (int i = 0; i < n; ++i) {
      values.push_back(es.eigenvalues()(i));
      vectors.push_back(es.eigenvectors().col(i));
    }
  } else {
    const double shift = opt.shift != 0.0 ? opt.shift : 0.05 * std::max(s.params().gamma, 1e-3);
    const KrylovResult kr = shift_invert_eigs(s.matrix(), complex(shift, 0.0), count + 4, opt.krylov);
    for (std::size_t i = 0; i < kr.values.size(); ++i) {
      values.push_back(kr.values[i]);
      vectors.push_back(kr.vectors.col(static_cast<Eigen::Index>(i)));
    }
  }

  std::vector<int> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return std::abs(values[x]) < std::abs(values[y]); });

  SpectrumSlice out;
  for (int i = 0; i < count; ++i) {
    const complex lambda = values[order[i]];
    out.eigenvalues.push_back(lambda);
    out.right_eigenmatrices.push_back(normalize_eigenmatrix(unvectorize(vectors[order[i]], d), lambda));
  }
  // conjugate pairs: positive imaginary part first, partner is the exact adjoint
  for (int i = 0; i + 1 < count; ++i) {
    const complex a = out.eigenvalues[i];
    const complex b = out.eigenvalues[i + 1];
    if (is_real_eigenvalue(a) || std::abs(a - std::conj(b)) > 1e-7 * std::max(1.0, std::abs(a))) continue;
    if (a.imag() < 0.0) {
      std::swap(out.eigenvalues[i], out.eigenvalues[i + 1]);
      std::swap(out.right_eigenmatrices[i], out.right_eigenmatrices[i + 1]);
    }
    out.eigenvalues[i + 1] = std::conj(out.eigenvalues[i]);
    out.right_eigenmatrices[i + 1] = out.right_eigenmatrices[i].adjoint();
    ++i;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Metastable extremes

struct MetastablePair {
  DensityMatrix rho_minus;
  DensityMatrix rho_plus;
  double beta_minus;  // < 0
  double beta_plus;   // > 0
  Matrix direction;   // sign-canonical delta_rho1 the betas refer to

  /// x with rho0 = x rho_plus + (1 - x) rho_minus.
  double steady_state_fraction() const { return -beta_minus / (beta_plus - beta_minus); }
};

/// Extremal PSD operators rho0 + beta delta_rho1 on either side of beta = 0.
/// The direction's sign is canonicalized (first significant diagonal entry
/// positive) so the pair does not depend on the sign or scale of the input.
inline MetastablePair metastable_extremes(const DensityMatrix& rho0, const Matrix& delta_rho1) {
  const int d = rho0.dim();
  if (delta_rho1.rows() != d || delta_rho1.cols() != d) {
    throw Error(ErrorCode::dimension_mismatch, "delta_rho1 does not match rho0");
  }
  const double scale = max_abs(delta_rho1);
  if (!(scale > 0.0) || !delta_rho1.allFinite()) {
    throw Error(ErrorCode::invalid_argument, "delta_rho1 must be nonzero and finite");
  }
  if (hermiticity_defect(delta_rho1) > tol::herm * std::max(1.0, scale)) {
    throw Error(ErrorCode::non_hermitian, "delta_rho1 must be Hermitian");
  }
  if (std::abs(delta_rho1.trace()) > 1e-8 * std::max(1.0, delta_rho1.norm())) {
    throw Error(ErrorCode::invalid_argument, "delta_rho1 must be traceless");
  }

  Matrix dir = 0.5 * (delta_rho1 + delta_rho1.adjoint());
  for (int i = 0; i < d; ++i) {
    const double x = dir(i, i).real();
    if (std::abs(x) > 1e-10 * scale) {
      if (x < 0.0) dir = -dir;
      break;
    }
  }

  const RealVector dir_eigs = hermitian_eigenvalues(dir);
  const double spectral = std::max(std::abs(dir_eigs.minCoeff()), std::abs(dir_eigs.maxCoeff()));
  if (dir_eigs.minCoeff() >= 0.0 || dir_eigs.maxCoeff() <= 0.0) {
    throw Error(ErrorCode::bracket_failure, "delta_rho1 is semidefinite; eigenvector is corrupted");
  }

  const Matrix& r0 = rho0.matrix();
  auto margin = [&](double beta) {
    return hermitian_eigenvalues(r0 + beta * dir).minCoeff() + 0.5 * tol::psd;
  };
  if (margin(0.0) < 0.0) {
    throw Error(ErrorCode::degenerate_request, "steady state already violates positivity");
  }

  auto edge = [&](double sign) {
    double lo = 0.0;
    double hi = sign * 1e-6 / spectral;
    int doublings = 0;
    while (margin(hi) >= 0.0) {
      lo = hi;
      hi *= 2.0;
      if (++doublings > 200) {
        throw Error(ErrorCode::bracket_failure, "positivity boundary not bracketed");
      }
    }
    for (int it = 0; it < 200 && std::abs(hi - lo) > 1e-15 * std::abs(hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (margin(mid) >= 0.0 ? lo : hi) = mid;
    }
    // within the PSD tolerance of rho0 itself: no room along this direction
    if (std::abs(lo) * spectral < tol::psd) {
      throw Error(ErrorCode::degenerate_request,
                  "steady state lies on the positivity boundary along delta_rho1");
    }
    return lo;
  };

  const double bp = edge(+1.0);
  const double bm = edge(-1.0);
  return MetastablePair{DensityMatrix(r0 + bm * dir), DensityMatrix(r0 + bp * dir), bm, bp, dir};
}

struct MixingPoint {
  double x;        // weight of rho_plus
  double entropy;  // S(x rho_plus + (1 - x) rho_minus)
  double linear;   // x S(rho_plus) + (1 - x) S(rho_minus)
  double excess;   // entropy - linear
  double binary;   // H(x)
};

struct MixingCurve {
  std::vector<MixingPoint> points;
  double max_excess = 0.0;
  double x_at_max = 0.0;
  double steady_state_x = 0.0;
  double shape_scale = 0.0;      // least-squares c in excess ~ c H(x)
  double shape_deviation = 0.0;  // max |excess - c H(x)|
  double commutator_norm = 0.0;  // Frobenius norm of [rho_minus, rho_plus]
};

/// Excess entropy of the mixtures along the segment between the extremes.
inline MixingCurve mixing_curve(const MetastablePair& pair, int samples = 401) {
  if (samples < 3) throw Error(ErrorCode::invalid_argument, "mixing curve needs >= 3 samples");
  const Matrix& rp = pair.rho_plus.matrix();
  const Matrix& rm = pair.rho_minus.matrix();
  const double sp = von_neumann_entropy(rp);
  const double sm = von_neumann_entropy(rm);
  MixingCurve c;
  double hh = 0.0, eh = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double x = static_cast<double>(i) / (samples - 1);
    MixingPoint pt{};
    pt.x = x;
    pt.entropy = von_neumann_entropy(Matrix(x * rp + (1.0 - x) * rm));
    pt.linear = x * sp + (1.0 - x) * sm;
    pt.excess = pt.entropy - pt.linear;
    pt.binary = binary_entropy(x);
    hh += pt.binary * pt.binary;
    eh += pt.excess * pt.binary;
    if (i == 0 || pt.excess > c.max_excess) {
      c.max_excess = pt.excess;
      c.x_at_max = x;
    }
    c.points.push_back(pt);
  }
  c.shape_scale = eh / hh;
  for (const auto& pt : c.points) {
    c.shape_deviation = std::max(c.shape_deviation, std::abs(pt.excess - c.shape_scale * pt.binary));
  }
  c.steady_state_x = pair.steady_state_fraction();
  c.commutator_norm = (rm * rp - rp * rm).norm();
  return c;
}

}  // namespace duffing
