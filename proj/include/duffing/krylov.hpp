#pragma once

// Shift-invert Arnoldi with Krylov-Schur style thick restarts for the few
// eigenvalues of a sparse non-Hermitian matrix closest to a shift.

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <complex>
#include <numeric>
#include <random>
#include <vector>

#include "duffing/errors.hpp"

namespace duffing {

struct KrylovOptions {
  int subspace = 0;        // 0 picks max(2 nev + 10, 30)
  int max_restarts = 300;
  double tolerance = 1e-13;  // relative Ritz residual on the inverted operator
  unsigned seed = 12345;
};

struct KrylovResult {
  std::vector<std::complex<double>> values;  // ascending |lambda - shift|
  Eigen::MatrixXcd vectors;                  // unit-norm columns
  int restarts = 0;
};

template <typename SparseMatrix>
KrylovResult shift_invert_eigs(const SparseMatrix& a, std::complex<double> shift, int nev,
                               const KrylovOptions& opt = {}) {
  using cplx = std::complex<double>;
  using Mat = Eigen::MatrixXcd;
  using Vec = Eigen::VectorXcd;
  const int n = static_cast<int>(a.rows());
  if (nev < 1 || nev > n - 2) throw Error(ErrorCode::invalid_argument, "bad eigenvalue count");
  const int m = std::min(n - 1, opt.subspace > 0 ? opt.subspace : std::max(2 * nev + 10, 30));

  Eigen::SparseMatrix<cplx> shifted = a.template cast<cplx>();
  Eigen::SparseMatrix<cplx> id(n, n);
  id.setIdentity();
  shifted -= shift * id;
  shifted.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
  lu.compute(shifted);
  if (lu.info() != Eigen::Success) {
    throw Error(ErrorCode::eigensolver_failure, "shift-invert factorization failed");
  }

  Mat v = Mat::Zero(n, m + 1);
  Mat h = Mat::Zero(m + 1, m);
  std::mt19937 rng(opt.seed);
  std::normal_distribution<double> gauss;
  auto random_unit = [&]() {
    Vec x(n);
    for (int i = 0; i < n; ++i) x(i) = cplx(gauss(rng), gauss(rng));
    return Vec(x / x.norm());
  };
  v.col(0) = random_unit();

  int k = 0;  // columns kept from the previous cycle
  KrylovResult out;
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    for (int j = k; j < m; ++j) {
      Vec w = lu.solve(v.col(j));
      Vec coeff = Vec::Zero(j + 1);
      for (int pass = 0; pass < 2; ++pass) {  // classical Gram-Schmidt, twice
        const Vec c = v.leftCols(j + 1).adjoint() * w;
        w -= v.leftCols(j + 1) * c;
        coeff += c;
      }
      h.col(j).head(j + 1) += coeff;
      double beta = w.norm();
      if (beta < 1e-14 * coeff.norm()) {
        // invariant subspace found: continue with a fresh orthogonal direction
        w = random_unit();
        for (int pass = 0; pass < 2; ++pass) w -= v.leftCols(j + 1) * (v.leftCols(j + 1).adjoint() * w);
        w /= w.norm();
        h(j + 1, j) = 0.0;
        v.col(j + 1) = w;
      } else {
        h(j + 1, j) = beta;
        v.col(j + 1) = w / beta;
      }
    }

    const Mat hm = h.topLeftCorner(m, m);
    Eigen::ComplexEigenSolver<Mat> es(hm);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::eigensolver_failure, "projected eigenproblem failed");
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      return std::abs(es.eigenvalues()(x)) > std::abs(es.eigenvalues()(y));
    });

    // Ritz residual |f^H w| with f the last row of h
    const Eigen::RowVectorXcd f = h.row(m);
    bool converged = true;
    for (int i = 0; i < nev; ++i) {
      const int idx = order[i];
      const Vec wv = es.eigenvectors().col(idx);
      const double res = std::abs((f * wv)(0)) / wv.norm();
      if (res > opt.tolerance * std::abs(es.eigenvalues()(idx))) converged = false;
    }

    if (converged || restart == opt.max_restarts) {
      if (!converged) throw Error(ErrorCode::iteration_limit, "Krylov eigensolver did not converge");
      out.restarts = restart;
      out.vectors.resize(n, nev);
      for (int i = 0; i < nev; ++i) {
        const int idx = order[i];
        Vec x = v.leftCols(m) * es.eigenvectors().col(idx);
        x /= x.norm();
        out.vectors.col(i) = x;
        out.values.push_back(shift + 1.0 / es.eigenvalues()(idx));
      }
      return out;
    }

    // thick restart on the wanted Ritz subspace
    const int keep = std::min(m - 2, std::max(nev + 2, (nev + m) / 2));
    Mat wk(m, keep);
    for (int i = 0; i < keep; ++i) wk.col(i) = es.eigenvectors().col(order[i]);
    Eigen::HouseholderQR<Mat> qr(wk);
    const Mat q = qr.householderQ() * Mat::Identity(m, keep);
    const Mat t = q.adjoint() * hm * q;
    const Eigen::RowVectorXcd b = f * q;
    const Vec next = v.col(m);
    const Mat vk = v.leftCols(m) * q;
    v.setZero();
    v.leftCols(keep) = vk;
    v.col(keep) = next;
    h.setZero();
    h.topLeftCorner(keep, keep) = t;
    h.row(keep).head(keep) = b;
    k = keep;
  }
  throw Error(ErrorCode::iteration_limit, "Krylov eigensolver did not converge");
}

}  // namespace duffing
