#pragma once

// Wigner function W(alpha) = (2/pi) Tr(D(-alpha) rho D(alpha) Pi), normalized
// so that the integral over the plane is one.

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "duffing/fock.hpp"

namespace duffing {

/// exp(alpha a' - conj(alpha) a) computed on dim + 8 + ceil(2|alpha|) levels and
/// cropped back to dim.
inline Matrix displacement_operator(complex alpha, int dim) {
  require_dimension(dim);
  const int pad = 8 + static_cast<int>(std::ceil(2.0 * std::abs(alpha)));
  const int big = dim + pad;
  const Matrix a = annihilation(big);
  const Matrix gen = alpha * a.adjoint() - std::conj(alpha) * a;
  const Matrix d = gen.exp();
  return d.topLeftCorner(dim, dim);
}

struct GridSpec {
  double re_min = -5.0, re_max = 5.0;
  double im_min = -5.0, im_max = 5.0;
  int nx = 201, ny = 201;

  double x(int i) const { return nx == 1 ? re_min : re_min + (re_max - re_min) * i / (nx - 1); }
  double y(int j) const { return ny == 1 ? im_min : im_min + (im_max - im_min) * j / (ny - 1); }
  double cell_area() const {
    return (nx > 1 ? (re_max - re_min) / (nx - 1) : 1.0) * (ny > 1 ? (im_max - im_min) / (ny - 1) : 1.0);
  }
  void validate() const {
    if (nx < 1 || ny < 1 || !(re_max >= re_min) || !(im_max >= im_min) || !std::isfinite(re_min) ||
        !std::isfinite(re_max) || !std::isfinite(im_min) || !std::isfinite(im_max)) {
      throw Error(ErrorCode::invalid_argument, "bad Wigner grid specification");
    }
  }
};

struct WignerGrid {
  GridSpec spec;
  Eigen::MatrixXd values;  // values(i, j) at alpha = x(i) + i y(j)
  double edge_max = 0.0;   // largest |W| on the grid border
  bool truncation_warning = false;

  double integral() const { return values.sum() * spec.cell_area(); }
};

inline constexpr double kWignerEdgeLimit = 1e-6;

/// Displaced parity <m| D(alpha) Pi D(alpha)' |n> for m >= n via associated
/// Laguerre polynomials, evaluated for every offset m - n at one alpha.
/// W = (2/pi) sum_nm rho_nm <m|..|n>; the m < n half is the conjugate.
inline double wigner_point(const Matrix& rho, complex alpha) {
  const int d = static_cast<int>(rho.rows());
  const double r = std::abs(alpha);
  const double x = 4.0 * r * r;
  const double theta = std::arg(alpha);
  double w = 0.0;
  for (int k = 0; k < d; ++k) {
    if (k > 0 && r == 0.0) break;
    const complex phase = std::polar(1.0, k * theta);
    const double log2r = k > 0 ? k * std::log(2.0 * r) : 0.0;
    double lm1 = 0.0, l0 = 1.0;  // L_{n-1}^{(k)}, L_n^{(k)}
    complex acc = 0.0;
    for (int n = 0; n + k < d; ++n) {
      if (n == 1) {
        lm1 = l0;
        l0 = 1.0 + k - x;
      } else if (n > 1) {
        const double next = ((2.0 * (n - 1) + 1.0 + k - x) * l0 - (n - 1.0 + k) * lm1) / n;
        lm1 = l0;
        l0 = next;
      }
      const double logpre = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(n + k + 1.0)) + log2r - 0.5 * x;
      const double elem = (n % 2 == 0 ? 1.0 : -1.0) * std::exp(logpre) * l0;
      acc += rho(n, n + k) * elem;
    }
    // rho(n, n+k) pairs with <n+k|X|n>; the phase carries (2 alpha)^k
    acc *= phase;
    w += (k == 0 ? 1.0 : 2.0) * acc.real();
  }
  return 2.0 / std::numbers::pi * w;
}

/// Literal route through the padded matrix exponential; slow, for checks.
inline double wigner_point_expm(const Matrix& rho, complex alpha) {
  const int d = static_cast<int>(rho.rows());
  // the displaced state leaks above level d, so trace over a larger space
  const double reach = std::sqrt(static_cast<double>(d)) + std::abs(alpha) + 3.0;
  const int big = std::max(d, static_cast<int>(std::ceil(reach * reach))) + 8;
  Matrix r = Matrix::Zero(big, big);
  r.topLeftCorner(d, d) = rho;
  const Matrix dp = displacement_operator(alpha, big);
  const Matrix dm = displacement_operator(-alpha, big);
  const complex t = expectation(parity_operator(big), Matrix(dm * r * dp));
  return 2.0 / std::numbers::pi * t.real();
}

inline WignerGrid wigner(const DensityMatrix& rho, const GridSpec& spec = {}) {
  spec.validate();
  WignerGrid g;
  g.spec = spec;
  g.values.resize(spec.nx, spec.ny);
  for (int i = 0; i < spec.nx; ++i) {
    for (int j = 0; j < spec.ny; ++j) g.values(i, j) = wigner_point(rho.matrix(), complex(spec.x(i), spec.y(j)));
  }
  for (int i = 0; i < spec.nx; ++i) {
    g.edge_max = std::max({g.edge_max, std::abs(g.values(i, 0)), std::abs(g.values(i, spec.ny - 1))});
  }
  for (int j = 0; j < spec.ny; ++j) {
    g.edge_max = std::max({g.edge_max, std::abs(g.values(0, j)), std::abs(g.values(spec.nx - 1, j))});
  }
  g.truncation_warning = g.edge_max > kWignerEdgeLimit;
  return g;
}

struct WignerPeak {
  double re, im, value;
  double phase() const { return std::atan2(im, re); }
};

/// Strict local maxima over the 8-neighbourhood with value above min_value.
inline std::vector<WignerPeak> local_maxima(const WignerGrid& g, double min_value = 0.0) {
  std::vector<WignerPeak> out;
  const auto& v = g.values;
  for (int i = 1; i + 1 < v.rows(); ++i) {
    for (int j = 1; j + 1 < v.cols(); ++j) {
      const double c = v(i, j);
      if (c <= min_value) continue;
      bool peak = true;
      for (int di = -1; di <= 1 && peak; ++di)
        for (int dj = -1; dj <= 1; ++dj)
          if ((di || dj) && v(i + di, j + dj) >= c) {
            peak = false;
            break;
          }
      if (peak) out.push_back({g.spec.x(i), g.spec.y(j), c});
    }
  }
  std::sort(out.begin(), out.end(), [](const WignerPeak& a, const WignerPeak& b) { return a.value > b.value; });
  return out;
}

}  // namespace duffing
