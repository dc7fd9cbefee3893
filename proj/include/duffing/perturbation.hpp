#pragma once

// Weak-drive analytics: the exact eigensystem of the undriven generator S0,
// the Brillouin-Wigner series for the steady state in powers of epsilon,
// the third-order response, Fano line fits and the onset of resonant lines.

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include <cmath>
#include <optional>
#include <vector>

#include "duffing/closed_form.hpp"
#include "duffing/fock.hpp"
#include "duffing/lindblad.hpp"
#include "duffing/parallel.hpp"

namespace duffing {

// ---------------------------------------------------------------------------
// S0 eigensystem. Offset n > 0 lives on the n-th subdiagonal (|t+n><t|);
// n < 0 is the conjugate partner on the superdiagonal.

inline void require_damped(const ModelParams& p) {
  p.require_finite();
  if (!(p.gamma > 0.0)) throw Error(ErrorCode::invalid_argument, "gamma must be > 0");
}

inline complex s0_eigenvalue(const ModelParams& p, int n, int q) {
  if (q < 0) throw Error(ErrorCode::invalid_argument, "q must be >= 0");
  const int m = std::abs(n);
  const complex i(0.0, 1.0);
  return -(q + 0.5 * m) * p.gamma - i * static_cast<double>(n) * p.delta -
         i * static_cast<double>(n) * (m - 1.0 + 2.0 * q) * p.chi;
}

namespace detail {

inline double log_factorial(int k) { return std::lgamma(k + 1.0); }

/// R(t, q) = c^t / ((q - t)! sqrt((t+m)! t!)), upper triangular, size d - |n|.
inline Matrix s0_block(const ModelParams& p, int n, int dim) {
  const int m = std::abs(n);
  const int size = dim - m;
  const complex c(-1.0, -2.0 * n * p.chi / p.gamma);
  Matrix r = Matrix::Zero(size, size);
  for (int q = 0; q < size; ++q) {
    complex ct = 1.0;
    for (int t = 0; t <= q; ++t) {
      const double mag = std::exp(-log_factorial(q - t) - 0.5 * (log_factorial(t + m) + log_factorial(t)));
      r(t, q) = ct * mag;
      ct *= c;
    }
  }
  return r;
}

inline Vector gather_offset(const Matrix& x, int n) {
  const int m = std::abs(n);
  const int size = static_cast<int>(x.rows()) - m;
  Vector v(size);
  for (int t = 0; t < size; ++t) v(t) = n >= 0 ? x(t + m, t) : x(t, t + m);
  return v;
}

inline void scatter_offset(Matrix& x, int n, const Vector& v) {
  const int m = std::abs(n);
  for (int t = 0; t < v.size(); ++t) (n >= 0 ? x(t + m, t) : x(t, t + m)) = v(t);
}

}  // namespace detail

inline Matrix s0_eigenmatrix(const ModelParams& p, int n, int q, int dim) {
  require_damped(p);
  require_dimension(dim);
  if (q < 0 || std::abs(n) >= dim) throw Error(ErrorCode::invalid_argument, "(n, q) outside truncation");
  const int m = std::abs(n);
  const complex c(-1.0, -2.0 * n * p.chi / p.gamma);
  Matrix rho = Matrix::Zero(dim, dim);
  complex ct = 1.0;
  for (int t = 0; t <= q && t + m < dim; ++t) {
    const double mag =
        std::exp(-detail::log_factorial(q - t) - 0.5 * (detail::log_factorial(t + m) + detail::log_factorial(t)));
    (n >= 0 ? rho(t + m, t) : rho(t, t + m)) = ct * mag;
    ct *= c;
  }
  return rho;
}

/// Left eigenmatrix under the bilinear pairing (L|x) = sum_ij L_ij x_ij,
/// from the inverse of the triangular block of right eigenvectors.
inline Matrix s0_left_eigenmatrix(const ModelParams& p, int n, int q, int dim) {
  require_damped(p);
  require_dimension(dim);
  if (q < 0 || std::abs(n) + q >= dim) throw Error(ErrorCode::invalid_argument, "(n, q) outside truncation");
  const Matrix r = detail::s0_block(p, n, dim);
  const Matrix rinv = r.triangularView<Eigen::Upper>().solve(Matrix::Identity(r.rows(), r.cols()));
  Matrix l = Matrix::Zero(dim, dim);
  detail::scatter_offset(l, n, rinv.row(q).transpose());
  return l;
}

inline complex pairing(const Matrix& l, const Matrix& x) { return l.cwiseProduct(x).sum(); }

struct S0Eigenpair {
  int n;
  int q;
  complex eigenvalue;
  Matrix eigenmatrix;

  bool conjugate() const { return n < 0; }
};

/// Pairs for 0 <= n <= n_max, 0 <= q <= q_max, each n > 0 followed by its
/// conjugate partner (stored with offset -n).
inline std::vector<S0Eigenpair> s0_eigensystem(const ModelParams& p, int dim, int n_max, int q_max) {
  require_damped(p);
  require_dimension(dim);
  if (n_max < 0 || q_max < 0 || n_max >= dim) throw Error(ErrorCode::invalid_argument, "bad (n_max, q_max)");
  const ModelParams p0 = p.with_epsilon(0.0);
  std::vector<S0Eigenpair> out;
  for (int n = 0; n <= n_max; ++n) {
    for (int q = 0; q <= q_max; ++q) {
      S0Eigenpair e{n, q, s0_eigenvalue(p0, n, q), s0_eigenmatrix(p0, n, q, dim)};
      out.push_back(e);
      if (n > 0) out.push_back({-n, q, std::conj(e.eigenvalue), e.eigenmatrix.adjoint()});
    }
  }
  return out;
}

struct EigenResidual {
  double residual;  // max|S0 rho - lambda rho| / max|rho|
  double top_weight;
  bool truncation_warning;
};

inline EigenResidual verify_s0_eigen(const S0Eigenpair& e, const Superoperator& s0) {
  if (e.eigenmatrix.rows() != s0.dim()) throw Error(ErrorCode::dimension_mismatch, "eigenmatrix size differs");
  const Matrix& r = e.eigenmatrix;
  const double scale = max_abs(r);
  const double res = max_abs(s0.apply(r) - e.eigenvalue * r) / scale;
  const int d = s0.dim();
  double top = 0.0;
  for (int i = 0; i < d; ++i) {
    top = std::max({top, std::abs(r(d - 1, i)), std::abs(r(i, d - 1)), std::abs(r(d - 2, i)), std::abs(r(i, d - 2))});
  }
  top /= scale;
  return {res, top, top > 1e-6};
}

// ---------------------------------------------------------------------------
// Brillouin-Wigner series. With E0 = 0 exactly the series is
// rho = sum_k eps^k T_k, T_0 = |0><0|, T_k = R0 V T_{k-1}, where
// R0 = sum_{(n,q) != (0,0)} |nq_R)(nq_L| / (-lambda_nq).

namespace detail {

inline Matrix reduced_resolvent(const ModelParams& p, const Matrix& x) {
  const int d = static_cast<int>(x.rows());
  Matrix y = Matrix::Zero(d, d);
  for (int n = -(d - 1); n <= d - 1; ++n) {
    const Matrix r = s0_block(p, n, d);
    Vector a = r.triangularView<Eigen::Upper>().solve(gather_offset(x, n));
    for (int q = 0; q < a.size(); ++q) {
      a(q) = (n == 0 && q == 0) ? complex(0.0) : a(q) / (-s0_eigenvalue(p, n, q));
    }
    scatter_offset(y, n, r * a);
  }
  return y;
}

inline Matrix drive_commutator(const Matrix& x) {
  const int d = static_cast<int>(x.rows());
  const Matrix a = annihilation(d);
  const Matrix xq = a + a.adjoint();
  return complex(0.0, -1.0) * (xq * x - x * xq);
}

}  // namespace detail

struct BwExpansion {
  std::vector<Matrix> terms;  // T_0 .. T_{order+2}, epsilon stripped
  Matrix rho;                 // sum_{k <= order} eps^k T_k
  double validity_ratio;      // |eps^{order+2} T_{order+2}| / |eps^order T_order|
  bool divergence_warning;
};

inline BwExpansion bw_expansion(const ModelParams& p, int order, int dim) {
  require_damped(p);
  require_dimension(dim);
  if (order < 1 || order > 3) throw Error(ErrorCode::invalid_argument, "order must be 1, 2 or 3");
  // T_k touches levels <= k, so the work space only needs order + 3 levels
  const int work = order + 3;
  const ModelParams p0 = p.with_epsilon(0.0);
  BwExpansion out;
  Matrix t = Matrix::Zero(work, work);
  t(0, 0) = 1.0;
  out.terms.push_back(t);
  for (int k = 1; k <= order + 2; ++k) {
    t = detail::reduced_resolvent(p0, detail::drive_commutator(t));
    out.terms.push_back(t);
  }
  Matrix rho = Matrix::Zero(work, work);
  double ek = 1.0;
  for (int k = 0; k <= order; ++k, ek *= p.epsilon) rho += ek * out.terms[k];
  const double lead = std::pow(p.epsilon, order) * max_abs(out.terms[order]);
  const double next = std::pow(p.epsilon, order + 2) * max_abs(out.terms[order + 2]);
  out.validity_ratio = lead > 0.0 ? next / lead : 0.0;
  out.divergence_warning = out.validity_ratio > 0.1;

  out.rho = Matrix::Zero(dim, dim);
  const int keep = std::min(dim, work);
  out.rho.topLeftCorner(keep, keep) = rho.topLeftCorner(keep, keep);
  for (auto& term : out.terms) {
    Matrix full = Matrix::Zero(dim, dim);
    full.topLeftCorner(keep, keep) = term.topLeftCorner(keep, keep);
    term = full;
  }
  return out;
}

inline Matrix bw_steady_state(const ModelParams& p, int order, int dim) {
  return bw_expansion(p, order, dim).rho;
}

/// The two explicit third-order matrix elements as printed in the literature
/// form of the steady state, <1|rho|0> and <2|rho|1>.
inline complex printed_rho10(const ModelParams& p) {
  const complex i(0.0, 1.0);
  const double e = p.epsilon, g = p.gamma, d = p.delta, x = p.chi;
  const complex dm = 2.0 * d - i * g;
  return 2.0 * e / (-2.0 * d + i * g) +
         8.0 * e * e * e * (4.0 * x + 2.0 * d - i * g) / (dm * dm * (2.0 * x + dm) * (2.0 * d + i * g));
}

inline complex printed_rho21(const ModelParams& p) {
  const complex i(0.0, 1.0);
  const double e = p.epsilon, g = p.gamma, d = p.delta, x = p.chi;
  const complex dm = 2.0 * d - i * g;
  return -8.0 * e * e * e / (dm * (2.0 * x + dm) * (2.0 * d + i * g));
}

/// <a> through third order, in the sign convention of Tr(a rho0).
inline complex response_series(const ModelParams& p) {
  require_damped(p);
  const complex i(0.0, 1.0);
  const double e = p.epsilon;
  const complex dm = 2.0 * p.delta - i * p.gamma;
  const complex dp = 2.0 * p.delta + i * p.gamma;
  const complex cubic = 32.0 * p.chi * e * e * e / (dm * dm * (2.0 * p.chi + dm) * dp);
  return -(2.0 * e / dm - cubic);
}

inline double fano_q(const ModelParams& p) {
  if (!(p.chi > 0.0) || !(p.gamma > 0.0)) throw Error(ErrorCode::invalid_argument, "fano_q needs chi, gamma > 0");
  return -2.0 * p.chi / (std::sqrt(2.0 * p.chi * p.chi + p.gamma * p.gamma) - p.gamma);
}

// ---------------------------------------------------------------------------
// Fano fit: y = background + slope (delta - reference) + C (x - q)^2 / (x^2 + 1),
// x = (delta - center) / width.

struct FanoFit {
  double q_fano = 0.0;
  double amplitude = 0.0;  // C
  double center = 0.0;
  double width = 0.0;
  double background = 0.0;
  double slope = 0.0;
  double reference = 0.0;           // delta about which the slope is taken
  double rms = 0.0;
  double line_amplitude = 0.0;      // max - min of the resonant part over the window
  double trough_delta = 0.0;        // minimum of the resonant part
  bool trough_high_side = false;    // trough at higher drive frequency (smaller delta) than the center
  int evaluations = 0;

  double model(double delta) const {
    const double x = (delta - center) / width;
    return background + slope * (delta - reference) + amplitude * (x - q_fano) * (x - q_fano) / (x * x + 1.0);
  }
  double resonant(double delta) const {
    const double x = (delta - center) / width;
    return amplitude * (x - q_fano) * (x - q_fano) / (x * x + 1.0);
  }
};

namespace detail {

struct FanoFunctor : Eigen::DenseFunctor<double> {
  const Eigen::VectorXd& u;
  const Eigen::VectorXd& v;
  FanoFunctor(const Eigen::VectorXd& uu, const Eigen::VectorXd& vv)
      : Eigen::DenseFunctor<double>(6, static_cast<int>(uu.size())), u(uu), v(vv) {}

  // x = [bg, slope, C, center, w, q]
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    for (Eigen::Index k = 0; k < u.size(); ++k) {
      const double s = (u(k) - x(3)) / x(4);
      f(k) = x(0) + x(1) * u(k) + x(2) * (s - x(5)) * (s - x(5)) / (s * s + 1.0) - v(k);
    }
    return 0;
  }
  int df(const Eigen::VectorXd& x, Eigen::MatrixXd& j) const {
    for (Eigen::Index k = 0; k < u.size(); ++k) {
      const double s = (u(k) - x(3)) / x(4);
      const double den = s * s + 1.0;
      const double f = (s - x(5)) * (s - x(5)) / den;
      const double fs = 2.0 * (s - x(5)) * (1.0 + x(5) * s) / (den * den);
      const double fq = -2.0 * (s - x(5)) / den;
      j(k, 0) = 1.0;
      j(k, 1) = u(k);
      j(k, 2) = f;
      j(k, 3) = -x(2) * fs / x(4);
      j(k, 4) = -x(2) * fs * s / x(4);
      j(k, 5) = x(2) * fq;
    }
    return 0;
  }
};

}  // namespace detail

/// Least-squares Fano fit with a linear background over all samples given
/// (optionally restricted to a window). Multistart Levenberg-Marquardt in
/// normalized variables; raises fit-failure when no resonance is resolved.
inline FanoFit fano_fit(const std::vector<double>& delta, const std::vector<double>& magnitude,
                        std::optional<std::pair<double, double>> window = std::nullopt) {
  if (delta.size() != magnitude.size()) throw Error(ErrorCode::dimension_mismatch, "delta and magnitude differ in length");
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < delta.size(); ++k) {
    if (!std::isfinite(delta[k]) || !std::isfinite(magnitude[k])) {
      throw Error(ErrorCode::invalid_argument, "non-finite sample in Fano line");
    }
    if (window && (delta[k] < window->first || delta[k] > window->second)) continue;
    xs.push_back(delta[k]);
    ys.push_back(magnitude[k]);
  }
  if (xs.size() < 50) throw Error(ErrorCode::window_too_narrow, "Fano fit needs at least 50 samples in the window");

  const auto [lo_it, hi_it] = std::minmax_element(xs.begin(), xs.end());
  const double lo = *lo_it, hi = *hi_it;
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  if (!(half > 0.0)) throw Error(ErrorCode::window_too_narrow, "Fano window has zero width");
  const int n = static_cast<int>(xs.size());
  Eigen::VectorXd u(n), v(n);
  double ybar = 0.0;
  for (double y : ys) ybar += y / n;
  const auto [ymin_it, ymax_it] = std::minmax_element(ys.begin(), ys.end());
  const double yscale = std::max(*ymax_it - *ymin_it, 1e-300);
  for (int k = 0; k < n; ++k) {
    u(k) = (xs[k] - mid) / half;
    v(k) = (ys[k] - ybar) / yscale;
  }

  // detrend by the chord through the end samples to seed the center
  const int ilo = static_cast<int>(lo_it - xs.begin()), ihi = static_cast<int>(hi_it - xs.begin());
  const double chord = (v(ihi) - v(ilo)) / (u(ihi) - u(ilo));
  Eigen::VectorXd detr(n);
  for (int k = 0; k < n; ++k) detr(k) = v(k) - (v(ilo) + chord * (u(k) - u(ilo)));
  Eigen::Index kmin = 0, kmax = 0;
  detr.minCoeff(&kmin);
  detr.maxCoeff(&kmax);
  const double span = detr.maxCoeff() - detr.minCoeff();

  detail::FanoFunctor fn(u, v);
  Eigen::VectorXd best;
  double best_cost = INFINITY;
  int evals = 0;
  for (double c0 : {u(kmin), u(kmax), 0.5 * (u(kmin) + u(kmax))}) {
    for (double w0 : {0.02, 0.05, 0.15}) {
      for (double q0 : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
        for (double sgn : {1.0, -1.0}) {
          Eigen::VectorXd x(6);
          const double a0 = sgn * std::max(span, 1e-3) / (1.0 + q0 * q0);
          x << v.mean() - a0, chord, a0, c0, w0, q0;
          Eigen::LevenbergMarquardt<detail::FanoFunctor> lm(fn);
          lm.setMaxfev(400);
          lm.minimize(x);
          evals += static_cast<int>(lm.nfev());
          if (!x.allFinite() || x(4) == 0.0) continue;
          Eigen::VectorXd f(n);
          fn(x, f);
          const double cost = f.squaredNorm();
          if (cost < best_cost) {
            best_cost = cost;
            best = x;
          }
        }
      }
    }
  }
  if (best.size() == 0) throw Error(ErrorCode::fit_failure, "Fano fit did not converge");

  FanoFit fit;
  fit.reference = mid;
  fit.background = ybar + yscale * best(0);
  fit.slope = yscale * best(1) / half;
  fit.amplitude = yscale * best(2);
  fit.center = mid + half * best(3);
  fit.width = half * std::abs(best(4));
  fit.q_fano = best(4) < 0.0 ? -best(5) : best(5);
  fit.evaluations = evals;
  fit.rms = yscale * std::sqrt(best_cost / n);
  // With a free constant, (C, q) and (-C q^2, -1/q) give the same curve.
  // Keep C > 0 so that x = q is the zero of the resonant part.
  if (fit.amplitude < 0.0 && std::abs(fit.q_fano) > 1e-12) {
    const double c2 = -fit.amplitude * fit.q_fano * fit.q_fano;
    fit.background += fit.amplitude - c2;
    fit.amplitude = c2;
    fit.q_fano = -1.0 / fit.q_fano;
  }

  double rmin = INFINITY, rmax = -INFINITY;
  for (int k = 0; k < n; ++k) {
    const double r = fit.resonant(xs[k]);
    if (r < rmin) {
      rmin = r;
      fit.trough_delta = xs[k];
    }
    rmax = std::max(rmax, r);
  }
  fit.line_amplitude = rmax - rmin;
  // delta = omega0 - omega_p: higher drive frequency is smaller delta
  fit.trough_high_side = fit.trough_delta < fit.center;

  if (fit.center < lo || fit.center > hi) throw Error(ErrorCode::fit_failure, "Fano center falls outside the window");
  if (fit.width >= 0.5 * half) throw Error(ErrorCode::fit_failure, "Fano width not resolved by the window");
  if (!(fit.line_amplitude > 10.0 * fit.rms) || !(fit.rms < 0.05 * fit.line_amplitude)) {
    throw Error(ErrorCode::fit_failure, "no resonant structure above the fit residual");
  }
  return fit;
}

struct ResponseLine {
  std::vector<double> delta;
  std::vector<complex> response;

  std::vector<double> magnitude() const {
    std::vector<double> m;
    for (const auto& a : response) m.push_back(std::abs(a));
    return m;
  }
};

/// |<a>| on a uniform detuning grid from the closed form.
inline ResponseLine closed_form_line(const ModelParams& p, double delta_min, double delta_max, int samples) {
  if (samples < 2 || !(delta_max > delta_min)) throw Error(ErrorCode::invalid_argument, "bad line range");
  ResponseLine line;
  for (int k = 0; k < samples; ++k) {
    const double d = delta_min + (delta_max - delta_min) * k / (samples - 1);
    line.delta.push_back(d);
    line.response.push_back(dw_response(p.with_delta(d)));
  }
  return line;
}

// ---------------------------------------------------------------------------
// Onset of the line at delta = -n chi: smallest epsilon at which |<a>|(delta)
// acquires a stationary point within |delta + n chi| < window gamma.

struct OnsetOptions {
  double eps_start = 1e-4;
  double eps_max = 2.0;
  double growth = 1.25;
  int samples = 401;
  double window = 10.0;  // half-width in units of gamma
  int bisections = 40;
  int workers = 1;
};

struct OnsetPoint {
  double gamma;
  double eps_onset;
};

struct OnsetResult {
  int n = 1;
  std::vector<OnsetPoint> points;
  std::optional<double> slope;  // d log eps_onset / d log gamma
  double prefactor = 0.0;       // f(n) with eps = f(n) chi^(1 - 1/n) gamma^(1/n)
};

/// min over the window of s d|<a>|/d delta, with s the sign of the
/// off-resonant background slope; negative once a stationary point exists.
inline double onset_margin(const ModelParams& p, int n, const OnsetOptions& opt = {}) {
  const double center = -n * p.chi;
  const double s = center < 0.0 ? 1.0 : -1.0;
  const double h = 1e-3 * p.gamma;
  double g = INFINITY;
  for (int k = 0; k < opt.samples; ++k) {
    const double d = center + opt.window * p.gamma * (2.0 * k / (opt.samples - 1) - 1.0);
    const double up = std::abs(dw_response(p.with_delta(d + h)));
    const double dn = std::abs(dw_response(p.with_delta(d - h)));
    g = std::min(g, s * (up - dn) / (2.0 * h));
  }
  return g;
}

inline double onset_epsilon(int n, double gamma, const ModelParams& base, const OnsetOptions& opt = {}) {
  ModelParams p = base;
  p.gamma = gamma;
  require_damped(p);
  double lo = 0.0, hi = opt.eps_start;
  while (onset_margin(p.with_epsilon(hi), n, opt) > 0.0) {
    lo = hi;
    hi *= opt.growth;
    if (hi > opt.eps_max) {
      throw Error(ErrorCode::onset_not_found, "no onset below epsilon = " + std::to_string(opt.eps_max));
    }
  }
  for (int it = 0; it < opt.bisections; ++it) {
    const double m = 0.5 * (lo + hi);
    (onset_margin(p.with_epsilon(m), n, opt) > 0.0 ? lo : hi) = m;
  }
  return hi;
}

inline OnsetResult onset_scan(int n, const std::vector<double>& gammas, const ModelParams& base,
                              const OnsetOptions& opt = {}) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "onset line index must be >= 1");
  if (gammas.empty()) throw Error(ErrorCode::invalid_argument, "onset scan needs at least one gamma");
  if (!(base.chi > 0.0)) throw Error(ErrorCode::invalid_argument, "onset scan needs chi > 0");
  OnsetResult r;
  r.n = n;
  r.points.resize(gammas.size());
  parallel_for(gammas.size(), opt.workers, [&](std::size_t k) {
    r.points[k] = {gammas[k], onset_epsilon(n, gammas[k], base, opt)};
  });
  const double expo = 1.0 / n;
  const double chi_part = std::pow(base.chi, 1.0 - expo);
  if (gammas.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(gammas.size());
    for (const auto& pt : r.points) {
      const double x = std::log(pt.gamma), y = std::log(pt.eps_onset);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    r.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  double logf = 0.0;
  for (const auto& pt : r.points) logf += std::log(pt.eps_onset / (chi_part * std::pow(pt.gamma, expo)));
  r.prefactor = std::exp(logf / static_cast<double>(r.points.size()));
  return r;
}

}  // namespace duffing
