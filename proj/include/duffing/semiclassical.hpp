#pragma once

// Mean-field (classical Duffing) steady states of the rotating-frame model.
//
// The field amplitude obeys (delta + 2 chi |alpha|^2 - i gamma/2) alpha = -epsilon,
// so n = |alpha|^2 solves  n [(delta + 2 chi n)^2 + gamma^2/4] = epsilon^2.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "duffing/fock.hpp"

namespace duffing {

struct ClassicalBranch {
  complex alpha;
  double photons = 0.0;  // |alpha|^2
  bool stable = true;
};

struct ClassicalBranches {
  std::vector<ClassicalBranch> branches;  // ascending photon number

  std::size_t count() const { return branches.size(); }
  double max_photons() const {
    double m = 0.0;
    for (const auto& b : branches) m = std::max(m, b.photons);
    return m;
  }
};

namespace detail {

/// Real roots of x^3 + a x^2 + b x + c, ascending. Returns 1 root when the
/// discriminant is negative, 3 when positive and 2 on (numerical) coalescence.
inline std::vector<double> real_cubic_roots(double a, double b, double c) {
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double disc = -(4.0 * p * p * p + 27.0 * q * q);
  const double scale = std::max({std::abs(4.0 * p * p * p), 27.0 * q * q, 1e-300});
  std::vector<double> t;
  if (std::abs(disc) <= 1e-13 * scale && p < 0.0) {
    // double root: t = 3q/p (simple), -3q/(2p) (double)
    t = {3.0 * q / p, -1.5 * q / p};
  } else if (disc > 0.0) {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (2.0 * p) * std::sqrt(-3.0 / p), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) t.push_back(r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0));
  } else {
    const double s = std::sqrt(std::max(0.0, q * q / 4.0 + p * p * p / 27.0));
    t.push_back(std::cbrt(-q / 2.0 + s) + std::cbrt(-q / 2.0 - s));
  }
  std::vector<double> roots;
  for (double ti : t) {
    double x = ti - a / 3.0;
    // Newton polish on the original cubic
    for (int it = 0; it < 4; ++it) {
      const double f = ((x + a) * x + b) * x + c;
      const double df = (3.0 * x + 2.0 * a) * x + b;
      if (df == 0.0) break;
      const double step = f / df;
      x -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(x))) break;
    }
    roots.push_back(x);
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace detail

inline complex classical_alpha(const ModelParams& p, double photons) {
  return -p.epsilon / complex(p.delta + 2.0 * p.chi * photons, -0.5 * p.gamma);
}

inline ClassicalBranches classical_steady_states(const ModelParams& p) {
  p.require_finite();
  if (!(p.gamma > 0.0)) throw Error(ErrorCode::invalid_argument, "gamma must be > 0");
  ClassicalBranches out;
  const double g2 = 0.25 * p.gamma * p.gamma;
  if (p.epsilon == 0.0) {
    out.branches.push_back({complex(0.0, 0.0), 0.0, true});
    return out;
  }
  std::vector<double> ns;
  if (p.chi == 0.0) {
    ns.push_back(p.epsilon * p.epsilon / (p.delta * p.delta + g2));
  } else {
    const double k = 4.0 * p.chi * p.chi;
    ns = detail::real_cubic_roots(4.0 * p.chi * p.delta / k, (p.delta * p.delta + g2) / k,
                                  -p.epsilon * p.epsilon / k);
  }
  for (double n : ns) {
    if (n > 0.0) out.branches.push_back({classical_alpha(p, n), n, true});
  }
  if (out.branches.size() == 3) out.branches[1].stable = false;
  return out;
}

/// Detuning of the cusp where bistability first appears.
inline double cusp_delta(double gamma) { return -0.5 * std::sqrt(3.0) * gamma; }

/// Drive interval (eps_lower, eps_upper) with three classical solutions at
/// this detuning, or nullopt when the detuning is not bistable.
inline std::optional<std::pair<double, double>> bistable_interval(double delta, double chi,
                                                                  double gamma) {
  if (!(chi > 0.0) || !(gamma > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "bistability needs chi > 0 and gamma > 0");
  }
  const double disc = delta * delta - 0.75 * gamma * gamma;
  if (delta >= 0.0 || disc <= 0.0) return std::nullopt;
  const double root = std::sqrt(disc);
  // extrema of g(n) = n[(delta + 2 chi n)^2 + gamma^2/4]
  const double n_max = (-2.0 * delta - root) / (6.0 * chi);  // local maximum of g
  const double n_min = (-2.0 * delta + root) / (6.0 * chi);  // local minimum of g
  auto g = [&](double n) {
    const double d = delta + 2.0 * chi * n;
    return n * (d * d + 0.25 * gamma * gamma);
  };
  return std::make_pair(std::sqrt(g(n_min)), std::sqrt(g(n_max)));
}

struct BifurcationCurves {
  std::vector<double> delta;
  std::vector<double> eps_lower;
  std::vector<double> eps_upper;

  bool empty() const { return delta.empty(); }
};

/// The two discriminant-zero curves eps(delta) on a uniform detuning grid.
/// Grid points outside the bistable range are skipped, so the output may be empty.
inline BifurcationCurves bifurcation_boundary(double chi, double gamma, double delta_min,
                                              double delta_max, int samples) {
  if (samples < 2 || !(delta_max > delta_min)) {
    throw Error(ErrorCode::invalid_argument, "bifurcation boundary needs an increasing range");
  }
  BifurcationCurves c;
  for (int i = 0; i < samples; ++i) {
    const double d = delta_min + (delta_max - delta_min) * i / (samples - 1);
    if (auto iv = bistable_interval(d, chi, gamma)) {
      c.delta.push_back(d);
      c.eps_lower.push_back(iv->first);
      c.eps_upper.push_back(iv->second);
    }
  }
  return c;
}

inline bool inside_bistable_region(const ModelParams& p) {
  const auto iv = bistable_interval(p.delta, p.chi, p.gamma);
  return iv && p.epsilon > iv->first && p.epsilon < iv->second;
}

}  // namespace duffing
