#pragma once

// 0F2(; b1, b2; z) by direct summation with running Pochhammer products.
// Cancellation is tracked and the sum is redone in 50 or 100 digits when
// the partial sums dwarf the result.

#include <boost/multiprecision/cpp_complex.hpp>

#include <algorithm>
#include <cmath>
#include <complex>

#include "duffing/errors.hpp"

namespace duffing {

struct Hyper0F2Report {
  std::complex<double> value;
  int terms = 0;
  double cancellation = 1.0;  // max(|term|, |partial sum|) / |sum|
  int precision_digits = 16;
};

// Above this the double-precision sum is redone in extended precision.
// 1e8 lets relative errors near 1e-8 through (0F2(;1,1;-2000) comes out
// 5e-10 off at 1.6e7), so the switch happens earlier.
inline constexpr double kCancellationLimit = 1e6;

namespace detail {

inline bool is_nonpositive_integer(std::complex<double> b) {
  return b.imag() == 0.0 && b.real() <= 0.0 && b.real() == std::round(b.real());
}

template <typename C>
double to_double(const C& x) {
  return static_cast<double>(x);
}

template <typename C>
std::complex<double> to_complex(const C& x) {
  return {static_cast<double>(x.real()), static_cast<double>(x.imag())};
}

/// Partial sums until the geometric tail bound drops below rel_tol |sum|.
/// The stop test only engages past k > max(-Re b) + 1, where the term ratio
/// is monotone, and after three consecutive shrinking terms.
template <typename C>
Hyper0F2Report sum_0f2(std::complex<double> b1d, std::complex<double> b2d, std::complex<double> zd,
                       double rel_tol, int digits) {
  using std::abs;
  const C b1(b1d.real(), b1d.imag());
  const C b2(b2d.real(), b2d.imag());
  const C z(zd.real(), zd.imag());
  const double kmin = std::max(-b1d.real(), -b2d.real()) + 1.0;
  const double az = std::abs(zd);

  const C one(1.0, 0.0);
  C term = one, sum = one;
  double peak = 1.0;
  double prev = 1.0;
  int shrinking = 0;
  int k = 0;
  for (;; ++k) {
    if (k > 200000) throw Error(ErrorCode::iteration_limit, "0F2 series did not converge");
    const C kk(static_cast<double>(k), 0.0);
    term *= z / ((kk + one) * (b1 + kk) * (b2 + kk));
    sum += term;
    const double at = to_double(abs(term));
    const double as = to_double(abs(sum));
    peak = std::max({peak, at, as});
    shrinking = at < prev ? shrinking + 1 : 0;
    prev = at;
    if (k + 1 <= kmin || shrinking < 3) continue;
    const double r = az / ((k + 2.0) * std::abs(b1d + double(k + 1)) * std::abs(b2d + double(k + 1)));
    if (r < 1.0 && at * r / (1.0 - r) <= rel_tol * as) break;
  }
  Hyper0F2Report rep;
  rep.value = to_complex(sum);
  rep.terms = k + 2;
  const double as = to_double(abs(sum));
  rep.cancellation = as > 0.0 ? peak / as : INFINITY;
  rep.precision_digits = digits;
  return rep;
}

}  // namespace detail

/// Full report including the term count and the precision actually used.
inline Hyper0F2Report hyper_0f2_report(std::complex<double> b1, std::complex<double> b2,
                                       std::complex<double> z) {
  if (detail::is_nonpositive_integer(b1) || detail::is_nonpositive_integer(b2)) {
    throw Error(ErrorCode::parameter_pole, "0F2 lower parameter is a nonpositive integer");
  }
  if (!std::isfinite(std::abs(b1)) || !std::isfinite(std::abs(b2)) || !std::isfinite(std::abs(z))) {
    throw Error(ErrorCode::invalid_argument, "0F2 arguments must be finite");
  }
  if (z == 0.0) return {1.0, 1, 1.0, 16};

  auto rep = detail::sum_0f2<std::complex<double>>(b1, b2, z, 1e-16, 16);
  if (rep.cancellation <= kCancellationLimit) return rep;

  namespace mp = boost::multiprecision;
  rep = detail::sum_0f2<mp::cpp_complex_50>(b1, b2, z, 1e-20, 50);
  if (rep.cancellation <= 1e30) return rep;
  return detail::sum_0f2<mp::cpp_complex_100>(b1, b2, z, 1e-20, 100);
}

inline std::complex<double> hyper_0f2(std::complex<double> b1, std::complex<double> b2,
                                      std::complex<double> z) {
  return hyper_0f2_report(b1, b2, z).value;
}

}  // namespace duffing
