#pragma once

// Exact steady-state response of the driven Kerr oscillator as a ratio of
// two 0F2 functions (Drummond-Walls solution).

#include "duffing/fock.hpp"
#include "duffing/hypergeometric.hpp"

namespace duffing {

struct ResponseReport {
  complex value;
  Hyper0F2Report numerator;
  Hyper0F2Report denominator;
};

/// <a> in the sign convention of the master equation, so that it matches
/// Tr(a rho0) of the numerical steady state.
inline ResponseReport dw_response_report(const ModelParams& p) {
  p.require_finite();
  if (p.chi == 0.0) throw Error(ErrorCode::invalid_argument, "closed form needs chi != 0");
  const complex i(0.0, 1.0);
  const complex lead = p.delta - 0.5 * i * p.gamma;
  if (lead == 0.0) throw Error(ErrorCode::parameter_pole, "delta - i gamma/2 vanishes");
  if (p.epsilon == 0.0) return {0.0, {1.0, 1, 1.0, 16}, {1.0, 1, 1.0, 16}};

  const complex z = 2.0 * p.epsilon * p.epsilon / (p.chi * p.chi);
  const complex b_plus = (p.delta + 0.5 * i * p.gamma) / p.chi;
  ResponseReport r;
  r.numerator = hyper_0f2_report((lead + p.chi) / p.chi, b_plus, z);
  r.denominator = hyper_0f2_report(lead / p.chi, b_plus, z);
  if (r.denominator.value == 0.0) throw Error(ErrorCode::parameter_pole, "0F2 denominator vanishes");
  r.value = -p.epsilon / lead * r.numerator.value / r.denominator.value;
  return r;
}

inline complex dw_response(const ModelParams& p) { return dw_response_report(p).value; }

}  // namespace duffing
