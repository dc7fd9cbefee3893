#pragma once

// Lumped-circuit parameters (SI units) to the scaled rotating-frame model,
// and the model response back to the transmitted voltage V2.

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "duffing/fock.hpp"

namespace duffing {

inline constexpr double kHbar = 1.054571817e-34;

struct CircuitParams {
  double L = 0.0;
  double L4 = 0.0;
  double C = 0.0;
  double Cc = 0.0;
  double Z0 = 0.0;
  double R = std::numeric_limits<double>::infinity();  // internal loss; infinity means none
  double Vs = 0.0;
  double omega_p = 0.0;
  double hbar = kHbar;

  void validate() const {
    for (double v : {L, L4, C, Z0, omega_p, hbar}) {
      if (!std::isfinite(v) || !(v > 0.0)) throw Error(ErrorCode::invalid_argument, "circuit values must be positive and finite");
    }
    if (!std::isfinite(Cc) || Cc < 0.0) throw Error(ErrorCode::invalid_argument, "Cc must be >= 0");
    if (!(R > 0.0)) throw Error(ErrorCode::invalid_argument, "R must be > 0");
    if (!std::isfinite(Vs) || Vs < 0.0) throw Error(ErrorCode::invalid_argument, "Vs must be >= 0");
  }
};

struct CircuitModel {
  ModelParams params;
  double omega0 = 0.0;
  double c_total = 0.0;  // C' = C + Cc
  double r_eq = 0.0;     // line loading seen through Cc
  double r_total = 0.0;  // R' = R_eq || R
  double coupling = 0.0; // omega0 Cc Z0
  std::vector<std::string> warnings;
};

inline constexpr double kCouplingLimit = 0.1;

inline CircuitModel to_model(const CircuitParams& c) {
  c.validate();
  CircuitModel m;
  m.c_total = c.C + c.Cc;
  m.omega0 = 1.0 / std::sqrt(c.L * m.c_total);
  m.coupling = m.omega0 * c.Cc * c.Z0;
  m.r_eq = m.coupling > 0.0 ? 2.0 * c.Z0 / (m.coupling * m.coupling) : std::numeric_limits<double>::infinity();
  const double g_total = 1.0 / m.r_eq + 1.0 / c.R;
  m.r_total = 1.0 / g_total;
  m.params.chi = 3.0 * c.hbar / 8.0 * c.L / (m.c_total * c.L4);
  m.params.epsilon = std::pow(c.L / m.c_total, 0.25) * c.Vs / (std::sqrt(8.0 * c.hbar) * c.Z0);
  m.params.gamma = g_total / m.c_total;
  m.params.delta = m.omega0 - c.omega_p;
  if (m.coupling > kCouplingLimit) {
    m.warnings.push_back("omega0 Cc Z0 = " + std::to_string(m.coupling) + " exceeds 0.1; weak-coupling mapping is unreliable");
  }
  return m;
}

struct V2Signal {
  double cos_amplitude;  // in phase with the drive
  double sin_amplitude;  // quadrature
  double prefactor;      // volts per unit <a>
};

/// V2(t) = cos_amplitude cos(omega_p t) + sin_amplitude sin(omega_p t). The
/// charge zero-point factor sqrt(hbar/2) (C'/L)^(1/4) converts <a> to charge.
inline V2Signal v2_signal(complex a_expect, const CircuitParams& c) {
  const CircuitModel m = to_model(c);
  const double q_zpf = std::sqrt(0.5 * c.hbar) * std::pow(m.c_total / c.L, 0.25);
  const double k = m.coupling * q_zpf / m.c_total;
  return {0.5 * c.Vs + k * a_expect.real(), k * a_expect.imag(), k};
}

inline CircuitParams circuit_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::invalid_config, "circuit description must be a JSON object");
  static const char* known[] = {"L", "L4", "C", "Cc", "Z0", "R", "Vs", "omega_p", "hbar"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw Error(ErrorCode::invalid_config, "unknown circuit key '" + it.key() + "'");
  }
  auto num = [&](const char* key, bool required, double fallback) {
    if (!j.contains(key) || j.at(key).is_null()) {
      if (required) throw Error(ErrorCode::invalid_config, std::string("circuit key '") + key + "' is required");
      return fallback;
    }
    if (!j.at(key).is_number()) throw Error(ErrorCode::invalid_config, std::string("circuit key '") + key + "' must be a number");
    return j.at(key).get<double>();
  };
  CircuitParams c;
  c.L = num("L", true, 0.0);
  c.L4 = num("L4", true, 0.0);
  c.C = num("C", true, 0.0);
  c.Cc = num("Cc", true, 0.0);
  c.Z0 = num("Z0", true, 0.0);
  c.R = num("R", false, std::numeric_limits<double>::infinity());
  c.Vs = num("Vs", true, 0.0);
  c.omega_p = num("omega_p", true, 0.0);
  c.hbar = num("hbar", false, kHbar);
  try {
    c.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::invalid_config, e.what());
  }
  return c;
}

inline CircuitParams load_circuit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_failure, "cannot open circuit file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::invalid_config, std::string("circuit file is not valid JSON: ") + e.what());
  }
  return circuit_from_json(j);
}

}  // namespace duffing
