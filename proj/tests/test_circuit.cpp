#include <gtest/gtest.h>

#include "duffing/circuit.hpp"

using namespace duffing;

namespace {
// reference circuit; expected model values from mpmath at 50 digits
CircuitParams reference() {
  CircuitParams c;
  c.L = 1e-9;
  c.C = 99e-15;
  c.Cc = 1e-15;
  c.Z0 = 50.0;
  c.L4 = 3.955e-40;
  c.Vs = 4.6473e-7;
  c.omega_p = 1.052e11;
  return c;
}

void expect_rel(double got, double want, double rel) { EXPECT_NEAR(got, want, rel * std::abs(want)); }
}  // namespace

TEST(Circuit, ReferenceMapping) {
  const CircuitModel m = to_model(reference());
  expect_rel(m.omega0, 1e11, 1e-14);
  expect_rel(m.params.chi, 999910066.68773704172, 1e-12);
  expect_rel(m.params.epsilon, 3199982700.1179328975, 1e-12);
  expect_rel(m.r_eq, 4e6, 1e-12);
  expect_rel(m.params.gamma, 2.5e6, 1e-12);
  expect_rel(m.params.delta, -5.2e9, 1e-12);
  expect_rel(m.coupling, 0.005, 1e-12);
  expect_rel(m.params.epsilon / m.params.chi, 3.2002705110451286561, 1e-12);
  EXPECT_TRUE(m.warnings.empty());
}

TEST(Circuit, InternalLossAddsInParallel) {
  CircuitParams c = reference();
  c.R = 1e6;
  expect_rel(to_model(c).params.gamma, 1.25e7, 1e-12);
}

TEST(Circuit, VoltagePrefactor) {
  CircuitParams c = reference();
  c.Vs = 1.5e-5;
  const V2Signal v = v2_signal(complex(0.0, 0.0), c);
  expect_rel(v.prefactor, 3.630722753461079132e-8, 1e-12);
  EXPECT_EQ(v.cos_amplitude, 0.5 * c.Vs);
  const V2Signal w = v2_signal(complex(1.0, -2.0), c);
  EXPECT_NEAR(w.sin_amplitude, -2.0 * v.prefactor, 1e-22);
}

TEST(Circuit, MonotoneInParameters) {
  const CircuitParams base = reference();
  CircuitParams c = base;
  c.Vs *= 2.0;
  expect_rel(to_model(c).params.epsilon, 2.0 * to_model(base).params.epsilon, 1e-14);
  c = base;
  c.L4 *= 2.0;
  EXPECT_LT(to_model(c).params.chi, to_model(base).params.chi);
  c = base;
  c.Cc *= 2.0;
  EXPECT_GT(to_model(c).params.gamma, to_model(base).params.gamma);
}

TEST(Circuit, StrongCouplingWarns) {
  CircuitParams c = reference();
  c.Cc = 40e-15;
  EXPECT_FALSE(to_model(c).warnings.empty());
}

TEST(Circuit, JsonParsing) {
  const nlohmann::json j = {{"L", 1e-9}, {"C", 99e-15}, {"Cc", 1e-15}, {"Z0", 50}, {"L4", 3.955e-40},
                            {"Vs", 4.6473e-7}, {"omega_p", 1.052e11}, {"R", nullptr}};
  const CircuitParams c = circuit_from_json(j);
  EXPECT_TRUE(std::isinf(c.R));
  nlohmann::json bad = j;
  bad["Lk"] = 1.0;
  EXPECT_THROW(circuit_from_json(bad), Error);
  bad = j;
  bad.erase("Z0");
  EXPECT_THROW(circuit_from_json(bad), Error);
  bad = j;
  bad["C"] = -1.0;
  try {
    circuit_from_json(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_config);
  }
}
