// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
// Tolerances are the fixed published ones; nothing here is tuned to pass.

#include <chrono>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <thread>

#include "duffing/duffing.hpp"

using namespace duffing;

namespace {

int failures = 0;

void report(const char* id, bool ok, const std::string& detail) {
  std::printf("%s %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int workers() { return std::max(1u, std::thread::hardware_concurrency()); }

bool within(double x, double want, double tol) { return std::abs(x - want) <= tol; }

// ---------------------------------------------------------------------------

void oracle_triangle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(20240601);
  std::uniform_real_distribution<double> ud(-10.0, 2.0);
  std::uniform_real_distribution<double> ue(0.0, 5.0);
  std::vector<double> deltas(50), eps(20);
  for (auto& d : deltas) d = ud(rng);
  for (auto& e : eps) {
    do e = ue(rng);
    while (e == 0.0);
  }
  std::vector<double> err(deltas.size() * eps.size());
  parallel_for(err.size(), workers(), [&](std::size_t k) {
    const ModelParams p{deltas[k % 50], 1.0, eps[k / 50], 2.0};
    const auto ss = converged_steady_state(p);
    err[k] = std::abs(expectation(annihilation(ss.dim), ss.rho) - dw_response(p));
  });
  const double worst = *std::max_element(err.begin(), err.end());
  const double t = seconds_since(t0);
  report("AC1", worst < 1e-6 && t < 300.0,
         "oracle triangle: max |numeric - closed form| = " + num(worst) + " over 1000 samples (tol 1e-6), " + num(t) +
             " s (limit 300 s)");
}

void paper_points() {
  const double eps = 3.2;
  struct Pt {
    const char* name;
    double delta, want, tol;
  };
  std::string detail;
  bool ok = true;
  for (const Pt& pt : {Pt{"A", -7.8, 0.03, 0.01}, Pt{"C", -5.2, 1.74, 0.02}, Pt{"D", -3.0, 0.85, 0.02}}) {
    const auto ss = converged_steady_state({pt.delta, 1.0, eps, 2.0});
    const double s = von_neumann_entropy(ss.rho);
    const bool good = within(s, pt.want, pt.tol);
    ok = ok && good;
    detail += std::string("S_") + pt.name + " = " + num(s) + " (" + num(pt.want) + "+-" + num(pt.tol) + (good ? ")" : ", off)") + "; ";
  }
  const ModelParams c{-5.2, 1.0, eps, 2.0};
  const auto ss = converged_steady_state(c);
  const double n = expectation(number_operator(ss.dim), ss.rho).real();
  const auto sp = low_lying_spectrum(build_superoperator(c, ss.dim), 3);
  const double l1 = sp.eigenvalues[1].real(), l2 = sp.eigenvalues[2].real();
  const bool nok = within(n, 2.56, 0.02);
  const bool l1ok = within(l1, -0.215, 0.005) && std::abs(sp.eigenvalues[1].imag()) < 1e-8;
  const bool l2ok = within(l2, -2.204, 0.02) && std::abs(sp.eigenvalues[2].imag()) < 1e-8;
  ok = ok && nok && l1ok && l2ok;
  detail += "n_C = " + num(n) + "; lambda1 = " + num(l1) + "; lambda2 = " + num(l2) + " (dim " + std::to_string(ss.dim) + ")";
  report("AC2", ok, "point values: " + detail);
}

void mixing() {
  const ModelParams c{-5.2, 1.0, 3.2, 2.0};
  const auto ss = converged_steady_state(c);
  const auto sp = low_lying_spectrum(build_superoperator(c, ss.dim), 2);
  const MetastablePair pair = metastable_extremes(ss.rho, sp.right_eigenmatrices[1]);
  const MixingCurve mc = mixing_curve(pair);
  const bool peak = within(mc.max_excess, 0.74, 0.03);
  const bool noncomm = mc.commutator_norm > 1e-3 && mc.shape_deviation > 1e-6;
  report("AC3", peak && noncomm,
         "mixing curve: peak excess = " + num(mc.max_excess) + " bits at x = " + num(mc.x_at_max) +
             " (0.74+-0.03); ||[rho-, rho+]|| = " + num(mc.commutator_norm) + " (> 1e-3); max deviation from H(x) shape = " +
             num(mc.shape_deviation));
}

void perturbation() {
  bool ok = true;
  std::string detail;

  double worst = 0.0;
  const int dim = 14;
  for (const ModelParams p : {ModelParams{-5.2, 1, 0, 2}, ModelParams{-1, 1, 0, 0.3}, ModelParams{-1, 1, 0, 0.01}}) {
    const Superoperator s0 = build_superoperator(p, dim);
    for (int n = 0; n <= 8; ++n) {
      for (int q = 0; n + 2 * q <= 8; ++q) {
        for (int sgn : {1, -1}) {
          if (n == 0 && sgn < 0) continue;
          const S0Eigenpair e{sgn * n, q, s0_eigenvalue(p, sgn * n, q), s0_eigenmatrix(p, sgn * n, q, dim)};
          worst = std::max(worst, verify_s0_eigen(e, s0).residual);
        }
      }
    }
  }
  ok = ok && worst < 1e-9;
  detail += "max S0 eigen-residual (n+2q<=8) = " + num(worst) + " (tol 1e-9); ";

  double d10 = 0.0, d21 = 0.0;
  for (const ModelParams p : {ModelParams{-2, 1, 0.05, 0.3}, ModelParams{-5.2, 1, 0.1, 2}, ModelParams{-0.7, 1.3, 0.02, 0.5}}) {
    const Matrix bw = bw_steady_state(p, 3, 6);
    d10 = std::max(d10, std::abs(bw(1, 0) - printed_rho10(p)));
    d21 = std::max(d21, std::abs(bw(2, 1) - printed_rho21(p)));
  }
  ok = ok && d10 < 1e-10 && d21 < 1e-10;
  detail += "BW vs printed <1|rho|0>: " + num(d10) + ", <2|rho|1>: " + num(d21) + " (tol 1e-10); ";

  // Taylor coefficients of the closed form: dw(h)/h = c1 + c3 h^2 + c5 h^4 + ...
  // extrapolated by an exact polynomial fit in h^2 through 8 samples
  double worst_c = 0.0;
  for (const ModelParams p : {ModelParams{-2.5, 1, 0, 0.5}, ModelParams{-5.2, 1, 0, 2}, ModelParams{1.5, 1, 0, 1}}) {
    const int m = 8;
    Matrix v(m, m);
    Vector g(m);
    for (int k = 0; k < m; ++k) {
      const double h = 0.2 * (k + 1) / m;
      g(k) = dw_response(p.with_epsilon(h)) / h;
      for (int j = 0; j < m; ++j) v(k, j) = std::pow(h * h, j);
    }
    const Vector coef = v.colPivHouseholderQr().solve(g);
    const complex c1 = coef(0), c3 = coef(1);
    // series coefficients: odd polynomial a1 e + a3 e^3
    const complex ra = response_series(p.with_epsilon(1.0)), rb = response_series(p.with_epsilon(2.0));
    const complex a3 = (rb - 2.0 * ra) / 6.0;
    const complex a1 = ra - a3;
    worst_c = std::max({worst_c, std::abs(c1 - a1) / std::abs(a1), std::abs(c3 - a3) / std::abs(a3)});
  }
  ok = ok && worst_c < 1e-9;
  detail += "series vs extrapolated Taylor coefficients: max rel. diff " + num(worst_c) + " (tol 1e-9)";
  report("AC4", ok, "perturbation identities: " + detail);
}

void fano() {
  const ModelParams p{-1.0, 1.0, 0.012, 0.01};
  const ResponseLine line = closed_form_line(p, -1.05, -0.95, 501);
  const FanoFit f = fano_fit(line.delta, line.magnitude());
  const double q_formula = fano_q(p);
  const double rel = std::abs(f.q_fano - q_formula) / std::abs(q_formula);
  report("AC5", rel <= 0.15 && f.trough_high_side,
         "Fano: fitted q = " + num(f.q_fano) + " vs formula " + num(q_formula) + " (rel. diff " + num(rel) +
             ", tol 0.15); trough at delta = " + num(f.trough_delta) + ", center " + num(f.center) +
             (f.trough_high_side ? " (higher drive frequency side)" : " (lower drive frequency side)"));
}

void onset() {
  const auto t0 = std::chrono::steady_clock::now();
  OnsetOptions opt;
  opt.workers = workers();
  const std::vector<double> gammas{0.003, 0.01, 0.03};
  const OnsetResult r1 = onset_scan(1, gammas, {0.0, 1.0, 0.0, 1.0}, opt);
  const OnsetResult r2 = onset_scan(2, gammas, {0.0, 1.0, 0.0, 1.0}, opt);
  const double t = seconds_since(t0);
  const bool ok = within(*r1.slope, 1.0, 0.15) && within(*r2.slope, 0.5, 0.15) && t < 900.0;
  report("AC6", ok,
         "onset slopes: n=1 " + num(*r1.slope) + " (1.0+-0.15), n=2 " + num(*r2.slope) + " (0.5+-0.15); " + num(t) +
             " s (limit 900 s)");
}

void semiclassical() {
  const ModelParams b{-6.0, 1.0, 3.2, 2.0};
  const auto iv = bistable_interval(b.delta, b.chi, b.gamma);
  const bool inside = iv && b.epsilon > iv->first && b.epsilon < iv->second;
  bool ok = inside;
  double worst = 0.0;
  int tested = 0;
  for (int k = 0; k < 10; ++k) {
    const double d = -9.5 + 5.0 * k / 9.0;
    const auto lim = bistable_interval(d, 1.0, 2.0);
    if (!lim) continue;
    const ModelParams p{d, 1.0, 0.8 * lim->first, 2.0};
    const auto cl = classical_steady_states(p);
    if (cl.count() != 1) ok = false;
    const auto ss = converged_steady_state(p);
    const double q = std::abs(expectation(annihilation(ss.dim), ss.rho));
    const double a = std::abs(cl.branches.front().alpha);
    worst = std::max(worst, std::abs(q - a) / a);
    ++tested;
  }
  ok = ok && tested == 10 && worst < 0.10;
  report("AC7", ok,
         std::string("semiclassical: point B ") + (inside ? "inside" : "NOT inside") + " the bistable region (" +
             (iv ? num(iv->first) + " < eps < " + num(iv->second) : "no interval") + "); low region " +
             std::to_string(tested) + " points, max | |<a>| - |alpha| | / |alpha| = " + num(worst) + " (tol 0.10)");
}

void wigner_props() {
  bool ok = true;
  std::string detail;
  const Matrix vac = DensityMatrix::fock(0, 8).matrix();
  double vac_err = 0.0;
  for (int i = -20; i <= 20; ++i) {
    for (int j = -20; j <= 20; ++j) {
      const complex a(0.15 * i, 0.15 * j);
      vac_err = std::max(vac_err, std::abs(wigner_point(vac, a) - 2.0 / std::numbers::pi * std::exp(-2.0 * std::norm(a))));
    }
  }
  ok = ok && vac_err < 1e-8;
  detail += "vacuum max error " + num(vac_err) + " (tol 1e-8); ";

  double worst_norm = 0.0;
  std::vector<WignerPeak> peaks_c;
  for (double d : {-7.8, -5.2, -3.0}) {
    const auto ss = converged_steady_state({d, 1.0, 3.2, 2.0});
    const WignerGrid g = wigner(ss.rho);
    worst_norm = std::max(worst_norm, std::abs(g.integral() - 1.0));
    if (d == -5.2) {
      peaks_c = local_maxima(g, 1e-3);
      const auto sp = low_lying_spectrum(build_superoperator({d, 1.0, 3.2, 2.0}, ss.dim), 2);
      const MetastablePair pair = metastable_extremes(ss.rho, sp.right_eigenmatrices[1]);
      worst_norm = std::max(worst_norm, std::abs(wigner(pair.rho_plus).integral() - 1.0));
      worst_norm = std::max(worst_norm, std::abs(wigner(pair.rho_minus).integral() - 1.0));
    }
  }
  ok = ok && worst_norm < 0.01;
  detail += "max |integral - 1| = " + num(worst_norm) + " (tol 0.01); ";

  bool distinct = false;
  for (std::size_t i = 0; i < peaks_c.size(); ++i)
    for (std::size_t j = i + 1; j < peaks_c.size(); ++j)
      distinct = distinct || std::abs(std::remainder(peaks_c[i].phase() - peaks_c[j].phase(), 2 * std::numbers::pi)) > 0.1;
  ok = ok && peaks_c.size() >= 2 && distinct;
  detail += "point C maxima: " + std::to_string(peaks_c.size());
  if (peaks_c.size() >= 2) detail += " (phases " + num(peaks_c[0].phase()) + ", " + num(peaks_c[1].phase()) + ")";
  detail += "; ";

  std::mt19937 rng(7);
  std::normal_distribution<double> g;
  double lin = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 6;
    Matrix a(dim, dim), b(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        a(i, j) = complex(g(rng), g(rng));
        b(i, j) = complex(g(rng), g(rng));
      }
    a = a * a.adjoint();
    b = b * b.adjoint();
    a /= a.trace().real();
    b /= b.trace().real();
    const double t = std::uniform_real_distribution<double>(0, 1)(rng);
    const complex z(g(rng), g(rng));
    lin = std::max(lin, std::abs(wigner_point(t * a + (1 - t) * b, z) - t * wigner_point(a, z) - (1 - t) * wigner_point(b, z)));
  }
  ok = ok && lin < 1e-9;
  detail += "linearity max error " + num(lin) + " (tol 1e-9)";
  report("AC8", ok, "Wigner: " + detail);
}

void properties() {
  bool ok = true;
  std::string detail;
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> ud(-10, 2), ue(0.01, 5), ug(0.05, 3);

  double odd = 0.0;
  for (int k = 0; k < 200; ++k) {
    const ModelParams p{ud(rng), 1.0, ue(rng), ug(rng)};
    odd = std::max(odd, std::abs(dw_response(p) + dw_response(p.with_epsilon(-p.epsilon))));
  }
  ok = ok && odd < 1e-12;
  detail += "oddness " + num(odd) + "; ";

  double tr = 0.0;
  for (int k = 0; k < 50; ++k) tr = std::max(tr, build_superoperator({ud(rng), 1.0, ue(rng), ug(rng)}, 4 + k % 30).trace_defect());
  ok = ok && tr < 1e-12;
  detail += "trace defect " + num(tr) + "; ";

  bool kernel = true;
  for (int k = 0; k < 10; ++k) {
    const auto sp = low_lying_spectrum(build_superoperator({ud(rng), 1.0, ue(rng), 2.0}, 16), 2);
    kernel = kernel && std::abs(sp.eigenvalues[0]) < tol::eig && std::abs(sp.eigenvalues[1]) > 10 * tol::eig;
  }
  ok = ok && kernel;
  detail += std::string("kernel unique ") + (kernel ? "yes" : "no") + "; ";

  SweepConfig cfg;
  cfg.method = Method::both;
  cfg.delta = parse_range("-9:1:11", "delta");
  cfg.epsilon = parse_range("0.5:4.5:5", "epsilon");
  cfg.workers = 1;
  const std::string serial = cells_csv(sweep(cfg).cells);
  cfg.workers = 4;
  const std::string parallel = cells_csv(sweep(cfg).cells);
  ok = ok && serial == parallel;
  detail += std::string("parallel/serial ") + (serial == parallel ? "identical" : "DIFFER") + "; ";

  const ModelParams c{-5.2, 1.0, 3.2, 2.0};
  const Superoperator s = build_superoperator(c, 20);
  const DensityMatrix rho0 = steady_state(s);
  const Matrix dir = low_lying_spectrum(s, 2).right_eigenmatrices[1];
  const MetastablePair ref = metastable_extremes(rho0, dir);
  double resc = 0.0;
  for (double k : {-5.0, -0.3, 0.01, 2.0, 100.0}) {
    const MetastablePair m = metastable_extremes(rho0, k * dir);
    resc = std::max({resc, max_abs(m.rho_plus.matrix() - ref.rho_plus.matrix()), max_abs(m.rho_minus.matrix() - ref.rho_minus.matrix())});
  }
  ok = ok && resc < 1e-7;
  detail += "rescaling invariance " + num(resc);
  report("AC9", ok, "property suites: " + detail);
}

}  // namespace

int main() {
  const std::pair<const char*, void (*)()> criteria[] = {
      {"AC1", oracle_triangle}, {"AC2", paper_points}, {"AC3", mixing},        {"AC4", perturbation}, {"AC5", fano},
      {"AC6", onset},           {"AC7", semiclassical}, {"AC8", wigner_props}, {"AC9", properties}};
  for (const auto& [id, fn] : criteria) {
    try {
      fn();
    } catch (const std::exception& e) {
      report(id, false, std::string("raised: ") + e.what());
    }
  }
  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
