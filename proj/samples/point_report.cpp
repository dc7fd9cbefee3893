// point_report: steady-state summary at one (delta, epsilon).
//
//   point_report                 # point C: delta=-5.2, eps=3.2, gamma=2
//   point_report -3.0 3.2 2.0
//
// Prints the numeric and closed-form <a>, entropy, photon number, the three
// slowest Liouvillian eigenvalues and, when the slowest mode is real, the
// metastable pair.

#include <cstdio>
#include <cstdlib>

#include "duffing/duffing.hpp"

using namespace duffing;

int main(int argc, char** argv) {
  ModelParams p{-5.2, 1.0, 3.2, 2.0};
  if (argc > 1) p.delta = std::atof(argv[1]);
  if (argc > 2) p.epsilon = std::atof(argv[2]);
  if (argc > 3) p.gamma = std::atof(argv[3]);
  try {
    p.require_physical();
    const auto ss = converged_steady_state(p);
    const int d = ss.dim;
    const complex a = expectation(annihilation(d), ss.rho);
    const complex cf = dw_response(p);
    std::printf("delta=%g epsilon=%g gamma=%g chi=%g  (dim %d, top population %.1e)\n", p.delta, p.epsilon, p.gamma,
                p.chi, d, ss.top_population);
    std::printf("<a> numeric      % .10f %+.10fi\n", a.real(), a.imag());
    std::printf("<a> closed form  % .10f %+.10fi\n", cf.real(), cf.imag());
    std::printf("photons %.6f   entropy %.6f bits   purity %.6f\n", expectation(number_operator(d), ss.rho).real(),
                von_neumann_entropy(ss.rho), purity(ss.rho.matrix()));

    const auto branches = classical_steady_states(p);
    std::printf("classical branches: %zu%s\n", branches.count(), inside_bistable_region(p) ? " (bistable)" : "");

    const auto sp = low_lying_spectrum(build_superoperator(p, d), 4);
    for (std::size_t k = 0; k < sp.eigenvalues.size(); ++k)
      std::printf("lambda_%zu  % .6f %+.6fi\n", k, sp.eigenvalues[k].real(), sp.eigenvalues[k].imag());

    if (is_real_eigenvalue(sp.eigenvalues[1])) {
      const MetastablePair m = metastable_extremes(ss.rho, sp.right_eigenmatrices[1]);
      std::printf("rho-: entropy %.4f, photons %.4f   rho+: entropy %.4f, photons %.4f   x = %.4f\n",
                  von_neumann_entropy(m.rho_minus), expectation(number_operator(d), m.rho_minus).real(),
                  von_neumann_entropy(m.rho_plus), expectation(number_operator(d), m.rho_plus).real(),
                  m.steady_state_fraction());
      const MixingCurve mc = mixing_curve(m);
      std::printf("mixing: peak excess %.4f bits at x = %.3f\n", mc.max_excess, mc.x_at_max);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "%s: %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return 2;
  }
  return 0;
}
