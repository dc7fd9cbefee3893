#pragma once

#include <random>

#include "duffing/fock.hpp"

namespace testing_util {

using duffing::complex;
using duffing::Matrix;

inline Matrix random_complex(std::mt19937& rng, int d) {
  std::normal_distribution<double> g;
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = complex(g(rng), g(rng));
  return m;
}

inline Matrix random_hermitian(std::mt19937& rng, int d) {
  const Matrix m = random_complex(rng, d);
  return 0.5 * (m + m.adjoint());
}

inline Matrix random_density(std::mt19937& rng, int d) {
  const Matrix m = random_complex(rng, d);
  Matrix r = m * m.adjoint();
  return r / r.trace().real();
}

inline Matrix random_unitary(std::mt19937& rng, int d) {
  Eigen::HouseholderQR<Matrix> qr(random_complex(rng, d));
  return qr.householderQ() * Matrix::Identity(d, d);
}

inline double uniform(std::mt19937& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

}  // namespace testing_util
