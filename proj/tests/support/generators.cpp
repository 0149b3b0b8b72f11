#include "generators.hpp"

namespace test_support {

using infoloss::Complex;
using infoloss::Matrix;

infoloss::lindblad::RawGenerator random_raw(const infoloss::qm::OperatorBasis& basis, infoloss::SeededRng& rng) {
  const int n = basis.size();
  const int d = basis.dim();
  Matrix h = Matrix::Zero(n, n);
  for (int a = 1; a < n; ++a) {
    h(a, a) = rng.normal();
    for (int b = a + 1; b < n; ++b) {
      h(a, b) = 0.5 * rng.complex_normal();
      h(b, a) = std::conj(h(a, b));
    }
  }
  Matrix s = Matrix::Zero(d, d);
  for (int a = 1; a < n; ++a)
    for (int b = 1; b < n; ++b) s += h(a, b) * basis.op(b) * basis.op(a);
  h(0, 0) = -s.trace().real() / d;
  for (int c = 1; c < n; ++c) {
    const double x = -0.5 * (basis.op(c) * s).trace().real();
    const double y = rng.normal();
    h(c, 0) = Complex(x, y);
    h(0, c) = Complex(x, -y);
  }
  return infoloss::lindblad::RawGenerator(basis, h);
}

}  // namespace test_support
