#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "../support/oracles.hpp"
#include "infoloss/qm_core.hpp"

using namespace infoloss;
using namespace infoloss::qm;

TEST_SUITE("qm_core") {

TEST_CASE("validation of states and operators") {
  Matrix m(2, 2);
  m << 1, 2, 0, 1;
  CHECK_THROWS_AS(HermitianOperator{m}, ValidationError);

  Matrix rho(2, 2);
  rho << 0.6, 0, 0, 0.5;
  CHECK_THROWS_AS(DensityMatrix{rho}, ValidationError);  // trace 1.1
  rho << 1.2, 0, 0, -0.2;
  CHECK_THROWS_AS(DensityMatrix{rho}, ValidationError);  // negative eigenvalue

  Vector v(2);
  v << 1.0, 1.0;
  CHECK_THROWS_AS(PureState{v}, ValidationError);
  CHECK(PureState::normalized(v).amplitudes().norm() == doctest::Approx(1.0).epsilon(1e-15));

  Matrix rect(2, 3);
  rect.setZero();
  CHECK_THROWS_AS(HermitianOperator{rect}, ShapeError);
}

TEST_CASE("eigendecomposition") {
  Matrix d(2, 2);
  d << 0, 0, 0, 1;
  const auto es = eig_hermitian(HermitianOperator(d));
  CHECK(es.values(0) == doctest::Approx(0.0));
  CHECK(es.values(1) == doctest::Approx(1.0));
  CHECK(oracle::max_abs(es.vectors.cwiseAbs().cast<Complex>() - Matrix::Identity(2, 2)) < 1e-14);

  const auto px = eig_hermitian(HermitianOperator(oracle::pauli_x()));
  CHECK(px.values(0) == doctest::Approx(-1.0));
  CHECK(px.values(1) == doctest::Approx(1.0));

  SeededRng rng(42);
  const auto h = random_hermitian(4, rng);
  const auto e4 = eig_hermitian(h);
  const Matrix rebuilt = e4.vectors * e4.values.cast<Complex>().asDiagonal() * e4.vectors.adjoint();
  CHECK(oracle::max_abs(rebuilt - h.matrix()) <= 1e-9);
  for (int i = 1; i < 4; ++i) CHECK(e4.values(i) >= e4.values(i - 1));
}

TEST_CASE("von Neumann entropy") {
  Matrix pure = Matrix::Zero(2, 2);
  pure(0, 0) = 1;
  CHECK(von_neumann_entropy(DensityMatrix(pure)) == doctest::Approx(0.0));
  CHECK(von_neumann_entropy(DensityMatrix::maximally_mixed(2)) == doctest::Approx(std::numbers::ln2).epsilon(1e-14));

  Matrix d(2, 2);
  d << 0.75, 0, 0, 0.25;
  const double expected = -0.75 * std::log(0.75) - 0.25 * std::log(0.25);
  CHECK(von_neumann_entropy(DensityMatrix(d)) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(0.562335).epsilon(1e-6));

  // Off-diagonal qubit state against the closed-form spectrum.
  Matrix q(2, 2);
  q << 0.7, Complex(0.1, 0.2), Complex(0.1, -0.2), 0.3;
  CHECK(von_neumann_entropy(DensityMatrix(q)) == doctest::Approx(oracle::entropy_2x2(q)).epsilon(1e-13));

  // Eigenvalues slightly below zero are clamped, larger excursions rejected.
  RealVector spec(2);
  spec << 1.0 + 5e-10, -5e-10;
  CHECK(entropy_of_spectrum(spec) >= 0.0);
  spec << 1.1, -0.1;
  CHECK_THROWS_AS(entropy_of_spectrum(spec), ValidationError);
}

TEST_CASE("purity") {
  Matrix d(2, 2);
  d << 0.75, 0, 0, 0.25;
  CHECK(purity(DensityMatrix(d)) == doctest::Approx(0.625));
  CHECK(purity(DensityMatrix::maximally_mixed(3)) == doctest::Approx(1.0 / 3));
  SeededRng rng(1);
  CHECK(purity(DensityMatrix::pure(random_pure_state(5, rng))) == doctest::Approx(1.0));
}

TEST_CASE("partial trace") {
  SeededRng rng(3);
  const auto a = random_density(2, 2, rng);
  const auto b = random_density(3, 2, rng);
  const Matrix ab = kron(a.matrix(), b.matrix());
  const std::vector<int> dims{2, 3};
  const std::vector<int> keep_a{0};
  const std::vector<int> keep_b{1};
  CHECK(oracle::max_abs(partial_trace(ab, dims, keep_a) - a.matrix()) <= 1e-12);
  CHECK(oracle::max_abs(partial_trace(ab, dims, keep_b) - b.matrix()) <= 1e-12);

  Vector bell = Vector::Zero(4);
  bell(0) = bell(3) = 1.0 / std::sqrt(2.0);
  const auto bell_rho = DensityMatrix::pure(PureState(bell));
  const std::vector<int> qubits{2, 2};
  CHECK(oracle::max_abs(partial_trace(bell_rho, qubits, keep_a).matrix() - 0.5 * Matrix::Identity(2, 2)) <= 1e-15);

  // Index-loop oracle on a random 3-qubit mixed state, all keep sets.
  const auto rho = random_density(8, 8, rng);
  const std::vector<int> dims3{2, 2, 2};
  for (const auto& keep : std::vector<std::vector<int>>{{0}, {1}, {2}, {0, 1}, {0, 2}, {1, 2}})
    CHECK(oracle::max_abs(partial_trace(rho.matrix(), dims3, keep) - oracle::partial_trace(rho.matrix(), dims3, keep)) <=
          1e-14);

  const auto psi = DensityMatrix::pure(random_pure_state(8, rng));
  const std::vector<int> keep01{0, 1};
  const std::vector<int> keep2{2};
  CHECK(von_neumann_entropy(partial_trace(psi, dims3, keep01)) ==
        doctest::Approx(von_neumann_entropy(partial_trace(psi, dims3, keep2))).epsilon(1e-9));

  const std::vector<int> bad_dims{2, 2};
  CHECK_THROWS_AS(partial_trace(rho.matrix(), bad_dims, keep_a), ShapeError);
  const std::vector<int> unordered{1, 0};
  CHECK_THROWS_AS(partial_trace(rho.matrix(), dims3, unordered), ValidationError);
}

TEST_CASE("Haar unitaries") {
  SeededRng rng(5);
  const Matrix u1 = haar_unitary(1, rng);
  CHECK(std::abs(u1(0, 0)) == doctest::Approx(1.0).epsilon(1e-14));
  const Matrix u4 = haar_unitary(4, rng);
  CHECK(oracle::max_abs(u4.adjoint() * u4 - Matrix::Identity(4, 4)) <= 1e-9);

  // E|U_00|^2 = 1/2 with variance 1/12 for the 2x2 Haar measure.
  const int samples = 10000;
  double sum = 0.0;
  for (int i = 0; i < samples; ++i) sum += std::norm(haar_unitary(2, rng)(0, 0));
  const double sigma = std::sqrt(1.0 / 12.0 / samples);
  CHECK(std::abs(sum / samples - 0.5) <= 3 * sigma);
}

TEST_CASE("operator basis") {
  const auto b2 = hermitian_basis(2);
  REQUIRE(b2.size() == 4);
  CHECK(oracle::max_abs(b2.op(0) - Matrix::Identity(2, 2)) == 0.0);
  for (int a = 1; a < 4; ++a) {
    CHECK(std::abs(b2.op(a).trace()) <= 1e-15);
    CHECK((b2.op(a) * b2.op(a)).trace().real() == doctest::Approx(1.0));
  }
  // Product of two elements rebuilt from the structure table.
  for (int beta = 1; beta < 4; ++beta)
    for (int alpha = 1; alpha < 4; ++alpha) {
      Matrix rebuilt = Matrix::Zero(2, 2);
      for (int g = 0; g < 4; ++g) rebuilt += b2.g(beta, alpha, g) * b2.op(g);
      CHECK(oracle::max_abs(rebuilt - b2.op(beta) * b2.op(alpha)) <= 1e-12);
    }

  const auto b3 = hermitian_basis(3);
  REQUIRE(b3.size() == 9);
  Matrix gram(8, 8);
  for (int a = 1; a < 9; ++a)
    for (int c = 1; c < 9; ++c) gram(a - 1, c - 1) = (b3.op(a) * b3.op(c)).trace();
  CHECK(oracle::max_abs(gram - Matrix::Identity(8, 8)) <= 1e-12);

  SeededRng rng(8);
  const Matrix m = random_hermitian(3, rng).matrix();
  CHECK(oracle::max_abs(b3.combine(b3.expand(m)) - m) <= 1e-12);
}

TEST_CASE("random density matrices") {
  SeededRng rng(9);
  CHECK(purity(random_density(4, 1, rng)) == doctest::Approx(1.0));
  double mean = 0.0;
  for (int i = 0; i < 1000; ++i) mean += von_neumann_entropy(random_density(3, 3, rng));
  CHECK(mean / 1000 > 0.0);
  for (int r = 1; r <= 4; ++r) {
    const auto rho = random_density(4, r, rng);
    const auto ev = eigenvalues_hermitian(rho.matrix());
    int rank = 0;
    for (int i = 0; i < 4; ++i) rank += ev(i) > 1e-12;
    CHECK(rank == r);
    CHECK(ev.minCoeff() >= -1e-9);
  }
  CHECK_THROWS_AS(random_density(3, 4, rng), ValidationError);
}

TEST_CASE("seeded streams are reproducible") {
  SeededRng a(77), b(77);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  auto s1 = SeededRng::substream(5, 3);
  auto s2 = SeededRng::substream(5, 3);
  auto s3 = SeededRng::substream(5, 4);
  CHECK(s1.next_u64() == s2.next_u64());
  CHECK(s1.next_u64() != s3.next_u64());
}

}  // TEST_SUITE
