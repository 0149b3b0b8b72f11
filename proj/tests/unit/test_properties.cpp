#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "../support/generators.hpp"
#include "../support/oracles.hpp"
#include "infoloss/infoscrambling.hpp"
#include "infoloss/lindblad.hpp"
#include "infoloss/models.hpp"
#include "infoloss/stochastic.hpp"

using namespace infoloss;
using lindblad::CouplingMatrix;
using lindblad::LindbladGenerator;
using qm::DensityMatrix;
using qm::HermitianOperator;

namespace {

double entropy_oracle(const Matrix& rho) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
  double s = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double p = es.eigenvalues()(i);
    if (p > 1e-15) s -= p * std::log(p);
  }
  return s;
}

LindbladGenerator random_generator(int dim, int ops, const Matrix& couplings, SeededRng& rng) {
  std::vector<HermitianOperator> q;
  for (int i = 0; i < ops; ++i) q.push_back(qm::random_hermitian(dim, rng));
  return LindbladGenerator(qm::random_hermitian(dim, rng), q, CouplingMatrix(couplings));
}

// State with a zero eigenvalue along the first column of a Haar basis.
Matrix boundary_state(int dim, SeededRng& rng, Matrix& basis) {
  basis = qm::haar_unitary(dim, rng);
  RealVector p(dim);
  p(0) = 0;
  for (int i = 1; i < dim; ++i) p(i) = rng.uniform(0.1, 1.0);
  p /= p.sum();
  return basis * p.cast<Complex>().asDiagonal() * basis.adjoint();
}

}  // namespace

TEST_SUITE("properties") {

TEST_CASE("entropy is unitarily invariant and bounded") {
  SeededRng rng(51);
  for (int t = 0; t < 200; ++t) {
    const int d = 2 + t % 5;
    const auto rho = qm::random_density(d, 1 + t % d, rng);
    const Matrix u = qm::haar_unitary(d, rng);
    const double s = qm::von_neumann_entropy(rho);
    CHECK(std::abs(qm::von_neumann_entropy(DensityMatrix(u * rho.matrix() * u.adjoint())) - s) <= 1e-9);
    CHECK(s >= 0.0);
    CHECK(s <= std::log(d) + 1e-12);
    CHECK(s == doctest::Approx(entropy_oracle(rho.matrix())).epsilon(1e-10));
  }
  for (int d = 2; d <= 6; ++d) {
    CHECK(std::abs(qm::von_neumann_entropy(DensityMatrix::pure(qm::random_pure_state(d, rng)))) <= 1e-12);
    CHECK(qm::von_neumann_entropy(DensityMatrix::maximally_mixed(d)) == doctest::Approx(std::log(d)).epsilon(1e-14));
  }
}

TEST_CASE("partial trace preserves trace and positivity") {
  SeededRng rng(52);
  struct Split {
    std::vector<int> dims;
    std::vector<int> keep;
  };
  const std::vector<Split> splits{{{2, 2}, {0}}, {{2, 3}, {1}}, {{3, 2}, {0}}, {{2, 2, 2}, {0, 2}}, {{2, 3, 2}, {1}}};
  for (const auto& s : splits) {
    int total = 1;
    for (int d : s.dims) total *= d;
    for (int t = 0; t < 200; ++t) {
      const auto rho = qm::random_density(total, 1 + t % total, rng);
      const auto reduced = qm::partial_trace(rho, s.dims, s.keep);
      CHECK(std::abs(reduced.matrix().trace() - Complex(1.0)) <= 1e-12);
      CHECK(qm::eigenvalues_hermitian(reduced.matrix()).minCoeff() >= -1e-12);
    }
  }
}

TEST_CASE("complementary subsystems of pure states") {
  SeededRng rng(53);
  const std::vector<int> dims{2, 3, 2};
  for (int t = 0; t < 50; ++t) {
    const auto psi = DensityMatrix::pure(qm::random_pure_state(12, rng));
    const std::vector<int> a{0}, b{1, 2}, c{0, 1}, e{2};
    CHECK(std::abs(qm::von_neumann_entropy(qm::partial_trace(psi, dims, a)) -
                   qm::von_neumann_entropy(qm::partial_trace(psi, dims, b))) <= 1e-8);
    CHECK(std::abs(qm::von_neumann_entropy(qm::partial_trace(psi, dims, c)) -
                   qm::von_neumann_entropy(qm::partial_trace(psi, dims, e))) <= 1e-8);
  }
}

TEST_CASE("trace and hermiticity under indefinite couplings") {
  SeededRng rng(54);
  lindblad::EvolveOptions measure;
  measure.enforce_positivity = false;
  for (int t = 0; t < 20; ++t) {
    const int d = 2 + t % 3;
    const Matrix h = qm::random_hermitian(3, rng).matrix();
    const auto gen = random_generator(d, 3, h, rng);
    CHECK_FALSE(gen.couplings().is_psd());
    const auto traj = lindblad::evolve(gen, qm::random_density(d, d, rng), 1.0, 40, lindblad::Method::exact_exponential, measure);
    for (const auto& obs : traj.observables) {
      CHECK(std::abs(obs.trace - Complex(1.0)) <= 1e-9);
      CHECK(obs.hermiticity <= 1e-9);
    }
  }
}

TEST_CASE("positivity and entropy under PSD couplings") {
  SeededRng rng(55);
  for (int t = 0; t < 20; ++t) {
    const int d = 2 + t % 3;
    const bool real = t % 2 == 0;
    const auto gen = lindblad::random_psd_generator(d, 2, real, rng);
    const auto traj = lindblad::evolve(gen, qm::random_density(d, 1 + t % d, rng), 5.0, 100, lindblad::Method::exact_exponential);
    for (std::size_t k = 0; k < traj.observables.size(); ++k) {
      CHECK(traj.observables[k].min_eig >= -1e-8);
      if (real && k > 0) CHECK(traj.observables[k].entropy - traj.observables[k - 1].entropy >= -1e-8);
    }
  }
}

TEST_CASE("probability flux at the boundary") {
  SeededRng rng(56);
  for (int t = 0; t < 50; ++t) {
    const int d = 2 + t % 3;
    const auto gen = lindblad::random_psd_generator(d, 3, t % 2 == 0, rng);
    Matrix v;
    const Matrix rho = boundary_state(d, rng, v);
    const Matrix rate = v.adjoint() * lindblad::apply_generator(gen, DensityMatrix(rho)) * v;
    const double flux = rate(0, 0).real();
    CHECK(flux >= -1e-10);

    // sum_l r_l sum_i |(L_l)_{1i}|^2 p_i in the eigenbasis of rho.
    const auto form = lindblad::diagonalize_couplings(gen);
    const Matrix p = v.adjoint() * rho * v;
    double expected = 0;
    for (int l = 0; l < form.rates.size(); ++l) {
      const Matrix op = v.adjoint() * form.ops[static_cast<std::size_t>(l)] * v;
      for (int i = 0; i < d; ++i) expected += form.rates(l) * std::norm(op(0, i)) * p(i, i).real();
    }
    CHECK(flux == doctest::Approx(expected).epsilon(1e-10).scale(1.0));
  }
}

TEST_CASE("superscattering maps are invertible") {
  SeededRng rng(57);
  for (int t = 0; t < 10; ++t) {
    const auto gen = lindblad::random_psd_generator(2 + t % 3, 2, false, rng);
    const auto big_l = lindblad::build_superoperator(gen);
    for (double duration : {0.1, 1.0, 10.0}) {
      // det exp(T L) = exp(T tr L)
      const double log_det = lindblad::superscattering(gen, duration).log_abs_det();
      CHECK(std::isfinite(log_det));
      CHECK(log_det == doctest::Approx(duration * big_l.matrix().trace().real()).epsilon(1e-8));
    }
  }
}

TEST_CASE("canonical form reproduces raw generators") {
  SeededRng rng(58);
  for (int d : {2, 3}) {
    const auto basis = qm::hermitian_basis(d);
    std::vector<Matrix> ops;
    for (int a = 0; a < basis.size(); ++a) ops.push_back(basis.op(a));
    for (int t = 0; t < 10; ++t) {
      const auto raw = test_support::random_raw(basis, rng);
      const auto gen = lindblad::canonicalize(raw);
      for (int s = 0; s < 3; ++s) {
        const auto rho = qm::random_density(d, d, rng);
        CHECK(oracle::max_abs(lindblad::apply_generator(gen, rho) - oracle::raw_rhs(ops, raw.h_full(), rho.matrix())) <= 1e-9);
      }
    }
  }
}

TEST_CASE("stochastic time-step bias is first order") {
  SeededRng rng(59);
  const auto h0 = qm::random_hermitian(2, rng);
  Matrix cov(2, 2);
  cov << 0.5, 0.0, 0.0, 0.3;
  const auto base = stochastic::NoiseSpec(h0, {HermitianOperator(oracle::pauli_x()), HermitianOperator(oracle::pauli_z())},
                                          CouplingMatrix(cov), 1e-2, 1.0);
  const auto rho0 = qm::random_density(2, 2, rng);
  const Matrix ref = stochastic::reference_state(stochastic::matched_generator(base), rho0, 1.0);

  // Monte Carlo deviations fitted as a + b dt.
  const int n = 500;
  std::vector<double> dts{1e-2, 1e-3, 1e-4}, devs;
  for (double dt : dts) {
    const auto avg = stochastic::ensemble_average(base.with_dt(dt), rho0, n, 60);
    devs.push_back(oracle::max_abs(avg.mean_state.matrix() - ref));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < 3; ++i) mx += dts[i] / 3, my += devs[i] / 3;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < 3; ++i) sxy += (dts[i] - mx) * (devs[i] - my), sxx += (dts[i] - mx) * (dts[i] - mx);
  const double b = sxy / sxx, a = my - b * mx;
  CHECK(a <= 3 / std::sqrt(double(n)));

  // The deterministic averaged channel isolates the bias.
  std::vector<double> bias;
  for (double dt : dts) bias.push_back(oracle::max_abs(stochastic::averaged_evolution(base.with_dt(dt), rho0) - ref));
  CHECK(bias[0] / bias[1] == doctest::Approx(10.0).epsilon(0.2));
  CHECK(bias[1] / bias[2] == doctest::Approx(10.0).epsilon(0.2));
}

TEST_CASE("decoherence rate is tunable through the threshold") {
  SeededRng rng(60);
  const auto field = qm::random_hermitian(6, rng);
  const RealVector ev = qm::eigenvalues_hermitian(field.matrix());
  for (int t = 0; t < 10; ++t) {
    const auto lab = qm::random_pure_state(6, rng);
    double last_overlap = 1.0, last_rate = -1.0;
    bool first = true;
    for (int j = 0; j < 5; ++j) {
      const double alpha = 0.5 * (ev(j) + ev(j + 1));
      const models::ProjectionModel model(qm::random_hermitian(6, rng), {{field, alpha, 0.7}});
      const auto rep = models::lab_state_report(model, lab);
      const double overlap = rep.regions[0].overlap;
      const double rate = std::abs(models::decoherence_rate(model, DensityMatrix::pure(lab)));
      CHECK(overlap <= last_overlap + 1e-12);
      // |rate| = 4 lambda p (1 - p) shrinks with p only on p <= 1/2.
      if (!first && last_overlap <= 0.5) CHECK(rate <= last_rate + 1e-12);
      last_overlap = overlap;
      last_rate = rate;
      first = false;
    }
  }
}

TEST_CASE("Page bound holds for every seed") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto rng = SeededRng::substream(61, seed);
    const scrambling::RandomPhaseState state(8, rng);
    for (int k = 0; k <= 8; ++k)
      CHECK(scrambling::subsystem_entropy(state, k) <= std::min(k, 8 - k) * std::numbers::ln2 + 1e-10);
  }
}

TEST_CASE("Monte Carlo results do not depend on the thread count") {
  const auto p1 = scrambling::page_scan(8, 8, 62, 1);
  const auto p4 = scrambling::page_scan(8, 8, 62, 4);
  const auto h1 = scrambling::hp_run({5, 1, 16, 62}, 1);
  const auto h4 = scrambling::hp_run({5, 1, 16, 62}, 4);
  for (std::size_t k = 0; k < p1.size(); ++k) {
    CHECK(p1[k].mean == p4[k].mean);
    CHECK(p1[k].std_error == p4[k].std_error);
  }
  for (std::size_t m = 0; m < h1.rows.size(); ++m) CHECK(h1.rows[m].mean == h4.rows[m].mean);

  SeededRng a(62), b(62);
  const auto s1 = models::liu_positivity_scan(0.1, 8, 1.0, a, 20, 1);
  const auto s4 = models::liu_positivity_scan(0.1, 8, 1.0, b, 20, 4);
  CHECK(s1.state_min == s4.state_min);
  CHECK(s1.state_time == s4.state_time);
}

}  // TEST_SUITE
