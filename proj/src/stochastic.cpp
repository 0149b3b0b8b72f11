#include "infoloss/stochastic.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "infoloss/parallel.hpp"

namespace infoloss::stochastic {

namespace {

constexpr long kBlock = 64;

// next = h * term for small operands; plain real arithmetic keeps the inner
// loop free of the library complex-multiply NaN handling.
void small_product(const Matrix& h, const Matrix& term, Matrix& next) {
  const Eigen::Index d = h.rows(), cols = term.cols();
  const Complex* hp = h.data();
  const Complex* tp = term.data();
  Complex* np = next.data();
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index i = 0; i < d; ++i) {
      double re = 0.0, im = 0.0;
      for (Eigen::Index k = 0; k < d; ++k) {
        const Complex a = hp[i + k * d], b = tp[k + c * d];
        re += a.real() * b.real() - a.imag() * b.imag();
        im += a.real() * b.imag() + a.imag() * b.real();
      }
      np[i + c * d] = Complex(re, im);
    }
}

// v <- exp(-i tau h) v by a truncated Taylor series, split into substeps so
// each has ||tau h||_1 <= 1/2.
void exp_action(const Matrix& h, double tau, Matrix& v, Matrix& term, Matrix& next) {
  const Eigen::Index d = h.rows();
  double norm = 0.0;
  for (Eigen::Index j = 0; j < d; ++j) {
    double col = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) col += std::abs(h(i, j).real()) + std::abs(h(i, j).imag());
    norm = std::max(norm, col);
  }
  norm *= std::abs(tau);
  const int substeps = std::max(1, static_cast<int>(std::ceil(norm / 0.5)));
  const double step = -tau / substeps;
  term.resize(v.rows(), v.cols());
  next.resize(v.rows(), v.cols());
  for (int s = 0; s < substeps; ++s) {
    term = v;
    for (int k = 1; k < 60; ++k) {
      small_product(h, term, next);
      // term = (-i step / k) * next
      const double f = step / k;
      double biggest = 0.0;
      for (Eigen::Index e = 0; e < term.size(); ++e) {
        const Complex x = next.data()[e];
        const Complex t(-f * x.imag(), f * x.real());
        term.data()[e] = t;
        v.data()[e] += t;
        biggest = std::max(biggest, std::abs(t.real()) + std::abs(t.imag()));
      }
      if (biggest <= 1e-17) break;
    }
  }
}

// rho0 = V V^dagger with V = eigenvectors scaled by sqrt(eigenvalues).
Matrix state_factor(const DensityMatrix& rho0) {
  const qm::Eigensystem es = qm::eig_hermitian(rho0.matrix());
  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = 0; k < es.values.size(); ++k)
    if (es.values(k) > 1e-15) kept.push_back(k);
  Matrix v(rho0.dim(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c)
    v.col(static_cast<Eigen::Index>(c)) = std::sqrt(es.values(kept[c])) * es.vectors.col(kept[c]);
  return v;
}

struct Moments {
  RealMatrix sum_re, sum_im, sq_re, sq_im;
};

Moments zero_moments(int d) {
  return {RealMatrix::Zero(d, d), RealMatrix::Zero(d, d), RealMatrix::Zero(d, d), RealMatrix::Zero(d, d)};
}

class Integrator {
 public:
  explicit Integrator(const NoiseSpec& spec)
      : spec_(spec), h_(spec.dim(), spec.dim()), term_(), next_(), z_(spec.factor().cols()), j_(spec.factor().rows()) {}

  // Advances v through all steps; noise rows either drawn from rng or read from table.
  void run(Matrix& v, SeededRng* rng, const RealMatrix* table) {
    const double dt = spec_.dt();
    const double inv_sqrt_dt = 1.0 / std::sqrt(dt);
    const auto& sources = spec_.sources();
    for (int s = 0; s < spec_.steps(); ++s) {
      if (table) {
        j_ = table->row(s).transpose();
      } else if (z_.size() > 0) {
        for (Eigen::Index r = 0; r < z_.size(); ++r) z_(r) = rng->normal();
        j_.noalias() = spec_.factor() * z_ * inv_sqrt_dt;
      } else {
        j_.setZero();
      }
      h_ = spec_.h0().matrix();
      for (std::size_t a = 0; a < sources.size(); ++a)
        if (j_(static_cast<Eigen::Index>(a)) != 0.0) h_ += j_(static_cast<Eigen::Index>(a)) * sources[a].matrix();
      exp_action(h_, dt, v, term_, next_);
    }
  }

 private:
  const NoiseSpec& spec_;
  Matrix h_, term_, next_;
  RealVector z_, j_;
};

}  // namespace

NoiseSpec::NoiseSpec(HermitianOperator h0, std::vector<HermitianOperator> sources, CouplingMatrix covariance, double dt,
                     double duration)
    : h0_(std::move(h0)), sources_(std::move(sources)), covariance_(std::move(covariance)), dt_(dt), duration_(duration) {
  if (static_cast<int>(sources_.size()) != covariance_.size())
    throw ShapeError("NoiseSpec: " + std::to_string(sources_.size()) + " sources but covariance of size " +
                     std::to_string(covariance_.size()));
  for (const auto& q : sources_)
    if (q.dim() != h0_.dim()) throw ShapeError("NoiseSpec: source dimension differs from H0");
  if (!covariance_.is_real_symmetric()) throw ValidationError("NoiseSpec: covariance must be real symmetric");
  if (!(dt_ > 0.0) || !(duration_ > 0.0)) throw ValidationError("NoiseSpec: dt and duration must be positive");
  const double ratio = duration_ / dt_;
  steps_ = static_cast<int>(std::llround(ratio));
  if (steps_ < 1 || std::abs(ratio - steps_) > 1e-9 * std::max(1.0, ratio))
    throw ValidationError("NoiseSpec: duration must be an integer multiple of dt");

  const RealMatrix h = covariance_.matrix().real();
  const int m = static_cast<int>(h.rows());
  if (m == 0) {
    factor_ = RealMatrix(0, 0);
    return;
  }
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(h);
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  std::vector<int> kept;
  for (int k = 0; k < m; ++k) {
    const double lam = solver.eigenvalues()(k);
    if (lam < -1e-12 * scale)
      throw ValidationError("NoiseSpec: covariance is indefinite (eigenvalue " + std::to_string(lam) + ")");
    if (lam > 1e-12 * scale) kept.push_back(k);
  }
  factor_ = RealMatrix(m, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c)
    factor_.col(static_cast<Eigen::Index>(c)) = std::sqrt(solver.eigenvalues()(kept[c])) * solver.eigenvectors().col(kept[c]);
}

NoiseSpec NoiseSpec::with_dt(double dt) const { return NoiseSpec(h0_, sources_, covariance_, dt, duration_); }

RealMatrix sample_noise(const NoiseSpec& spec, SeededRng& rng) {
  const auto m = static_cast<Eigen::Index>(spec.sources().size());
  RealMatrix out = RealMatrix::Zero(spec.steps(), m);
  const double inv_sqrt_dt = 1.0 / std::sqrt(spec.dt());
  RealVector z(spec.factor().cols());
  for (int s = 0; s < spec.steps(); ++s) {
    if (z.size() == 0) continue;
    for (Eigen::Index r = 0; r < z.size(); ++r) z(r) = rng.normal();
    out.row(s) = (spec.factor() * z * inv_sqrt_dt).transpose();
  }
  return out;
}

DensityMatrix evolve_with_noise(const NoiseSpec& spec, const DensityMatrix& rho0, const RealMatrix& noise) {
  if (rho0.dim() != spec.dim()) throw ShapeError("evolve_with_noise: state dimension differs from H0");
  if (noise.rows() != spec.steps() || noise.cols() != static_cast<Eigen::Index>(spec.sources().size()))
    throw ShapeError("evolve_with_noise: noise table must be steps x sources");
  Matrix v = state_factor(rho0);
  Integrator(spec).run(v, nullptr, &noise);
  return DensityMatrix(v * v.adjoint(), {1e-8, 1e-8, 1e-8});
}

DensityMatrix evolve_trajectory(const NoiseSpec& spec, const DensityMatrix& rho0, SeededRng& rng) {
  if (rho0.dim() != spec.dim()) throw ShapeError("evolve_trajectory: state dimension differs from H0");
  Matrix v = state_factor(rho0);
  Integrator(spec).run(v, &rng, nullptr);
  return DensityMatrix(v * v.adjoint(), {1e-8, 1e-8, 1e-8});
}

EnsembleResult ensemble_average(const NoiseSpec& spec, const DensityMatrix& rho0, long n, std::uint64_t master_seed,
                                unsigned threads) {
  if (n < 1) throw ValidationError("ensemble_average: n must be >= 1");
  if (rho0.dim() != spec.dim()) throw ShapeError("ensemble_average: state dimension differs from H0");
  const int d = spec.dim();
  const Matrix v0 = state_factor(rho0);
  const long blocks = (n + kBlock - 1) / kBlock;
  std::vector<Moments> parts(static_cast<std::size_t>(blocks));
  parallel_for(
      static_cast<std::size_t>(blocks),
      [&](std::size_t b) {
        Moments m = zero_moments(d);
        Integrator integ(spec);
        const long begin = static_cast<long>(b) * kBlock;
        const long end = std::min(n, begin + kBlock);
        for (long i = begin; i < end; ++i) {
          SeededRng rng = SeededRng::substream(master_seed, static_cast<std::uint64_t>(i));
          Matrix v = v0;
          integ.run(v, &rng, nullptr);
          const Matrix rho = v * v.adjoint();
          const RealMatrix re = rho.real(), im = rho.imag();
          m.sum_re += re;
          m.sum_im += im;
          m.sq_re += re.cwiseAbs2();
          m.sq_im += im.cwiseAbs2();
        }
        parts[b] = std::move(m);
      },
      threads);
  const Moments total = pairwise_reduce(std::move(parts), [](const Moments& a, const Moments& b) {
    return Moments{a.sum_re + b.sum_re, a.sum_im + b.sum_im, a.sq_re + b.sq_re, a.sq_im + b.sq_im};
  });
  const double nn = static_cast<double>(n);
  const RealMatrix mean_re = total.sum_re / nn, mean_im = total.sum_im / nn;
  auto stderr_of = [&](const RealMatrix& sq, const RealMatrix& mean) {
    if (n < 2) return RealMatrix(RealMatrix::Zero(d, d));
    const RealMatrix var = ((sq / nn - mean.cwiseAbs2()) * (nn / (nn - 1.0))).cwiseMax(0.0);
    return RealMatrix((var / nn).cwiseSqrt());
  };
  Matrix mean(d, d);
  mean.real() = mean_re;
  mean.imag() = mean_im;
  return EnsembleResult{DensityMatrix(mean, {1e-8, 1e-8, 1e-8}), n, stderr_of(total.sq_re, mean_re),
                        stderr_of(total.sq_im, mean_im)};
}

lindblad::LindbladGenerator matched_generator(const NoiseSpec& spec) {
  return lindblad::LindbladGenerator(spec.h0(), spec.sources(), spec.covariance());
}

Matrix reference_state(const lindblad::LindbladGenerator& gen, const DensityMatrix& rho0, double duration) {
  if (gen.dim() <= lindblad::kMaxSuperoperatorDim) return lindblad::superscattering(gen, duration).apply(rho0.matrix());
  const int steps = std::max(1000, static_cast<int>(std::ceil(duration / 1e-3)));
  lindblad::EvolveOptions opts;
  opts.record_every = steps;
  opts.store_states = true;
  return lindblad::evolve(gen, rho0, duration, steps, lindblad::Method::rk4, opts).states.back();
}

ComparisonReport compare_to_generator(const NoiseSpec& spec, const lindblad::LindbladGenerator& gen,
                                      const DensityMatrix& rho0, long n, std::uint64_t master_seed,
                                      unsigned threads) {
  if (gen.dim() != spec.dim()) throw ShapeError("compare_to_generator: generator dimension differs from H0");
  EnsembleResult ens = ensemble_average(spec, rho0, n, master_seed, threads);
  Matrix ref = reference_state(gen, rho0, spec.duration());
  const int d = spec.dim();
  const Matrix diff = ens.mean_state.matrix() - ref;
  RealMatrix z = RealMatrix::Zero(d, d);
  auto z_of = [](double dev, double se) {
    if (se > 0.0) return dev / se;
    return dev <= 1e-9 ? 0.0 : std::numeric_limits<double>::infinity();
  };
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i)
      z(i, j) = std::max(z_of(std::abs(diff(i, j).real()), ens.stderr_re(i, j)),
                         z_of(std::abs(diff(i, j).imag()), ens.stderr_im(i, j)));
  const double max_dev = diff.cwiseAbs().maxCoeff();
  const double z_max = z.maxCoeff();
  return ComparisonReport{std::move(ens), std::move(ref), max_dev, std::move(z), z_max};
}

ComparisonReport compare_to_lindblad(const NoiseSpec& spec, const DensityMatrix& rho0, long n,
                                     std::uint64_t master_seed, unsigned threads) {
  return compare_to_generator(spec, matched_generator(spec), rho0, n, master_seed, threads);
}

Quadrature gauss_hermite(int points) {
  if (points < 1) throw ValidationError("gauss_hermite: need at least one point");
  // Jacobi matrix of the probabilists' Hermite recurrence.
  RealMatrix j = RealMatrix::Zero(points, points);
  for (int k = 1; k < points; ++k) j(k, k - 1) = j(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(j);
  Quadrature q;
  for (int k = 0; k < points; ++k) {
    q.nodes.push_back(solver.eigenvalues()(k));
    const double first = solver.eigenvectors()(0, k);
    q.weights.push_back(first * first);
  }
  return q;
}

lindblad::Superoperator averaged_step_channel(const NoiseSpec& spec, int points) {
  const int d = spec.dim();
  if (d > lindblad::kMaxSuperoperatorDim) throw ValidationError("averaged_step_channel: dimension too large");
  const auto r = spec.factor().cols();
  const Quadrature q = gauss_hermite(points);
  const double sqrt_dt = std::sqrt(spec.dt());
  Matrix channel = Matrix::Zero(d * d, d * d);
  std::vector<int> idx(static_cast<std::size_t>(r), 0);
  while (true) {
    double w = 1.0;
    RealVector z(r);
    for (Eigen::Index a = 0; a < r; ++a) {
      z(a) = q.nodes[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
      w *= q.weights[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])];
    }
    // integrated step generator dt H0 + sum xi_a Q^a with xi ~ N(0, h dt)
    const RealVector xi = r > 0 ? RealVector(spec.factor() * z * sqrt_dt) : RealVector::Zero(static_cast<Eigen::Index>(spec.sources().size()));
    Matrix g = spec.dt() * spec.h0().matrix();
    for (std::size_t a = 0; a < spec.sources().size(); ++a) g += xi(static_cast<Eigen::Index>(a)) * spec.sources()[a].matrix();
    const Matrix u = qm::unitary_exp(HermitianOperator(g), 1.0);
    channel += w * qm::kron(u.conjugate(), u);
    std::size_t a = 0;
    while (a < idx.size() && ++idx[a] == points) idx[a++] = 0;
    if (a == idx.size()) break;
  }
  return lindblad::Superoperator(d, std::move(channel));
}

Matrix averaged_evolution(const NoiseSpec& spec, const DensityMatrix& rho0, int points) {
  if (rho0.dim() != spec.dim()) throw ShapeError("averaged_evolution: state dimension differs from H0");
  const lindblad::Superoperator step = averaged_step_channel(spec, points);
  Vector v = lindblad::vectorize(rho0.matrix());
  for (int s = 0; s < spec.steps(); ++s) v = step.matrix() * v;
  return lindblad::unvectorize(v, spec.dim());
}

}  // namespace infoloss::stochastic
