#include "infoloss/lindblad.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

namespace infoloss::lindblad {

namespace {

std::string sci(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

void require_dim(const Matrix& rho, int dim, const char* what) {
  if (rho.rows() != dim || rho.cols() != dim)
    throw ShapeError(std::string(what) + ": expected " + std::to_string(dim) + "x" + std::to_string(dim) +
                     " operand, got " + std::to_string(rho.rows()) + "x" + std::to_string(rho.cols()));
}

// K = sum_ab h_ab Q^b Q^a
Matrix dissipator_anticommutator_term(const LindbladGenerator& gen) {
  const int d = gen.dim();
  Matrix k = Matrix::Zero(d, d);
  const auto& ops = gen.jump_ops();
  const Matrix& h = gen.couplings().matrix();
  for (std::size_t a = 0; a < ops.size(); ++a)
    for (std::size_t b = 0; b < ops.size(); ++b) {
      const Complex c = h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (c != Complex(0.0)) k.noalias() += c * (ops[b].matrix() * ops[a].matrix());
    }
  return k;
}

// M^a = sum_b h_ab Q^b
std::vector<Matrix> weighted_partners(const LindbladGenerator& gen) {
  const int d = gen.dim();
  const auto& ops = gen.jump_ops();
  const Matrix& h = gen.couplings().matrix();
  std::vector<Matrix> partners(ops.size(), Matrix::Zero(d, d));
  for (std::size_t a = 0; a < ops.size(); ++a)
    for (std::size_t b = 0; b < ops.size(); ++b) {
      const Complex c = h(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (c != Complex(0.0)) partners[a] += c * ops[b].matrix();
    }
  return partners;
}

}  // namespace

CouplingMatrix::CouplingMatrix(const Matrix& h) {
  if (h.rows() != h.cols()) throw ShapeError("CouplingMatrix: must be square");
  if (h.size() > 0) {
    const double r = qm::hermiticity_residual(h);
    if (r > qm::kHermiticityTol) throw ValidationError("hermiticity: coupling matrix residual " + sci(r));
  }
  h_ = qm::hermitian_part(h);
}

CouplingMatrix CouplingMatrix::diagonal(std::span<const double> entries) {
  Matrix h = Matrix::Zero(static_cast<Eigen::Index>(entries.size()), static_cast<Eigen::Index>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) h(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = entries[i];
  return CouplingMatrix(h);
}

bool CouplingMatrix::is_real_symmetric() const { return h_.size() == 0 || h_.imag().cwiseAbs().maxCoeff() <= 1e-12; }

double CouplingMatrix::min_eigenvalue() const {
  if (h_.size() == 0) return 0.0;
  return qm::min_eigenvalue(h_);
}

bool CouplingMatrix::is_psd() const { return min_eigenvalue() >= -1e-10; }

LindbladGenerator::LindbladGenerator(HermitianOperator hamiltonian, std::vector<HermitianOperator> jump_ops,
                                     CouplingMatrix couplings)
    : hamiltonian_(std::move(hamiltonian)), jump_ops_(std::move(jump_ops)), couplings_(std::move(couplings)) {
  if (static_cast<int>(jump_ops_.size()) != couplings_.size())
    throw ShapeError("LindbladGenerator: " + std::to_string(jump_ops_.size()) + " jump operators but coupling matrix of size " +
                     std::to_string(couplings_.size()));
  for (const auto& q : jump_ops_)
    if (q.dim() != hamiltonian_.dim()) throw ShapeError("LindbladGenerator: jump operator dimension differs from H");
}

LindbladGenerator::LindbladGenerator(HermitianOperator hamiltonian)
    : LindbladGenerator(std::move(hamiltonian), {}, CouplingMatrix(Matrix(0, 0))) {}

Matrix apply_generator(const LindbladGenerator& gen, const Matrix& rho) {
  require_dim(rho, gen.dim(), "apply_generator");
  const Matrix& h = gen.hamiltonian().matrix();
  const Complex i(0.0, 1.0);
  Matrix out = -i * (h * rho - rho * h);
  if (gen.jump_ops().empty()) return out;
  const Matrix k = dissipator_anticommutator_term(gen);
  out -= 0.5 * (k * rho + rho * k);
  const auto partners = weighted_partners(gen);
  for (std::size_t a = 0; a < partners.size(); ++a) out.noalias() += gen.jump_ops()[a].matrix() * rho * partners[a];
  return out;
}

Matrix apply_generator(const LindbladGenerator& gen, const DensityMatrix& rho) {
  return apply_generator(gen, rho.matrix());
}

Matrix apply_adjoint(const LindbladGenerator& gen, const Matrix& observable) {
  require_dim(observable, gen.dim(), "apply_adjoint");
  const Matrix& h = gen.hamiltonian().matrix();
  const Complex i(0.0, 1.0);
  Matrix out = i * (h * observable - observable * h);
  if (gen.jump_ops().empty()) return out;
  const Matrix k = dissipator_anticommutator_term(gen);
  out -= 0.5 * (observable * k + k * observable);
  // tr(A Q^a rho M^a) = tr(M^a A Q^a rho)
  const auto partners = weighted_partners(gen);
  for (std::size_t a = 0; a < partners.size(); ++a) out.noalias() += partners[a] * observable * gen.jump_ops()[a].matrix();
  return out;
}

PreparedGenerator::PreparedGenerator(const LindbladGenerator& gen) {
  const Complex i(0.0, 1.0);
  g_ = -i * gen.hamiltonian().matrix();
  if (gen.jump_ops().empty()) return;
  const DiagonalForm form = diagonalize_couplings(gen);
  const double scale = std::max(1.0, form.rates.cwiseAbs().maxCoeff());
  for (Eigen::Index l = 0; l < form.rates.size(); ++l) {
    const double r = form.rates(l);
    if (std::abs(r) <= 1e-15 * scale) continue;
    const Matrix& op = form.ops[static_cast<std::size_t>(l)];
    g_ -= 0.5 * r * (op.adjoint() * op);
    ops_.push_back(op);
    rates_.push_back(r);
  }
}

Matrix PreparedGenerator::apply(const Matrix& rho) const {
  Matrix out = g_ * rho;
  out.noalias() += rho * g_.adjoint();
  for (std::size_t l = 0; l < ops_.size(); ++l) out.noalias() += rates_[l] * (ops_[l] * rho * ops_[l].adjoint());
  return out;
}

Superoperator::Superoperator(int dim, Matrix matrix) : dim_(dim), matrix_(std::move(matrix)) {
  if (matrix_.rows() != dim * dim || matrix_.cols() != dim * dim) throw ShapeError("Superoperator: matrix must be d^2 x d^2");
}

Matrix Superoperator::apply(const Matrix& rho) const {
  require_dim(rho, dim_, "Superoperator::apply");
  return unvectorize(matrix_ * vectorize(rho), dim_);
}

double Superoperator::log_abs_det() const {
  Eigen::PartialPivLU<Matrix> lu(matrix_);
  const Matrix& f = lu.matrixLU();
  double s = 0.0;
  for (Eigen::Index i = 0; i < f.rows(); ++i) s += std::log(std::abs(f(i, i)));
  return s;
}

Vector vectorize(const Matrix& rho) { return Eigen::Map<const Vector>(rho.data(), rho.size()); }

Matrix unvectorize(const Vector& v, int dim) { return Eigen::Map<const Matrix>(v.data(), dim, dim); }

Superoperator build_superoperator(const LindbladGenerator& gen) {
  const int d = gen.dim();
  if (d > kMaxSuperoperatorDim)
    throw ValidationError("build_superoperator: dim " + std::to_string(d) + " exceeds dense limit " +
                          std::to_string(kMaxSuperoperatorDim) + "; use the rk4 path");
  const Matrix id = qm::identity(d);
  const Matrix& h = gen.hamiltonian().matrix();
  const Complex i(0.0, 1.0);
  // vec(A rho B) = (B^T kron A) vec(rho)
  Matrix l = -i * (qm::kron(id, h) - qm::kron(h.transpose(), id));
  if (!gen.jump_ops().empty()) {
    const Matrix k = dissipator_anticommutator_term(gen);
    l -= 0.5 * (qm::kron(id, k) + qm::kron(k.transpose(), id));
    const auto partners = weighted_partners(gen);
    for (std::size_t a = 0; a < partners.size(); ++a) l += qm::kron(partners[a].transpose(), gen.jump_ops()[a].matrix());
  }
  return Superoperator(d, std::move(l));
}

Superoperator superscattering(const Superoperator& generator, double duration) {
  if (duration < 0.0) throw ValidationError("superscattering: duration must be >= 0");
  if (duration == 0.0) return Superoperator(generator.dim(), Matrix::Identity(generator.matrix().rows(), generator.matrix().cols()));
  Matrix scaled = duration * generator.matrix();
  return Superoperator(generator.dim(), scaled.exp());
}

Superoperator superscattering(const LindbladGenerator& gen, double duration) {
  return superscattering(build_superoperator(gen), duration);
}

Observables observe(const LindbladGenerator& gen, const Matrix& rho) {
  Observables obs;
  obs.trace = rho.trace();
  obs.hermiticity = qm::hermiticity_residual(rho);
  const Matrix herm = qm::hermitian_part(rho);
  obs.purity = herm.squaredNorm();
  obs.energy = (gen.hamiltonian().matrix() * herm).trace().real();
  const RealVector eig = qm::eigenvalues_hermitian(herm);
  obs.min_eig = eig(0);
  obs.entropy = obs.min_eig < -qm::kPositivityTol ? std::numeric_limits<double>::quiet_NaN()
                                                   : qm::entropy_of_spectrum(eig);
  return obs;
}

Trajectory evolve(const LindbladGenerator& gen, const DensityMatrix& rho0, double duration, int steps, Method method,
                  const EvolveOptions& options) {
  require_dim(rho0.matrix(), gen.dim(), "evolve");
  if (steps < 1) throw ValidationError("evolve: steps must be >= 1");
  if (!(duration > 0.0)) throw ValidationError("evolve: duration must be > 0");
  if (options.record_every < 1) throw ValidationError("evolve: record_every must be >= 1");
  const double dt = duration / steps;
  const bool check_positivity = options.enforce_positivity && gen.couplings().is_psd();

  Trajectory traj;
  auto record = [&](int step, const Matrix& rho) {
    const double t = step * dt;
    Observables obs = observe(gen, rho);
    if (std::abs(obs.trace - 1.0) > kEvolvedTol)
      throw NumericalError("trace drift " + sci(std::abs(obs.trace - 1.0)) + " at t=" + std::to_string(t), t);
    if (obs.hermiticity > kEvolvedTol)
      throw NumericalError("hermiticity drift " + sci(obs.hermiticity) + " at t=" + std::to_string(t), t);
    if (check_positivity && obs.min_eig < -qm::kPositivityTol)
      throw NumericalError("positivity violation: min eigenvalue " + sci(obs.min_eig) + " at t=" + std::to_string(t), t);
    traj.times.push_back(t);
    traj.observables.push_back(obs);
    if (options.store_states) traj.states.push_back(rho);
    if (options.on_record) options.on_record(t, rho);
  };

  Matrix rho = rho0.matrix();
  record(0, rho);
  if (method == Method::exact_exponential) {
    const Superoperator step_map = superscattering(gen, dt);
    Vector v = vectorize(rho);
    for (int s = 1; s <= steps; ++s) {
      v = step_map.matrix() * v;
      if (s % options.record_every == 0 || s == steps) record(s, unvectorize(v, gen.dim()));
    }
  } else {
    const PreparedGenerator prepared(gen);
    for (int s = 1; s <= steps; ++s) {
      const Matrix k1 = prepared.apply(rho);
      const Matrix k2 = prepared.apply(rho + 0.5 * dt * k1);
      const Matrix k3 = prepared.apply(rho + 0.5 * dt * k2);
      const Matrix k4 = prepared.apply(rho + dt * k3);
      rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (s % options.record_every == 0 || s == steps) record(s, rho);
    }
  }
  return traj;
}

RawGenerator::RawGenerator(qm::OperatorBasis basis, const Matrix& h_full) : basis_(std::move(basis)) {
  if (h_full.rows() != basis_.size() || h_full.cols() != basis_.size())
    throw ShapeError("RawGenerator: h_full must be " + std::to_string(basis_.size()) + "x" + std::to_string(basis_.size()));
  const double r = qm::hermiticity_residual(h_full);
  if (r > qm::kHermiticityTol) throw ValidationError("hermiticity: h_full residual " + sci(r));
  h_ = qm::hermitian_part(h_full);
}

Matrix apply_raw(const RawGenerator& raw, const Matrix& rho) {
  require_dim(rho, raw.dim(), "apply_raw");
  const int n = raw.basis().size();
  Matrix out = Matrix::Zero(raw.dim(), raw.dim());
  for (int a = 0; a < n; ++a) {
    Matrix partner = Matrix::Zero(raw.dim(), raw.dim());
    for (int b = 0; b < n; ++b)
      if (raw.h_full()(a, b) != Complex(0.0)) partner += raw.h_full()(a, b) * raw.basis().op(b);
    out.noalias() -= raw.basis().op(a) * rho * partner;
  }
  return out;
}

Vector trace_constraint_residuals(const RawGenerator& raw) {
  const int n = raw.basis().size();
  Vector t = Vector::Zero(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const Complex h = raw.h_full()(a, b);
      if (h == Complex(0.0)) continue;
      for (int c = 0; c < n; ++c) t(c) += h * raw.basis().g(b, a, c);
    }
  return t;
}

LindbladGenerator canonicalize(const RawGenerator& raw, double tol) {
  const Vector t = trace_constraint_residuals(raw);
  const double scale = std::max(1.0, qm::max_abs(raw.h_full()));
  for (Eigen::Index c = 0; c < t.size(); ++c) {
    if (std::abs(t(c)) <= tol * scale) continue;
    if (c == 0)
      throw ValidationError("trace preservation: identity component h_00 + sum_{a,b!=0} h_ab g(b,a,0) = " +
                            sci(std::abs(t(c))) + " (must vanish)");
    throw ValidationError("trace preservation: component " + std::to_string(c) + ": (h_0c + h_c0) + sum_{a,b!=0} h_ab g(b,a,c) = " +
                          sci(std::abs(t(c))) + " (must vanish)");
  }
  // drho/dt = sum F Q^a rho Q^b with F = -h; the Hamiltonian comes from
  // sum_a (F_0a - F_a0) Q^a = 2i H and the couplings are the F block.
  const int n = raw.basis().size();
  const int d = raw.dim();
  const Matrix f = -raw.h_full();
  Matrix h = Matrix::Zero(d, d);
  for (int a = 1; a < n; ++a) h += ((f(0, a) - f(a, 0)) / Complex(0.0, 2.0)) * raw.basis().op(a);
  std::vector<HermitianOperator> ops;
  ops.reserve(static_cast<std::size_t>(n - 1));
  for (int a = 1; a < n; ++a) ops.emplace_back(raw.basis().op(a));
  return LindbladGenerator(HermitianOperator(h), std::move(ops), CouplingMatrix(f.bottomRightCorner(n - 1, n - 1)));
}

RawGenerator to_raw(const LindbladGenerator& gen, const qm::OperatorBasis& basis) {
  const int d = gen.dim();
  if (basis.dim() != d) throw ShapeError("to_raw: basis dimension differs from generator");
  const int n = basis.size();
  const int m = static_cast<int>(gen.jump_ops().size());
  // Q^a = sum_i c_ai B^i
  Matrix c(m, n);
  for (int a = 0; a < m; ++a) c.row(a) = basis.expand(gen.jump_ops()[static_cast<std::size_t>(a)].matrix()).transpose();
  const Matrix ft = m > 0 ? Matrix(c.transpose() * gen.couplings().matrix() * c) : Matrix(Matrix::Zero(n, n));
  const Complex i(0.0, 1.0);
  Matrix x = -i * gen.hamiltonian().matrix();
  if (m > 0) x -= 0.5 * dissipator_anticommutator_term(gen);
  for (int k = 1; k < n; ++k) x += ft(k, 0) * basis.op(k);
  x += 0.5 * ft(0, 0) * qm::identity(d);
  const Vector xc = basis.expand(x);
  Matrix f = ft;
  for (int k = 1; k < n; ++k) {
    f(k, 0) = xc(k);
    f(0, k) = std::conj(xc(k));
  }
  f(0, 0) = 2.0 * xc(0).real();
  return RawGenerator(basis, -f);
}

DiagonalForm diagonalize_couplings(const LindbladGenerator& gen) {
  const Matrix& h = gen.couplings().matrix();
  const auto m = h.rows();
  DiagonalForm form;
  if (m == 0) return form;
  Matrix off = h;
  off.diagonal().setZero();
  if (qm::max_abs(off) <= 1e-14) {
    form.rates = h.diagonal().real();
    form.u = Matrix::Identity(m, m);
    for (const auto& q : gen.jump_ops()) form.ops.push_back(q.matrix());
    return form;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  form.rates = solver.eigenvalues();
  form.u = solver.eigenvectors();
  for (Eigen::Index l = 0; l < m; ++l) {
    Matrix op = Matrix::Zero(gen.dim(), gen.dim());
    for (Eigen::Index a = 0; a < m; ++a) op += form.u(a, l) * gen.jump_ops()[static_cast<std::size_t>(a)].matrix();
    form.ops.push_back(std::move(op));
  }
  return form;
}

Matrix apply_diagonal_form(const HermitianOperator& hamiltonian, const DiagonalForm& form, const Matrix& rho) {
  require_dim(rho, hamiltonian.dim(), "apply_diagonal_form");
  const Matrix& h = hamiltonian.matrix();
  const Complex i(0.0, 1.0);
  Matrix out = -i * (h * rho - rho * h);
  for (Eigen::Index l = 0; l < form.rates.size(); ++l) {
    const Matrix& op = form.ops[static_cast<std::size_t>(l)];
    const Matrix ldl = op.adjoint() * op;
    out += form.rates(l) * (op * rho * op.adjoint() - 0.5 * (ldl * rho + rho * ldl));
  }
  return out;
}

double energy_residual(const LindbladGenerator& gen, int k, std::span<const DensityMatrix> samples) {
  if (k < 1) throw ValidationError("energy_residual: k must be >= 1");
  Matrix hk = gen.hamiltonian().matrix();
  for (int p = 1; p < k; ++p) hk = hk * gen.hamiltonian().matrix();
  double worst = 0.0;
  for (const auto& rho : samples) worst = std::max(worst, std::abs((hk * apply_generator(gen, rho)).trace()));
  return worst;
}

EntropyRate entropy_rate(const LindbladGenerator& gen, const DensityMatrix& rho) {
  constexpr double step = 1e-6;
  EntropyRate out;
  const RealVector spectrum = qm::eigenvalues_hermitian(rho.matrix());
  out.rank_deficient = spectrum(0) < 1e-8;
  const Superoperator l = build_superoperator(gen);
  const Matrix forward = unvectorize(Matrix((step * l.matrix()).exp()) * vectorize(rho.matrix()), gen.dim());
  const double s_plus = qm::entropy_of_spectrum(qm::eigenvalues_hermitian(forward));
  if (out.rank_deficient) {
    // Backward step would leave the state space; fall back to a one-sided difference.
    out.rate = (s_plus - qm::entropy_of_spectrum(spectrum)) / step;
    return out;
  }
  const Matrix backward = unvectorize(Matrix((-step * l.matrix()).exp()) * vectorize(rho.matrix()), gen.dim());
  const double s_minus = qm::entropy_of_spectrum(qm::eigenvalues_hermitian(backward));
  out.rate = (s_plus - s_minus) / (2.0 * step);
  return out;
}

LindbladGenerator random_psd_generator(int dim, int num_ops, bool real_couplings, SeededRng& rng) {
  if (num_ops < 1) throw ValidationError("random_psd_generator: need at least one jump operator");
  HermitianOperator h = qm::random_hermitian(dim, rng, 1.0);
  std::vector<HermitianOperator> ops;
  for (int a = 0; a < num_ops; ++a) ops.push_back(qm::random_hermitian(dim, rng, 1.0 / std::sqrt(static_cast<double>(dim))));
  Matrix a(num_ops, num_ops);
  for (int j = 0; j < num_ops; ++j)
    for (int i = 0; i < num_ops; ++i) a(i, j) = real_couplings ? Complex(rng.normal(), 0.0) : rng.complex_normal();
  Matrix h_ab = a * a.adjoint() * (0.3 / num_ops);
  if (real_couplings) h_ab = h_ab.real().cast<Complex>();
  return LindbladGenerator(std::move(h), std::move(ops), CouplingMatrix(h_ab));
}

}  // namespace infoloss::lindblad
