#include "infoloss/qm_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

namespace infoloss::qm {

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0)
    throw ShapeError(std::string(what) + ": expected a non-empty square matrix, got " +
                     std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

// Multi-index offsets of every configuration of the listed subsystems.
std::vector<Eigen::Index> subsystem_offsets(std::span<const int> dims, const std::vector<int>& which) {
  std::vector<Eigen::Index> strides(dims.size());
  Eigen::Index stride = 1;
  for (std::size_t i = dims.size(); i-- > 0;) {
    strides[i] = stride;
    stride *= dims[i];
  }
  std::vector<Eigen::Index> offsets{0};
  for (int s : which) {
    std::vector<Eigen::Index> next;
    next.reserve(offsets.size() * static_cast<std::size_t>(dims[static_cast<std::size_t>(s)]));
    for (Eigen::Index base : offsets)
      for (int v = 0; v < dims[static_cast<std::size_t>(s)]; ++v)
        next.push_back(base + v * strides[static_cast<std::size_t>(s)]);
    offsets = std::move(next);
  }
  return offsets;
}

struct Split {
  std::vector<int> keep;
  std::vector<int> traced;
  Eigen::Index total = 1;
};

Split validate_split(std::span<const int> dims, std::span<const int> keep) {
  if (dims.empty()) throw ShapeError("partial_trace: empty subsystem list");
  Split split;
  for (int d : dims) {
    if (d < 1) throw ShapeError("partial_trace: subsystem dimensions must be positive");
    split.total *= d;
  }
  if (keep.empty()) throw ShapeError("partial_trace: keep set must be nonempty");
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] < 0 || keep[i] >= static_cast<int>(dims.size()))
      throw ShapeError("partial_trace: keep index " + std::to_string(keep[i]) + " out of range");
    if (i > 0 && keep[i] <= keep[i - 1])
      throw ShapeError("partial_trace: keep indices must be strictly ascending");
  }
  split.keep.assign(keep.begin(), keep.end());
  for (int s = 0; s < static_cast<int>(dims.size()); ++s)
    if (!std::binary_search(keep.begin(), keep.end(), s)) split.traced.push_back(s);
  return split;
}

}  // namespace

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double hermiticity_residual(const Matrix& m) {
  return max_abs(m - m.adjoint()) / std::max(1.0, max_abs(m));
}

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

Matrix anticommutator(const Matrix& a, const Matrix& b) { return a * b + b * a; }

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix identity(int dim) { return Matrix::Identity(dim, dim); }

HermitianOperator::HermitianOperator(const Matrix& data, double tol) {
  require_square(data, "HermitianOperator");
  const double r = hermiticity_residual(data);
  if (r > tol) throw ValidationError("hermiticity: residual " + fmt(r) + " exceeds " + fmt(tol));
  data_ = hermitian_part(data);
}

PureState::PureState(const Vector& amplitudes) {
  if (amplitudes.size() == 0) throw ShapeError("PureState: empty amplitude vector");
  const double err = std::abs(amplitudes.squaredNorm() - 1.0);
  if (err > kNormTol) throw ValidationError("normalization: | |psi|^2 - 1 | = " + fmt(err));
  amps_ = amplitudes;
}

PureState PureState::normalized(const Vector& amplitudes) {
  const double n = amplitudes.norm();
  if (n == 0.0) throw ValidationError("normalization: zero vector");
  return PureState(amplitudes / n);
}

DensityMatrix::DensityMatrix(const Matrix& data, const StateTolerance& tol) {
  require_square(data, "DensityMatrix");
  const double herm = hermiticity_residual(data);
  if (herm > tol.hermiticity)
    throw ValidationError("hermiticity: residual " + fmt(herm) + " exceeds " + fmt(tol.hermiticity));
  const Complex tr = data.trace();
  if (std::abs(tr - 1.0) > tol.trace)
    throw ValidationError("unit trace: |tr rho - 1| = " + fmt(std::abs(tr - 1.0)));
  Matrix h = hermitian_part(data);
  const double lo = min_eigenvalue(h);
  if (lo < -tol.positivity)
    throw ValidationError("positivity: smallest eigenvalue " + fmt(lo) + " below " + fmt(-tol.positivity));
  data_ = std::move(h);
}

DensityMatrix DensityMatrix::pure(const PureState& psi) {
  return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
  if (dim < 1) throw ValidationError("maximally_mixed: dim must be positive");
  return DensityMatrix(identity(dim) / static_cast<double>(dim));
}

namespace {

// The tridiagonal QR iteration occasionally stalls on strongly rank-deficient
// inputs; a diagonal shift changes the iteration path without changing the
// eigenvectors, so retry once with one before giving up.
template <int Options>
Eigen::SelfAdjointEigenSolver<Matrix> solve_hermitian(const Matrix& m, double& shift, const char* who) {
  shift = 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, Options);
  if (solver.info() == Eigen::Success) return solver;
  shift = 0.5 + max_abs(m);
  solver.compute(m + shift * Matrix::Identity(m.rows(), m.cols()), Options);
  if (solver.info() != Eigen::Success) throw NumericalError(std::string(who) + ": solver did not converge");
  return solver;
}

}  // namespace

Eigensystem eig_hermitian(const HermitianOperator& op) {
  double shift = 0.0;
  const auto solver = solve_hermitian<Eigen::ComputeEigenvectors>(op.matrix(), shift, "eig_hermitian");
  return {solver.eigenvalues().array() - shift, solver.eigenvectors()};
}

Eigensystem eig_hermitian(const Matrix& m) { return eig_hermitian(HermitianOperator(m)); }

RealVector eigenvalues_hermitian(const Matrix& m) {
  require_square(m, "eigenvalues_hermitian");
  double shift = 0.0;
  const auto solver = solve_hermitian<Eigen::EigenvaluesOnly>(hermitian_part(m), shift, "eigenvalues_hermitian");
  return solver.eigenvalues().array() - shift;
}

double min_eigenvalue(const Matrix& m) { return eigenvalues_hermitian(m)(0); }

double entropy_of_spectrum(const RealVector& eigenvalues, double tol) {
  double s = 0.0;
  for (double p : eigenvalues) {
    if (p < -tol) throw ValidationError("positivity: eigenvalue " + fmt(p) + " below " + fmt(-tol));
    p = std::clamp(p, 0.0, 1.0);
    if (p > 0.0) s -= p * std::log(p);
  }
  return s;
}

double von_neumann_entropy(const DensityMatrix& rho) {
  return entropy_of_spectrum(eigenvalues_hermitian(rho.matrix()));
}

double purity(const DensityMatrix& rho) {
  // tr(rho^2) = sum |rho_ij|^2 for hermitian rho.
  return rho.matrix().squaredNorm();
}

Matrix partial_trace(const Matrix& op, std::span<const int> dims, std::span<const int> keep) {
  require_square(op, "partial_trace");
  const Split split = validate_split(dims, keep);
  if (split.total != op.rows())
    throw ShapeError("partial_trace: product of dims " + std::to_string(split.total) +
                     " != operator dimension " + std::to_string(op.rows()));
  const auto kept = subsystem_offsets(dims, split.keep);
  const auto traced = subsystem_offsets(dims, split.traced);
  const auto nk = static_cast<Eigen::Index>(kept.size());
  Matrix out = Matrix::Zero(nk, nk);
  for (Eigen::Index a = 0; a < nk; ++a)
    for (Eigen::Index b = 0; b < nk; ++b) {
      Complex acc = 0.0;
      for (Eigen::Index t : traced) acc += op(kept[static_cast<std::size_t>(a)] + t, kept[static_cast<std::size_t>(b)] + t);
      out(a, b) = acc;
    }
  return out;
}

DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> dims, std::span<const int> keep) {
  return DensityMatrix(partial_trace(rho.matrix(), dims, keep));
}

Matrix bipartition(const Vector& psi, std::span<const int> dims, std::span<const int> keep) {
  const Split split = validate_split(dims, keep);
  if (split.total != psi.size())
    throw ShapeError("bipartition: product of dims " + std::to_string(split.total) +
                     " != state dimension " + std::to_string(psi.size()));
  const auto kept = subsystem_offsets(dims, split.keep);
  const auto traced = subsystem_offsets(dims, split.traced);
  Matrix m(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(traced.size()));
  for (std::size_t a = 0; a < kept.size(); ++a)
    for (std::size_t t = 0; t < traced.size(); ++t)
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(t)) = psi(kept[a] + traced[t]);
  return m;
}

double trace_norm_hermitian(const Matrix& m) { return eigenvalues_hermitian(m).cwiseAbs().sum(); }

Matrix unitary_exp(const HermitianOperator& h, double t) {
  const Eigensystem es = eig_hermitian(h);
  Vector phases(es.values.size());
  for (Eigen::Index i = 0; i < es.values.size(); ++i) phases(i) = std::polar(1.0, -t * es.values(i));
  return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

Matrix haar_unitary(int dim, SeededRng& rng) {
  if (dim < 1) throw ValidationError("haar_unitary: dim must be >= 1");
  Matrix z(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) z(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  const Matrix& r = qr.matrixQR();
  for (int j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    const double a = std::abs(d);
    q.col(j) *= (a > 0.0 ? d / a : Complex(1.0));
  }
  return q;
}

PureState random_pure_state(int dim, SeededRng& rng) {
  if (dim < 1) throw ValidationError("random_pure_state: dim must be >= 1");
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = rng.complex_normal();
  return PureState::normalized(v);
}

DensityMatrix random_density(int dim, int rank, SeededRng& rng) {
  if (rank < 1 || rank > dim) throw ValidationError("random_density: need 1 <= rank <= dim");
  RealVector p = RealVector::Zero(dim);
  for (int i = 0; i < rank; ++i) p(i) = rng.exponential();
  p /= p.sum();
  const Matrix u = haar_unitary(dim, rng);
  Matrix rho = u * p.cast<Complex>().asDiagonal() * u.adjoint();
  rho = hermitian_part(rho);
  rho /= rho.trace().real();
  return DensityMatrix(rho);
}

HermitianOperator random_hermitian(int dim, SeededRng& rng, double scale) {
  Matrix a(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int i = 0; i < dim; ++i) a(i, j) = rng.complex_normal();
  return HermitianOperator(scale * hermitian_part(a));
}

Vector OperatorBasis::expand(const Matrix& m) const {
  if (m.rows() != dim_ || m.cols() != dim_) throw ShapeError("OperatorBasis::expand: dimension mismatch");
  Vector c(size());
  c(0) = m.trace() / static_cast<double>(dim_);
  for (int a = 1; a < size(); ++a) c(a) = (ops_[static_cast<std::size_t>(a)] * m).trace();
  return c;
}

Matrix OperatorBasis::combine(const Vector& coefficients) const {
  if (coefficients.size() != size()) throw ShapeError("OperatorBasis::combine: coefficient count mismatch");
  Matrix m = Matrix::Zero(dim_, dim_);
  for (int a = 0; a < size(); ++a) m += coefficients(a) * ops_[static_cast<std::size_t>(a)];
  return m;
}

OperatorBasis hermitian_basis(int dim) {
  if (dim < 2) throw ValidationError("hermitian_basis: dim must be >= 2");
  OperatorBasis basis;
  basis.dim_ = dim;
  basis.ops_.push_back(identity(dim));
  const double s = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < dim; ++j)
    for (int k = j + 1; k < dim; ++k) {
      Matrix sym = Matrix::Zero(dim, dim);
      sym(j, k) = s;
      sym(k, j) = s;
      Matrix asym = Matrix::Zero(dim, dim);
      asym(j, k) = Complex(0.0, -s);
      asym(k, j) = Complex(0.0, s);
      basis.ops_.push_back(std::move(sym));
      basis.ops_.push_back(std::move(asym));
    }
  for (int l = 1; l < dim; ++l) {
    Matrix diag = Matrix::Zero(dim, dim);
    const double norm = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
    for (int i = 0; i < l; ++i) diag(i, i) = norm;
    diag(l, l) = -static_cast<double>(l) * norm;
    basis.ops_.push_back(std::move(diag));
  }
  const auto n = basis.ops_.size();
  basis.structure_.assign(n * n * n, Complex(0.0));
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t a = 0; a < n; ++a) {
      const Matrix prod = basis.ops_[b] * basis.ops_[a];
      const Vector c = basis.expand(prod);
      for (std::size_t g = 0; g < n; ++g) basis.structure_[(b * n + a) * n + g] = c(static_cast<Eigen::Index>(g));
    }
  return basis;
}

}  // namespace infoloss::qm
