#pragma once

#include <functional>
#include <span>
#include <vector>

#include "infoloss/qm_core.hpp"

namespace infoloss::lindblad {

using qm::DensityMatrix;
using qm::HermitianOperator;

/// Hermiticity and trace windows for states produced by evolution.
inline constexpr double kEvolvedTol = 1e-9;

/// Hermitian coupling matrix h_ab of the dissipator.
class CouplingMatrix {
 public:
  explicit CouplingMatrix(const Matrix& h);
  static CouplingMatrix diagonal(std::span<const double> entries);

  int size() const { return static_cast<int>(h_.rows()); }
  const Matrix& matrix() const { return h_; }
  /// max |Im h_ab| <= 1e-12
  bool is_real_symmetric() const;
  /// smallest eigenvalue >= -1e-10
  bool is_psd() const;
  double min_eigenvalue() const;

 private:
  Matrix h_;
};

/// drho/dt = -i[H, rho] - 1/2 sum_ab h_ab (Q^b Q^a rho + rho Q^b Q^a - 2 Q^a rho Q^b)
class LindbladGenerator {
 public:
  LindbladGenerator(HermitianOperator hamiltonian, std::vector<HermitianOperator> jump_ops,
                    CouplingMatrix couplings);
  /// Unitary-only generator.
  explicit LindbladGenerator(HermitianOperator hamiltonian);

  int dim() const { return hamiltonian_.dim(); }
  const HermitianOperator& hamiltonian() const { return hamiltonian_; }
  const std::vector<HermitianOperator>& jump_ops() const { return jump_ops_; }
  const CouplingMatrix& couplings() const { return couplings_; }

 private:
  HermitianOperator hamiltonian_;
  std::vector<HermitianOperator> jump_ops_;
  CouplingMatrix couplings_;
};

/// Right-hand side of the master equation at rho. Accepts any d x d matrix
/// (the map is linear); the result is hermitian and traceless for hermitian rho.
Matrix apply_generator(const LindbladGenerator& gen, const Matrix& rho);
Matrix apply_generator(const LindbladGenerator& gen, const DensityMatrix& rho);

/// Heisenberg-picture dual: tr(A L(rho)) = tr(L^dagger(A) rho).
Matrix apply_adjoint(const LindbladGenerator& gen, const Matrix& observable);

/// Generator regrouped for repeated application: rho' = G rho + rho G^dagger
/// + sum_l r_l L_l rho L_l^dagger with G = -iH - K/2 and the couplings
/// diagonalized (zero rates dropped). Used by the RK4 path and by large
/// lattice models where a dense superoperator does not fit.
class PreparedGenerator {
 public:
  explicit PreparedGenerator(const LindbladGenerator& gen);
  Matrix apply(const Matrix& rho) const;
  int dim() const { return static_cast<int>(g_.rows()); }
  int rank() const { return static_cast<int>(ops_.size()); }

 private:
  Matrix g_;
  std::vector<Matrix> ops_;
  std::vector<double> rates_;
};

/// d^2 x d^2 matrix acting on column-stacked states: vec(rho)[i + d j] = rho(i, j).
class Superoperator {
 public:
  Superoperator(int dim, Matrix matrix);

  int dim() const { return dim_; }
  const Matrix& matrix() const { return matrix_; }
  Matrix apply(const Matrix& rho) const;
  /// log|det| via LU; finite iff the map is invertible.
  double log_abs_det() const;

 private:
  int dim_;
  Matrix matrix_;
};

Vector vectorize(const Matrix& rho);
Matrix unvectorize(const Vector& v, int dim);

/// Largest dimension for which dense superoperators are built.
inline constexpr int kMaxSuperoperatorDim = 32;

Superoperator build_superoperator(const LindbladGenerator& gen);

/// exp(T L): the finite-time map rho_in -> rho_out. Scaling-and-squaring Pade
/// exponential of the dense generator.
Superoperator superscattering(const LindbladGenerator& gen, double duration);
Superoperator superscattering(const Superoperator& generator, double duration);

enum class Method { exact_exponential, rk4 };

struct Observables {
  Complex trace;
  double purity = 0.0;
  /// NaN when the state has left the positive cone (indefinite couplings).
  double entropy = 0.0;
  double energy = 0.0;
  double min_eig = 0.0;
  double hermiticity = 0.0;
};

Observables observe(const LindbladGenerator& gen, const Matrix& rho);

struct Trajectory {
  std::vector<double> times;
  /// Evolved matrices. They are valid states whenever the couplings are PSD;
  /// with indefinite couplings positivity is measured, not guaranteed.
  std::vector<Matrix> states;
  std::vector<Observables> observables;
};

struct EvolveOptions {
  /// Record every n-th step (the final step is always recorded).
  int record_every = 1;
  bool store_states = true;
  /// Positivity is enforced when the couplings are PSD; set false to only
  /// measure it.
  bool enforce_positivity = true;
  /// Invoked at every recorded step with (t, rho).
  std::function<void(double, const Matrix&)> on_record;
};

/// Integrates from rho0 over [0, T] in `steps` equal steps. The exact method
/// evaluates exp((T/steps) L) once and reuses it. Throws NumericalError with
/// the offending time when trace/hermiticity drift beyond 1e-9, or when
/// positivity fails by more than 1e-9 under PSD couplings.
Trajectory evolve(const LindbladGenerator& gen, const DensityMatrix& rho0, double duration, int steps,
                  Method method, const EvolveOptions& options = {});

/// Pre-canonical form drho/dt = -sum_ab h_ab Q^a rho Q^b over a full operator
/// basis including Q^0 = 1.
class RawGenerator {
 public:
  RawGenerator(qm::OperatorBasis basis, const Matrix& h_full);

  const qm::OperatorBasis& basis() const { return basis_; }
  const Matrix& h_full() const { return h_; }
  int dim() const { return basis_.dim(); }

 private:
  qm::OperatorBasis basis_;
  Matrix h_;
};

Matrix apply_raw(const RawGenerator& raw, const Matrix& rho);

/// Components t_c of the operator sum_ab h_ab Q^b Q^a = sum_c t_c Q^c,
/// computed from the structure table. tr(drho/dt) = 0 for every rho iff t = 0.
Vector trace_constraint_residuals(const RawGenerator& raw);

/// Extracts (H, dissipator block) from a trace-preserving raw generator.
/// Throws ValidationError naming the violated component otherwise.
LindbladGenerator canonicalize(const RawGenerator& raw, double tol = 1e-9);

/// Inverse direction: expresses a generator over the given basis.
RawGenerator to_raw(const LindbladGenerator& gen, const qm::OperatorBasis& basis);

/// h = U diag(rates) U^dagger, Lindblad operators L_l = sum_a U_al Q^a.
struct DiagonalForm {
  RealVector rates;
  std::vector<Matrix> ops;
  Matrix u;
};

DiagonalForm diagonalize_couplings(const LindbladGenerator& gen);

/// -i[H, rho] + sum_l rate_l (L rho L^dagger - 1/2 {L^dagger L, rho})
Matrix apply_diagonal_form(const HermitianOperator& hamiltonian, const DiagonalForm& form, const Matrix& rho);

/// max over samples of |tr(H^k L(rho))|.
double energy_residual(const LindbladGenerator& gen, int k, std::span<const DensityMatrix> samples);

struct EntropyRate {
  double rate = 0.0;
  /// Set when rho has an eigenvalue below 1e-8: the derivative of the
  /// entropy is unbounded near the boundary of the state space.
  bool rank_deficient = false;
};

/// Central difference of S along the exact flow with step 1e-6.
EntropyRate entropy_rate(const LindbladGenerator& gen, const DensityMatrix& rho);

/// Random generator for property tests: GUE Hamiltonian, m random hermitian
/// jump operators, PSD couplings (real symmetric when `real_couplings`).
LindbladGenerator random_psd_generator(int dim, int num_ops, bool real_couplings, SeededRng& rng);

}  // namespace infoloss::lindblad
