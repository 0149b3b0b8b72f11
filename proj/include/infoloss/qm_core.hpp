#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "infoloss/errors.hpp"
#include "infoloss/rng.hpp"

namespace infoloss {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

namespace qm {

inline constexpr double kHermiticityTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityTol = 1e-9;
inline constexpr double kNormTol = 1e-12;

/// Acceptance windows for the DensityMatrix invariants. Construction uses the
/// defaults; states coming out of long evolutions are checked with looser
/// windows (see lindblad::kEvolvedTol).
struct StateTolerance {
  double hermiticity = kHermiticityTol;
  double trace = kTraceTol;
  double positivity = kPositivityTol;
};

double max_abs(const Matrix& m);
/// max|m - m^dagger| / max(1, max|m|).
double hermiticity_residual(const Matrix& m);
Matrix hermitian_part(const Matrix& m);
Matrix commutator(const Matrix& a, const Matrix& b);
Matrix anticommutator(const Matrix& a, const Matrix& b);
Matrix kron(const Matrix& a, const Matrix& b);
Matrix identity(int dim);

class HermitianOperator {
 public:
  /// Throws ValidationError ("hermiticity") when the residual exceeds tol.
  explicit HermitianOperator(const Matrix& data, double tol = kHermiticityTol);

  int dim() const { return static_cast<int>(data_.rows()); }
  const Matrix& matrix() const { return data_; }

 private:
  Matrix data_;
};

class PureState {
 public:
  /// Throws ValidationError ("normalization") unless | |psi|^2 - 1 | <= 1e-12.
  explicit PureState(const Vector& amplitudes);
  /// Normalizes the input first; throws on a zero vector.
  static PureState normalized(const Vector& amplitudes);

  int dim() const { return static_cast<int>(amps_.size()); }
  const Vector& amplitudes() const { return amps_; }

 private:
  Vector amps_;
};

class DensityMatrix {
 public:
  /// Validates hermiticity, unit trace and positivity; stores the hermitian part.
  explicit DensityMatrix(const Matrix& data, const StateTolerance& tol = {});
  static DensityMatrix pure(const PureState& psi);
  static DensityMatrix maximally_mixed(int dim);

  int dim() const { return static_cast<int>(data_.rows()); }
  const Matrix& matrix() const { return data_; }

 private:
  Matrix data_;
};

struct Eigensystem {
  RealVector values;  // ascending
  Matrix vectors;     // columns are eigenvectors
};

Eigensystem eig_hermitian(const HermitianOperator& op);
/// Same as above for a raw matrix; validates hermiticity to kHermiticityTol.
Eigensystem eig_hermitian(const Matrix& m);
/// Eigenvalues only, ascending.
RealVector eigenvalues_hermitian(const Matrix& m);
double min_eigenvalue(const Matrix& m);

/// -sum p log p over a spectrum. Entries in [-tol, 0) are clamped to 0, above
/// 1 to 1; anything below -tol throws ValidationError ("positivity").
double entropy_of_spectrum(const RealVector& eigenvalues, double tol = kPositivityTol);
double von_neumann_entropy(const DensityMatrix& rho);
double purity(const DensityMatrix& rho);

/// Trace over every subsystem not listed in `keep`. Subsystem 0 is the most
/// significant tensor factor (standard Kronecker order).
Matrix partial_trace(const Matrix& op, std::span<const int> dims, std::span<const int> keep);
DensityMatrix partial_trace(const DensityMatrix& rho, std::span<const int> dims,
                            std::span<const int> keep);

/// Reshapes a pure state into the (kept x traced) coefficient matrix M such
/// that the reduced state on `keep` is M M^dagger.
Matrix bipartition(const Vector& psi, std::span<const int> dims, std::span<const int> keep);

/// Sum of |eigenvalues| of a hermitian matrix.
double trace_norm_hermitian(const Matrix& m);

/// exp(-i t H) via the spectral decomposition.
Matrix unitary_exp(const HermitianOperator& h, double t);

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of R's diagonal absorbed into Q (Mezzadri's construction).
Matrix haar_unitary(int dim, SeededRng& rng);

/// Haar-random pure state (first column of a Haar unitary, in distribution).
PureState random_pure_state(int dim, SeededRng& rng);

/// Random state of the given rank: spectrum uniform on the simplex
/// (normalized exponentials), eigenvectors from a Haar unitary.
DensityMatrix random_density(int dim, int rank, SeededRng& rng);

/// Random hermitian matrix with independent Gaussian entries (GUE-like),
/// scaled by `scale`.
HermitianOperator random_hermitian(int dim, SeededRng& rng, double scale = 1.0);

/// Hermitian operator basis {Q^0 = 1, Q^1..Q^{d^2-1}} with the traceless
/// elements Hilbert-Schmidt orthonormal (tr Q^a Q^b = delta_ab), plus the
/// structure table g with Q^b Q^a = sum_c g(b, a, c) Q^c over all c
/// including the identity.
class OperatorBasis {
 public:
  int dim() const { return dim_; }
  int size() const { return static_cast<int>(ops_.size()); }
  const Matrix& op(int index) const { return ops_.at(static_cast<std::size_t>(index)); }
  const std::vector<Matrix>& ops() const { return ops_; }

  Complex g(int beta, int alpha, int gamma) const {
    const std::size_t n = ops_.size();
    return structure_[(static_cast<std::size_t>(beta) * n + static_cast<std::size_t>(alpha)) * n +
                      static_cast<std::size_t>(gamma)];
  }

  /// Coefficients c with m = sum_c c_c Q^c (Hilbert-Schmidt projection).
  Vector expand(const Matrix& m) const;
  Matrix combine(const Vector& coefficients) const;

 private:
  friend OperatorBasis hermitian_basis(int dim);
  int dim_ = 0;
  std::vector<Matrix> ops_;
  std::vector<Complex> structure_;
};

OperatorBasis hermitian_basis(int dim);

}  // namespace qm
}  // namespace infoloss
