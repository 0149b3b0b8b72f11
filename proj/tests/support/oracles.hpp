#pragma once

// Reference implementations for tests. Each one is written from the defining
// formula with explicit loops and shares no code path with the library
// routine it checks.

#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

double max_abs(const Matrix& m);

/// -i[H, rho] - 1/2 sum_ab h_ab (Q^b Q^a rho + rho Q^b Q^a - 2 Q^a rho Q^b), term by term.
Matrix lindblad_rhs(const Matrix& h, const std::vector<Matrix>& ops, const Matrix& couplings, const Matrix& rho);

/// -sum_ab h_ab Q^a rho Q^b over a full basis.
Matrix raw_rhs(const std::vector<Matrix>& basis, const Matrix& h_full, const Matrix& rho);

/// The fermion model exactly as displayed:
/// -i[H, rho] - 2g (b^+ rho b^+ + b rho b - b^+ b rho - rho b^+ b + 2 b^+ b rho b^+ b)
Matrix liu_displayed_rhs(double g, const Matrix& rho);

/// -i[H, rho] + sum_i lambda_i [Q_i, [rho, Q_i]]
Matrix double_commutator_rhs(const Matrix& h, const std::vector<Matrix>& projectors, const std::vector<double>& rates,
                             const Matrix& rho);

/// Spatial form: -i[H, rho] - 1/2 sum_xy k(x - y) ({Q(y) Q(x), rho} - 2 Q(x) rho Q(y)).
Matrix lattice_rhs(const Matrix& h, const std::vector<Matrix>& site_ops, const std::vector<double>& kernel,
                   const Matrix& rho);

/// Index-loop partial trace for qubit-or-qudit registers.
Matrix partial_trace(const Matrix& rho, const std::vector<int>& dims, const std::vector<int>& keep);

/// exp(m) by Taylor series with scaling and squaring.
Matrix expm(const Matrix& m);

/// 2x2 hermitian entropy from the closed-form eigenvalues.
double entropy_2x2(const Matrix& rho);

/// -sum p log p
double shannon(const std::vector<double>& p);

/// Sum of singular values.
double trace_norm(const Matrix& m);

/// Exact dephasing solution of drho/dt = -i[w/2 Z, rho] - gamma/2 [Z, [Z, rho]] for a qubit.
Matrix dephasing_solution(const Matrix& rho0, double omega, double gamma, double t);

/// |Phi><Phi| - 1/d (x) rho_B for a maximally entangled k-qubit pair, where rho_B
/// shares the spectrum of the reference: 2 (1 - 4^{-k}).
double maximal_decoupling_distance(int k);

/// Embeds a single-qubit operator at `site` of an L-qubit chain (site 0 is the
/// most significant factor).
Matrix embed(const Matrix& op, int site, int sites);

}  // namespace oracle
