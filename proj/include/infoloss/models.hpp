#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "infoloss/lindblad.hpp"
#include "infoloss/qm_core.hpp"

namespace infoloss::models {

using lindblad::LindbladGenerator;
using qm::DensityMatrix;
using qm::HermitianOperator;
using qm::PureState;

// ---------------------------------------------------------------- fermion model

/// Single fermionic mode on (|0>, |1>): b = [[0,1],[0,0]], number operator b^dagger b.
struct FermionMode {
  Matrix b;
  Matrix bdag;
  Matrix number;
};
FermionMode fermion_mode();

/// H = b^dagger b, jump operators b^dagger + b, i(b^dagger - b), 2 b^dagger b
/// with couplings diag(g, -g, -g). Requires g >= 0.
LindbladGenerator liu_generator(double g);

struct LiuScanResult {
  double min_eigenvalue = 0.0;
  double time_of_min = 0.0;
  int worst_state = -1;
  int states = 0;
  bool positivity_preserved = true;
  /// Per initial state: lowest eigenvalue seen and when.
  std::vector<double> state_min;
  std::vector<double> state_time;
};

/// Evolves n random states (every other one pure) to time T with the exact
/// propagator, sampling `steps` equal intervals, and returns the global
/// minimum eigenvalue. Positivity counts as preserved when it stays >= -1e-8.
LiuScanResult liu_positivity_scan(double g, int n_states, double duration, SeededRng& rng, int steps = 500,
                                  unsigned threads = 0);

// ---------------------------------------------------------- projection model

struct ProjectionRegion {
  HermitianOperator field;  // local observable whose spectrum is thresholded
  double threshold = 0.0;
  double rate = 0.0;        // >= 0
};

class ProjectionModel {
 public:
  ProjectionModel(HermitianOperator hamiltonian, std::vector<ProjectionRegion> regions);

  int dim() const { return hamiltonian_.dim(); }
  const HermitianOperator& hamiltonian() const { return hamiltonian_; }
  const std::vector<ProjectionRegion>& regions() const { return regions_; }
  const std::vector<HermitianOperator>& projectors() const { return projectors_; }

 private:
  HermitianOperator hamiltonian_;
  std::vector<ProjectionRegion> regions_;
  std::vector<HermitianOperator> projectors_;
};

/// Spectral projector onto eigenvectors of `field` with eigenvalue > alpha.
/// An eigenvalue within 1e-8 of alpha is rejected (ValidationError).
HermitianOperator projector_above_threshold(const HermitianOperator& field, double alpha);

/// drho/dt = -i[H, rho] + sum_i rate_i [Q_i, [rho, Q_i]], i.e. jump operators Q_i
/// with diagonal couplings 2 rate_i.
LindbladGenerator uw_generator(const ProjectionModel& model);

/// d/dt tr(rho^2) = 2 tr(rho L(rho)).
double decoherence_rate(const ProjectionModel& model, const DensityMatrix& rho);

/// Per-region closed form 4 rate (tr(Q rho Q rho) - tr(Q rho^2)).
double decoherence_rate_closed_form(const ProjectionModel& model, const DensityMatrix& rho);

/// The same sum with a plus sign between the two traces, as it is often quoted.
/// Kept for comparison only; it disagrees with decoherence_rate.
double decoherence_rate_plus_form(const ProjectionModel& model, const DensityMatrix& rho);

struct RegionEstimate {
  double overlap = 0.0;    // |Q|0>|^2
  double exact = 0.0;      // 4 rate (overlap^2 - overlap)
  double predicted = 0.0;  // -4 rate overlap
};

struct LabStateReport {
  std::vector<RegionEstimate> regions;
  double exact_rate = 0.0;
  double predicted_rate = 0.0;
  /// |exact - predicted| / |exact|, 0 when both vanish.
  double relative_error = 0.0;
};

LabStateReport lab_state_report(const ProjectionModel& model, const PureState& lab_state);

struct ProtectionResidual {
  /// max |L^dagger(T) - i[H, T]|
  double generator = 0.0;
  /// Same comparison on central differences of the two Heisenberg flows.
  double finite_difference = 0.0;
};

/// For an observable commuting with every projector. Throws ValidationError if
/// [T, Q_i] exceeds 1e-10.
ProtectionResidual protection_residual(const ProjectionModel& model, const HermitianOperator& observable,
                                       double step = 1e-5);

// -------------------------------------------------------------- lattice model

inline constexpr int kMaxLatticeSites = 8;

/// Qubit chain: H = sum_x field(x) + coupling sum_x bond(x) bond(x+1) (open
/// chain); jump operators site_op embedded at each site; couplings
/// h_xy = kernel[(x - y) mod L].
struct LatticeModel {
  int sites = 0;
  Matrix site_op;
  Matrix field;
  Matrix bond;
  double bond_coupling = 0.0;
  std::vector<double> kernel;

  /// Throws ValidationError on out-of-range size, non-hermitian local
  /// operators or an asymmetric kernel.
  void validate() const;
};

Matrix embed_site(const Matrix& op, int site, int sites);
Matrix lattice_hamiltonian(const LatticeModel& model);
LindbladGenerator lattice_generator(const LatticeModel& model);

/// Product state over the chain from per-site pure states.
DensityMatrix product_state(const std::vector<Vector>& site_states);

/// tr(A_x B_y rho) - tr(A_x rho) tr(B_y rho)
Complex connected_correlator(const Matrix& rho, const Matrix& a, int a_site, const Matrix& b, int b_site, int sites);

struct CorrelationRate {
  Complex exact;         // d/dt of the connected correlator at t = 0
  Complex unitary_part;  // the -i[H, .] contribution
  Complex dissipative_part;
  Complex estimate;      // factorized K(A, B)
  /// Largest connected two-site correlation of rho0 among Pauli pairs; the
  /// factorized estimate is exact when it vanishes.
  double clustering_residual = 0.0;
};

CorrelationRate correlation_growth(const LatticeModel& model, const DensityMatrix& rho0, const Matrix& a, int a_site,
                                   const Matrix& b, int b_site);

struct CorrelationSeries {
  std::vector<double> times;
  /// values[k][p]: connected correlator of pair p at times[k].
  std::vector<std::vector<Complex>> values;
};

/// Evolves rho0 to T in `steps` steps (exact unitary propagator when the
/// kernel vanishes, RK4 otherwise) and tracks the given site pairs.
CorrelationSeries track_correlations(const LatticeModel& model, const DensityMatrix& rho0, const Matrix& a,
                                     const Matrix& b, const std::vector<std::pair<int, int>>& pairs, double duration,
                                     int steps);

/// |C(d)| <= amplitude exp(-decay d), fitted by least squares on log|C| and
/// then lifted so every input point lies on or below it.
struct EnvelopeFit {
  double amplitude = 0.0;
  double decay = 0.0;
  /// RMS residual of the log-linear least-squares fit.
  double residual = 0.0;
  /// Amount (in log units) the intercept was raised.
  double lift = 0.0;
  int points = 0;

  double bound(double distance) const;
};

EnvelopeFit fit_envelope(const std::vector<double>& distances, const std::vector<double>& magnitudes);

struct ContrastSettings {
  int sites = 6;
  double duration = 1.0;
  int steps = 500;
  double onsite_rate = 0.2;
  double collective_rate = 0.2;
  double bond_coupling = 0.5;
};

struct ContrastRun {
  std::string name;
  CorrelationSeries series;  // pair (0, L-1) only
  double max_correlation = 0.0;
  std::optional<double> first_exceed_time;
};

struct ContrastReport {
  EnvelopeFit envelope;
  double bound = 0.0;  // envelope at distance L-1
  CorrelationRate collective_rate;
  std::vector<ContrastRun> runs;  // unitary, onsite, collective
};

/// The three-run lattice experiment: the envelope is fitted on the unitary
/// run's peak correlations at distances 1..L-2 and applied at distance L-1.
ContrastReport lattice_contrast(const ContrastSettings& settings);

/// Shared ingredients of the experiment, exposed for tests.
LatticeModel contrast_model(const ContrastSettings& settings, const std::vector<double>& kernel);
DensityMatrix contrast_initial_state(int sites);
Matrix contrast_probe();
Matrix contrast_site_op();

}  // namespace infoloss::models
