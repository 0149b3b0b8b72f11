#pragma once

#include <cstdint>
#include <vector>

#include "infoloss/lindblad.hpp"
#include "infoloss/qm_core.hpp"

namespace infoloss::stochastic {

using RealMatrix = Eigen::MatrixXd;
using lindblad::CouplingMatrix;
using qm::DensityMatrix;
using qm::HermitianOperator;

/// H(t) = H0 + sum_a j_a(t) Q^a with <j_a(t) j_b(t')> = h_ab delta(t - t').
/// The covariance must be real symmetric PSD.
class NoiseSpec {
 public:
  NoiseSpec(HermitianOperator h0, std::vector<HermitianOperator> sources, CouplingMatrix covariance, double dt,
            double duration);

  const HermitianOperator& h0() const { return h0_; }
  const std::vector<HermitianOperator>& sources() const { return sources_; }
  const CouplingMatrix& covariance() const { return covariance_; }
  double dt() const { return dt_; }
  double duration() const { return duration_; }
  int steps() const { return steps_; }
  int dim() const { return h0_.dim(); }
  /// F with h = F F^T (columns for eigenvalues clipped at zero dropped).
  const RealMatrix& factor() const { return factor_; }

  /// Same spec with another step size.
  NoiseSpec with_dt(double dt) const;

 private:
  HermitianOperator h0_;
  std::vector<HermitianOperator> sources_;
  CouplingMatrix covariance_;
  double dt_;
  double duration_;
  int steps_;
  RealMatrix factor_;
};

/// steps x sources table of source values; each row is Gaussian with mean 0
/// and covariance h / dt.
RealMatrix sample_noise(const NoiseSpec& spec, SeededRng& rng);

/// Unitary evolution under a given noise table (rows as from sample_noise).
DensityMatrix evolve_with_noise(const NoiseSpec& spec, const DensityMatrix& rho0, const RealMatrix& noise);

/// One trajectory: per step rho <- U rho U^dagger with U = exp(-i dt H_step).
/// Draws the same stream as sample_noise.
DensityMatrix evolve_trajectory(const NoiseSpec& spec, const DensityMatrix& rho0, SeededRng& rng);

struct EnsembleResult {
  DensityMatrix mean_state;
  long n = 0;
  /// Standard error of the mean for the real and imaginary part of each entry.
  RealMatrix stderr_re;
  RealMatrix stderr_im;
};

/// Trajectory i uses SeededRng::substream(master_seed, i). Partial sums over
/// fixed blocks of trajectories are merged pairwise, so the result does not
/// depend on `threads` (0 = hardware concurrency).
EnsembleResult ensemble_average(const NoiseSpec& spec, const DensityMatrix& rho0, long n, std::uint64_t master_seed,
                                unsigned threads = 0);

/// drho/dt = -i[H0, rho] - 1/2 sum_ab h_ab [Q^a, [Q^b, rho]] written as a
/// generator with couplings h.
lindblad::LindbladGenerator matched_generator(const NoiseSpec& spec);

/// Reference state exp(T L) rho0 (dense exponential up to the superoperator
/// limit, fine RK4 beyond).
Matrix reference_state(const lindblad::LindbladGenerator& gen, const DensityMatrix& rho0, double duration);

struct ComparisonReport {
  EnsembleResult ensemble;
  Matrix reference;
  double max_dev = 0.0;
  /// max over re/im of |mean - reference| / stderr, per entry.
  RealMatrix z;
  double z_max = 0.0;
};

ComparisonReport compare_to_lindblad(const NoiseSpec& spec, const DensityMatrix& rho0, long n,
                                     std::uint64_t master_seed, unsigned threads = 0);
/// Same statistics against an arbitrary generator (negative controls).
ComparisonReport compare_to_generator(const NoiseSpec& spec, const lindblad::LindbladGenerator& gen,
                                      const DensityMatrix& rho0, long n, std::uint64_t master_seed,
                                      unsigned threads = 0);

/// Nodes and weights for E f(z), z ~ N(0, 1) (Golub-Welsch).
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature gauss_hermite(int points);

/// E[U . U^dagger] over one step's noise as a superoperator, by tensor Gauss-
/// Hermite quadrature over the independent noise directions.
lindblad::Superoperator averaged_step_channel(const NoiseSpec& spec, int points = 10);

/// Mean state after `steps` steps: the averaged channel applied repeatedly.
/// Deterministic; separates the time-step bias from Monte Carlo noise.
Matrix averaged_evolution(const NoiseSpec& spec, const DensityMatrix& rho0, int points = 10);

}  // namespace infoloss::stochastic
