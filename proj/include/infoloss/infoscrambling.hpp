#pragma once

#include <cstdint>
#include <vector>

#include "infoloss/qm_core.hpp"

namespace infoloss::scrambling {

// ---------------------------------------------------------------- Page curve

inline constexpr int kMaxPhaseSpins = 16;

/// N spins with amplitudes 2^{-N/2} exp(i theta), theta uniform on [0, 2 pi).
class RandomPhaseState {
 public:
  RandomPhaseState(int spins, SeededRng& rng);

  int spins() const { return spins_; }
  const Vector& amplitudes() const { return amps_; }

 private:
  int spins_;
  Vector amps_;
};

/// Entropy (natural log) of the first k spins.
double subsystem_entropy(const RandomPhaseState& state, int k);

struct ScanRow {
  int index = 0;  // k for the Page scan, m for release scans
  double mean = 0.0;
  double std_error = 0.0;
  double max = 0.0;
};

/// S(k) for k = 0..N over `seeds` states drawn from substreams of master_seed.
std::vector<ScanRow> page_scan(int spins, int seeds, std::uint64_t master_seed, unsigned threads = 0);

// ------------------------------------------------------------ release scans

inline constexpr int kMaxRegisterQubits = 12;

/// Reference R (k qubits) maximally entangled with the first k of n black-hole
/// qubits, the others in |0>; a Haar unitary scrambles the n qubits and the
/// first m are released. Requires 1 <= n, 0 <= k <= n, n + k <= 12.
struct HPExperiment {
  int n = 8;
  int k = 1;
  int trials = 200;
  std::uint64_t seed = 1;

  void validate() const;
};

/// rows[m] for m = 0..n: statistics of delta(m) = |rho_RB - rho_R x rho_B|_1
/// with B the unreleased remainder.
struct DecouplingResult {
  std::vector<ScanRow> rows;
};

/// delta(m) for m = 0..n on a single scrambled state. The scrambler's action
/// on the 2^k occupied inputs is a Haar isometry, drawn directly.
std::vector<double> hp_trial(int n, int k, SeededRng& rng);

DecouplingResult hp_run(const HPExperiment& exp, unsigned threads = 0);

/// |A A^dagger - B B^dagger|_1 through a thin QR of [A B] when the factors are
/// narrower than the space, by direct diagonalization otherwise.
double factored_trace_norm(const Matrix& a, const Matrix& b);

/// log mean delta = intercept + slope * x with x = 2m - n - k, fitted over
/// x >= 0 at n = 4, 5 and k = 1, 2 (m < n). tau = exp(intercept + slope c).
struct ThresholdCalibration {
  double intercept = 0.0;
  double slope = 0.0;
  double safety = 3.0;
  double tau = 0.0;
  int points = 0;
};

ThresholdCalibration calibrate_threshold(double safety, int trials, std::uint64_t seed, unsigned threads = 0);

struct ThresholdScan {
  DecouplingResult result;
  double tau = 0.0;
  /// Smallest m with mean delta(m) <= tau.
  int threshold = 0;
};

ThresholdScan hp_threshold_scan(const HPExperiment& exp, double tau, unsigned threads = 0);

}  // namespace infoloss::scrambling
