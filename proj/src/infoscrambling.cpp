#include "infoloss/infoscrambling.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "infoloss/parallel.hpp"

namespace infoloss::scrambling {

namespace {

ScanRow summarize(int index, const std::vector<double>& xs) {
  ScanRow row;
  row.index = index;
  const double n = static_cast<double>(xs.size());
  double sum = 0.0;
  row.max = xs.empty() ? 0.0 : xs[0];
  for (double x : xs) {
    sum += x;
    row.max = std::max(row.max, x);
  }
  row.mean = sum / n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - row.mean) * (x - row.mean);
    row.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return row;
}

// Compact factor F of G G^dagger (F F^dagger = G G^dagger) with at most
// rank-many columns, from whichever Gram matrix is smaller.
Matrix compact_factor(const Matrix& g) {
  const bool wide = g.cols() >= g.rows();
  const Matrix gram = wide ? Matrix(g * g.adjoint()) : Matrix(g.adjoint() * g);
  const qm::Eigensystem es = qm::eig_hermitian(qm::hermitian_part(gram));
  std::vector<Eigen::Index> kept;
  for (Eigen::Index i = 0; i < es.values.size(); ++i)
    if (es.values(i) > 1e-14) kept.push_back(i);
  Matrix f(g.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    const auto col = static_cast<Eigen::Index>(c);
    if (wide)
      f.col(col) = std::sqrt(es.values(kept[c])) * es.vectors.col(kept[c]);
    else
      f.col(col) = g * es.vectors.col(kept[c]);
  }
  return f;
}

// Haar-distributed isometry: first `cols` columns of a Haar unitary.
Matrix haar_isometry(int rows, int cols, SeededRng& rng) {
  Matrix z(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) z(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix r = qr.matrixQR().topLeftCorner(cols, cols);
  for (int j = 0; j < cols; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

}  // namespace

RandomPhaseState::RandomPhaseState(int spins, SeededRng& rng) : spins_(spins) {
  if (spins < 2 || spins > kMaxPhaseSpins)
    throw ValidationError("random_phase_state: N must be in [2, " + std::to_string(kMaxPhaseSpins) + "], got " +
                          std::to_string(spins));
  const Eigen::Index dim = Eigen::Index{1} << spins;
  const double mod = std::pow(2.0, -0.5 * spins);
  amps_.resize(dim);
  for (Eigen::Index i = 0; i < dim; ++i) amps_(i) = std::polar(mod, 2.0 * std::numbers::pi * rng.uniform());
}

double subsystem_entropy(const RandomPhaseState& state, int k) {
  const int n = state.spins();
  if (k < 0 || k > n) throw ValidationError("subsystem_entropy: k must be in [0, N]");
  if (k == 0 || k == n) return 0.0;
  // The reduced spectra of complementary parts agree; diagonalize the smaller Gram matrix.
  const std::vector<int> dims(static_cast<std::size_t>(n), 2);
  std::vector<int> keep(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) keep[static_cast<std::size_t>(i)] = i;
  const Matrix m = qm::bipartition(state.amplitudes(), dims, keep);
  const Matrix gram = m.rows() <= m.cols() ? Matrix(m * m.adjoint()) : Matrix(m.adjoint() * m);
  return qm::entropy_of_spectrum(qm::eigenvalues_hermitian(qm::hermitian_part(gram)));
}

std::vector<ScanRow> page_scan(int spins, int seeds, std::uint64_t master_seed, unsigned threads) {
  if (seeds < 1) throw ValidationError("page_scan: need at least one seed");
  if (spins > 14) throw ValidationError("page_scan: N must be <= 14 for the full scan");
  std::vector<std::vector<double>> per_seed(static_cast<std::size_t>(seeds));
  parallel_for(
      static_cast<std::size_t>(seeds),
      [&](std::size_t s) {
        SeededRng rng = SeededRng::substream(master_seed, s);
        const RandomPhaseState state(spins, rng);
        for (int k = 0; k <= spins; ++k) per_seed[s].push_back(subsystem_entropy(state, k));
      },
      threads);
  std::vector<ScanRow> rows;
  for (int k = 0; k <= spins; ++k) {
    std::vector<double> xs;
    for (const auto& v : per_seed) xs.push_back(v[static_cast<std::size_t>(k)]);
    rows.push_back(summarize(k, xs));
  }
  return rows;
}

void HPExperiment::validate() const {
  if (n < 1) throw ValidationError("hp: n must be >= 1");
  if (k < 0 || k > n) throw ValidationError("hp: k must be in [0, n]");
  if (n + k > kMaxRegisterQubits)
    throw ValidationError("hp: register of n + k = " + std::to_string(n + k) + " qubits exceeds " +
                          std::to_string(kMaxRegisterQubits));
  if (trials < 1) throw ValidationError("hp: trials must be >= 1");
}

double factored_trace_norm(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw ShapeError("factored_trace_norm: factors must have the same row count");
  const Eigen::Index dim = a.rows();
  const Eigen::Index r = a.cols() + b.cols();
  if (r >= dim) return qm::trace_norm_hermitian(qm::hermitian_part(a * a.adjoint() - b * b.adjoint()));
  Matrix stacked(dim, r);
  stacked << a, b;
  Eigen::HouseholderQR<Matrix> qr(stacked);
  const Matrix upper = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
  RealVector signs(r);
  signs.head(a.cols()).setOnes();
  signs.tail(b.cols()).setConstant(-1.0);
  const Matrix core = upper * signs.asDiagonal() * upper.adjoint();
  return qm::trace_norm_hermitian(qm::hermitian_part(core));
}

std::vector<double> hp_trial(int n, int k, SeededRng& rng) {
  HPExperiment{n, k, 1, 0}.validate();
  const int bh = 1 << n;
  const int ref = 1 << k;
  // Message qubit j of the black hole starts as basis state j * 2^{n-k}; the
  // scrambler maps those 2^k inputs to the columns of a Haar isometry.
  const Matrix w = haar_isometry(bh, ref, rng);
  // coeff(r, x): amplitude of |r>_R |x>_BH
  const Matrix coeff = w.transpose() / std::sqrt(static_cast<double>(ref));

  std::vector<double> out(static_cast<std::size_t>(n + 1), 0.0);
  for (int m = 0; m < n; ++m) {
    const int released = 1 << m;
    const int rest = bh / released;
    const int joint = ref * rest;
    Matrix x(joint, released);
    Matrix g(rest, ref * released);
    for (int e = 0; e < released; ++e) {
      const auto block = coeff.middleCols(static_cast<Eigen::Index>(e) * rest, rest);
      for (int r = 0; r < ref; ++r) {
        x.col(e).segment(static_cast<Eigen::Index>(r) * rest, rest) = block.row(r).transpose();
        g.col(r + ref * e) = block.row(r).transpose();
      }
    }
    if (k == 0) continue;  // rho_RB = rho_B
    // rho_R = coeff coeff^dagger, rho_B = g g^dagger
    out[static_cast<std::size_t>(m)] = factored_trace_norm(x, qm::kron(compact_factor(coeff), compact_factor(g)));
  }
  // m = n: the remainder is empty and rho_RB = rho_R.
  return out;
}

DecouplingResult hp_run(const HPExperiment& exp, unsigned threads) {
  exp.validate();
  std::vector<std::vector<double>> per_trial(static_cast<std::size_t>(exp.trials));
  parallel_for(
      static_cast<std::size_t>(exp.trials),
      [&](std::size_t t) {
        SeededRng rng = SeededRng::substream(exp.seed, t);
        per_trial[t] = hp_trial(exp.n, exp.k, rng);
      },
      threads);
  DecouplingResult res;
  for (int m = 0; m <= exp.n; ++m) {
    std::vector<double> xs;
    for (const auto& v : per_trial) xs.push_back(v[static_cast<std::size_t>(m)]);
    res.rows.push_back(summarize(m, xs));
  }
  return res;
}

ThresholdCalibration calibrate_threshold(double safety, int trials, std::uint64_t seed, unsigned threads) {
  std::vector<double> xs, ys;
  std::uint64_t stream = 0;
  for (int n : {4, 5})
    for (int k : {1, 2}) {
      const DecouplingResult res = hp_run(HPExperiment{n, k, trials, splitmix64(seed + stream++)}, threads);
      for (int m = 0; m < n; ++m) {
        const int x = 2 * m - n - k;
        const double mean = res.rows[static_cast<std::size_t>(m)].mean;
        if (x < 0 || !(mean > 0.0)) continue;
        xs.push_back(x);
        ys.push_back(std::log(mean));
      }
    }
  if (xs.size() < 2) throw NumericalError("calibrate_threshold: too few calibration points");
  const auto count = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd design(count, 2);
  Eigen::VectorXd rhs(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = xs[static_cast<std::size_t>(i)];
    rhs(i) = ys[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
  ThresholdCalibration cal;
  cal.intercept = coef(0);
  cal.slope = coef(1);
  cal.safety = safety;
  cal.tau = std::exp(cal.intercept + cal.slope * safety);
  cal.points = static_cast<int>(count);
  return cal;
}

ThresholdScan hp_threshold_scan(const HPExperiment& exp, double tau, unsigned threads) {
  if (!(tau > 0.0)) throw ValidationError("hp_threshold_scan: tau must be positive");
  ThresholdScan scan;
  scan.result = hp_run(exp, threads);
  scan.tau = tau;
  scan.threshold = exp.n;
  for (const auto& row : scan.result.rows)
    if (row.mean <= tau) {
      scan.threshold = row.index;
      break;
    }
  return scan;
}

}  // namespace infoloss::scrambling
