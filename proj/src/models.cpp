#include "infoloss/models.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "infoloss/parallel.hpp"

namespace infoloss::models {

namespace {

const Complex kI(0.0, 1.0);

Matrix pauli(char which) {
  Matrix p = Matrix::Zero(2, 2);
  switch (which) {
    case 'x': p(0, 1) = 1.0; p(1, 0) = 1.0; break;
    case 'y': p(0, 1) = -kI; p(1, 0) = kI; break;
    default: p(0, 0) = 1.0; p(1, 1) = -1.0; break;
  }
  return p;
}

Complex expect(const Matrix& op, const Matrix& rho) { return (op.transpose().cwiseProduct(rho)).sum(); }

void check_local(const Matrix& op, const char* what) {
  if (op.rows() != 2 || op.cols() != 2) throw ShapeError(std::string("lattice: ") + what + " must be 2x2");
  if (qm::hermiticity_residual(op) > qm::kHermiticityTol) throw ValidationError(std::string("lattice: ") + what + " must be hermitian");
}

}  // namespace

FermionMode fermion_mode() {
  FermionMode f;
  f.b = Matrix::Zero(2, 2);
  f.b(0, 1) = 1.0;
  f.bdag = f.b.adjoint();
  f.number = f.bdag * f.b;
  return f;
}

LindbladGenerator liu_generator(double g) {
  if (!(g >= 0.0)) throw ValidationError("liu_generator: g must be >= 0");
  const FermionMode f = fermion_mode();
  std::vector<HermitianOperator> ops{HermitianOperator(f.bdag + f.b), HermitianOperator(kI * (f.bdag - f.b)),
                                     HermitianOperator(2.0 * f.number)};
  const double diag[] = {g, -g, -g};
  return LindbladGenerator(HermitianOperator(f.number), std::move(ops), lindblad::CouplingMatrix::diagonal(diag));
}

LiuScanResult liu_positivity_scan(double g, int n_states, double duration, SeededRng& rng, int steps, unsigned threads) {
  if (n_states < 1) throw ValidationError("liu_positivity_scan: need at least one state");
  if (!(duration > 0.0) || steps < 1) throw ValidationError("liu_positivity_scan: duration and steps must be positive");
  const LindbladGenerator gen = liu_generator(g);
  const lindblad::Superoperator step_map = lindblad::superscattering(gen, duration / steps);
  std::vector<Matrix> initial;
  initial.reserve(static_cast<std::size_t>(n_states));
  for (int i = 0; i < n_states; ++i)
    initial.push_back(i % 2 == 0 ? DensityMatrix::pure(qm::random_pure_state(2, rng)).matrix()
                                 : qm::random_density(2, 2, rng).matrix());

  struct Worst {
    double eig;
    double time;
  };
  std::vector<Worst> worst(static_cast<std::size_t>(n_states));
  parallel_for(
      static_cast<std::size_t>(n_states),
      [&](std::size_t i) {
        Vector v = lindblad::vectorize(initial[i]);
        Worst w{qm::min_eigenvalue(initial[i]), 0.0};
        for (int s = 1; s <= steps; ++s) {
          v = step_map.matrix() * v;
          const double e = qm::min_eigenvalue(qm::hermitian_part(lindblad::unvectorize(v, 2)));
          if (e < w.eig) w = {e, s * duration / steps};
        }
        worst[i] = w;
      },
      threads);

  LiuScanResult out;
  out.states = n_states;
  for (const auto& w : worst) {
    out.state_min.push_back(w.eig);
    out.state_time.push_back(w.time);
  }
  out.min_eigenvalue = worst[0].eig;
  out.time_of_min = worst[0].time;
  out.worst_state = 0;
  for (int i = 1; i < n_states; ++i)
    if (worst[static_cast<std::size_t>(i)].eig < out.min_eigenvalue) {
      out.min_eigenvalue = worst[static_cast<std::size_t>(i)].eig;
      out.time_of_min = worst[static_cast<std::size_t>(i)].time;
      out.worst_state = i;
    }
  out.positivity_preserved = out.min_eigenvalue >= -1e-8;
  return out;
}

HermitianOperator projector_above_threshold(const HermitianOperator& field, double alpha) {
  const qm::Eigensystem es = qm::eig_hermitian(field);
  Matrix q = Matrix::Zero(field.dim(), field.dim());
  for (Eigen::Index k = 0; k < es.values.size(); ++k) {
    const double e = es.values(k);
    if (std::abs(e - alpha) <= 1e-8)
      throw ValidationError("projector_above_threshold: threshold " + std::to_string(alpha) +
                            " is within 1e-8 of eigenvalue " + std::to_string(e) + "; perturb the threshold");
    if (e > alpha) q += es.vectors.col(k) * es.vectors.col(k).adjoint();
  }
  return HermitianOperator(q);
}

ProjectionModel::ProjectionModel(HermitianOperator hamiltonian, std::vector<ProjectionRegion> regions)
    : hamiltonian_(std::move(hamiltonian)), regions_(std::move(regions)) {
  for (const auto& r : regions_) {
    if (r.field.dim() != hamiltonian_.dim()) throw ShapeError("ProjectionModel: region field dimension differs from H");
    if (!(r.rate >= 0.0)) throw ValidationError("ProjectionModel: region rates must be >= 0");
    projectors_.push_back(projector_above_threshold(r.field, r.threshold));
  }
}

LindbladGenerator uw_generator(const ProjectionModel& model) {
  std::vector<double> couplings;
  for (const auto& r : model.regions()) couplings.push_back(2.0 * r.rate);
  return LindbladGenerator(model.hamiltonian(), model.projectors(), lindblad::CouplingMatrix::diagonal(couplings));
}

double decoherence_rate(const ProjectionModel& model, const DensityMatrix& rho) {
  if (rho.dim() != model.dim()) throw ShapeError("decoherence_rate: state dimension differs from model");
  const Matrix rhs = lindblad::apply_generator(uw_generator(model), rho);
  return 2.0 * (rho.matrix() * rhs).trace().real();
}

double decoherence_rate_closed_form(const ProjectionModel& model, const DensityMatrix& rho) {
  if (rho.dim() != model.dim()) throw ShapeError("decoherence_rate_closed_form: state dimension differs from model");
  const Matrix& r = rho.matrix();
  double total = 0.0;
  for (std::size_t i = 0; i < model.regions().size(); ++i) {
    const Matrix& q = model.projectors()[i].matrix();
    const Matrix qr = q * r;
    total += 4.0 * model.regions()[i].rate * ((qr * qr).trace().real() - (qr * r).trace().real());
  }
  return total;
}

double decoherence_rate_plus_form(const ProjectionModel& model, const DensityMatrix& rho) {
  if (rho.dim() != model.dim()) throw ShapeError("decoherence_rate_plus_form: state dimension differs from model");
  const Matrix& r = rho.matrix();
  double total = 0.0;
  for (std::size_t i = 0; i < model.regions().size(); ++i) {
    const Matrix& q = model.projectors()[i].matrix();
    const Matrix qr = q * r;
    total += 4.0 * model.regions()[i].rate * ((qr * qr).trace().real() + (qr * r).trace().real());
  }
  return total;
}

LabStateReport lab_state_report(const ProjectionModel& model, const PureState& lab_state) {
  if (lab_state.dim() != model.dim()) throw ShapeError("lab_state_report: state dimension differs from model");
  LabStateReport rep;
  for (std::size_t i = 0; i < model.regions().size(); ++i) {
    const double lam = model.regions()[i].rate;
    RegionEstimate est;
    est.overlap = (model.projectors()[i].matrix() * lab_state.amplitudes()).squaredNorm();
    est.exact = 4.0 * lam * (est.overlap * est.overlap - est.overlap);
    est.predicted = -4.0 * lam * est.overlap;
    rep.predicted_rate += est.predicted;
    rep.regions.push_back(est);
  }
  rep.exact_rate = decoherence_rate(model, DensityMatrix::pure(lab_state));
  const double diff = std::abs(rep.exact_rate - rep.predicted_rate);
  rep.relative_error = rep.exact_rate == 0.0 ? (diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity())
                                             : diff / std::abs(rep.exact_rate);
  return rep;
}

ProtectionResidual protection_residual(const ProjectionModel& model, const HermitianOperator& observable, double step) {
  if (observable.dim() != model.dim()) throw ShapeError("protection_residual: observable dimension differs from model");
  const Matrix& t = observable.matrix();
  for (const auto& q : model.projectors())
    if (qm::max_abs(qm::commutator(t, q.matrix())) > 1e-10)
      throw ValidationError("protection_residual: observable does not commute with every projector");
  const LindbladGenerator gen = uw_generator(model);
  const Matrix& h = model.hamiltonian().matrix();
  const Matrix unitary_rate = kI * qm::commutator(h, t);

  ProtectionResidual out;
  out.generator = qm::max_abs(lindblad::apply_adjoint(gen, t) - unitary_rate);

  const Matrix dual = lindblad::build_superoperator(gen).matrix().adjoint();
  const int d = model.dim();
  auto dual_flow = [&](double s) { return lindblad::unvectorize(Matrix((s * dual).exp()) * lindblad::vectorize(t), d); };
  auto unitary_flow = [&](double s) {
    const Matrix u = qm::unitary_exp(model.hamiltonian(), s);
    return Matrix(u.adjoint() * t * u);
  };
  const Matrix fd_dual = (dual_flow(step) - dual_flow(-step)) / (2.0 * step);
  const Matrix fd_unitary = (unitary_flow(step) - unitary_flow(-step)) / (2.0 * step);
  out.finite_difference = qm::max_abs(fd_dual - fd_unitary);
  return out;
}

void LatticeModel::validate() const {
  if (sites < 2 || sites > kMaxLatticeSites)
    throw ValidationError("lattice: sites must be in [2, " + std::to_string(kMaxLatticeSites) + "], got " +
                          std::to_string(sites));
  check_local(site_op, "site_op");
  check_local(field, "field");
  check_local(bond, "bond");
  if (static_cast<int>(kernel.size()) != sites)
    throw ShapeError("lattice: kernel table must have one entry per site offset");
  for (int r = 0; r < sites; ++r) {
    const double a = kernel[static_cast<std::size_t>(r)];
    const double b = kernel[static_cast<std::size_t>((sites - r) % sites)];
    if (std::abs(a - b) > 1e-12) throw ValidationError("lattice: kernel must satisfy h(r) = h(-r)");
  }
}

Matrix embed_site(const Matrix& op, int site, int sites) {
  if (site < 0 || site >= sites) throw ValidationError("embed_site: site out of range");
  const int local = static_cast<int>(op.rows());
  const int left = static_cast<int>(std::lround(std::pow(local, site)));
  const int right = static_cast<int>(std::lround(std::pow(local, sites - site - 1)));
  return qm::kron(qm::identity(left), qm::kron(op, qm::identity(right)));
}

Matrix lattice_hamiltonian(const LatticeModel& model) {
  model.validate();
  const int l = model.sites;
  const int dim = 1 << l;
  Matrix h = Matrix::Zero(dim, dim);
  for (int x = 0; x < l; ++x) h += embed_site(model.field, x, l);
  if (model.bond_coupling != 0.0)
    for (int x = 0; x + 1 < l; ++x) h += model.bond_coupling * embed_site(model.bond, x, l) * embed_site(model.bond, x + 1, l);
  return qm::hermitian_part(h);
}

LindbladGenerator lattice_generator(const LatticeModel& model) {
  model.validate();
  const int l = model.sites;
  std::vector<HermitianOperator> ops;
  for (int x = 0; x < l; ++x) ops.emplace_back(embed_site(model.site_op, x, l));
  Matrix h(l, l);
  for (int x = 0; x < l; ++x)
    for (int y = 0; y < l; ++y) h(x, y) = model.kernel[static_cast<std::size_t>(((x - y) % l + l) % l)];
  return LindbladGenerator(HermitianOperator(lattice_hamiltonian(model)), std::move(ops), lindblad::CouplingMatrix(h));
}

DensityMatrix product_state(const std::vector<Vector>& site_states) {
  if (site_states.empty()) throw ValidationError("product_state: no sites");
  Vector psi = site_states[0].normalized();
  for (std::size_t i = 1; i < site_states.size(); ++i) {
    const Vector s = site_states[i].normalized();
    Vector next(psi.size() * s.size());
    for (Eigen::Index a = 0; a < psi.size(); ++a) next.segment(a * s.size(), s.size()) = psi(a) * s;
    psi = std::move(next);
  }
  return DensityMatrix::pure(PureState::normalized(psi));
}

Complex connected_correlator(const Matrix& rho, const Matrix& a, int a_site, const Matrix& b, int b_site, int sites) {
  const Matrix ax = embed_site(a, a_site, sites);
  const Matrix by = embed_site(b, b_site, sites);
  return expect(ax * by, rho) - expect(ax, rho) * expect(by, rho);
}

CorrelationRate correlation_growth(const LatticeModel& model, const DensityMatrix& rho0, const Matrix& a, int a_site,
                                   const Matrix& b, int b_site) {
  if (a_site == b_site) throw ValidationError("correlation_growth: sites must differ");
  const int l = model.sites;
  const LindbladGenerator gen = lattice_generator(model);
  const Matrix& rho = rho0.matrix();
  const Matrix ax = embed_site(a, a_site, l);
  const Matrix by = embed_site(b, b_site, l);
  const Matrix& h = gen.hamiltonian().matrix();

  auto connected_rate = [&](const Matrix& drho) {
    return expect(ax * by, drho) - expect(ax, drho) * expect(by, rho) - expect(ax, rho) * expect(by, drho);
  };
  const Matrix full = lindblad::apply_generator(gen, rho);
  const Matrix unitary = -kI * qm::commutator(h, rho);

  CorrelationRate out;
  out.exact = connected_rate(full);
  out.unitary_part = connected_rate(unitary);
  out.dissipative_part = connected_rate(full - unitary);

  const Matrix q = model.site_op;
  const Complex ca = expect(embed_site(qm::commutator(a, q), a_site, l), rho);
  const Complex cb = expect(embed_site(qm::commutator(b, q), b_site, l), rho);
  const double kernel = model.kernel[static_cast<std::size_t>(((b_site - a_site) % l + l) % l)];
  out.estimate = -kernel * ca * cb;

  const Matrix paulis[] = {pauli('x'), pauli('y'), pauli('z')};
  const int dims_arr[kMaxLatticeSites] = {2, 2, 2, 2, 2, 2, 2, 2};
  const std::span<const int> dims(dims_arr, static_cast<std::size_t>(l));
  for (int x = 0; x < l; ++x)
    for (int y = x + 1; y < l; ++y) {
      const int keep[] = {x, y};
      const Matrix pair = qm::partial_trace(rho, dims, keep);
      for (const auto& p : paulis)
        for (const auto& r : paulis) {
          const Complex joint = expect(qm::kron(p, r), pair);
          const Complex sx = expect(qm::kron(p, qm::identity(2)), pair);
          const Complex sy = expect(qm::kron(qm::identity(2), r), pair);
          out.clustering_residual = std::max(out.clustering_residual, std::abs(joint - sx * sy));
        }
    }
  return out;
}

CorrelationSeries track_correlations(const LatticeModel& model, const DensityMatrix& rho0, const Matrix& a,
                                     const Matrix& b, const std::vector<std::pair<int, int>>& pairs, double duration,
                                     int steps) {
  const int l = model.sites;
  const LindbladGenerator gen = lattice_generator(model);
  if (rho0.dim() != gen.dim()) throw ShapeError("track_correlations: state dimension differs from lattice");
  struct Probe {
    Matrix joint, left, right;
  };
  std::vector<Probe> probes;
  for (const auto& [x, y] : pairs) {
    const Matrix ax = embed_site(a, x, l), by = embed_site(b, y, l);
    probes.push_back({ax * by, ax, by});
  }
  CorrelationSeries series;
  auto record = [&](double t, const Matrix& rho) {
    std::vector<Complex> row;
    for (const auto& p : probes) row.push_back(expect(p.joint, rho) - expect(p.left, rho) * expect(p.right, rho));
    series.times.push_back(t);
    series.values.push_back(std::move(row));
  };

  bool unitary = true;
  for (double k : model.kernel) unitary = unitary && k == 0.0;
  if (unitary) {
    if (steps < 1 || !(duration > 0.0)) throw ValidationError("track_correlations: duration and steps must be positive");
    const double dt = duration / steps;
    const Matrix u = qm::unitary_exp(gen.hamiltonian(), dt);
    Matrix rho = rho0.matrix();
    record(0.0, rho);
    for (int s = 1; s <= steps; ++s) {
      rho = u * rho * u.adjoint();
      record(s * dt, rho);
    }
    return series;
  }
  lindblad::EvolveOptions opts;
  opts.store_states = false;
  opts.on_record = record;
  lindblad::evolve(gen, rho0, duration, steps, lindblad::Method::rk4, opts);
  return series;
}

double EnvelopeFit::bound(double distance) const { return amplitude * std::exp(-decay * distance); }

EnvelopeFit fit_envelope(const std::vector<double>& distances, const std::vector<double>& magnitudes) {
  if (distances.size() != magnitudes.size()) throw ShapeError("fit_envelope: distances and magnitudes differ in length");
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < distances.size(); ++i)
    if (magnitudes[i] > 0.0) {
      xs.push_back(distances[i]);
      ys.push_back(std::log(magnitudes[i]));
    }
  if (xs.size() < 2) throw ValidationError("fit_envelope: need at least two nonzero correlations");
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = xs[static_cast<std::size_t>(i)];
    rhs(i) = ys[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
  const Eigen::VectorXd resid = rhs - design * coef;
  EnvelopeFit fit;
  fit.points = static_cast<int>(n);
  fit.residual = std::sqrt(resid.squaredNorm() / static_cast<double>(n));
  fit.lift = std::max(0.0, resid.maxCoeff());
  fit.amplitude = std::exp(coef(0) + fit.lift);
  fit.decay = -coef(1);
  return fit;
}

Matrix contrast_probe() { return pauli('z'); }
Matrix contrast_site_op() { return pauli('x'); }

DensityMatrix contrast_initial_state(int sites) {
  // Bloch vector leaning toward +y so that <[sigma_z, sigma_x]> is large.
  const double theta = 1.2, phi = 1.3;
  Vector site(2);
  site << std::cos(theta / 2.0), std::exp(kI * phi) * std::sin(theta / 2.0);
  return product_state(std::vector<Vector>(static_cast<std::size_t>(sites), site));
}

LatticeModel contrast_model(const ContrastSettings& settings, const std::vector<double>& kernel) {
  LatticeModel m;
  m.sites = settings.sites;
  m.site_op = contrast_site_op();
  m.field = 0.5 * pauli('z') + 0.2 * pauli('x');
  m.bond = pauli('x');
  m.bond_coupling = settings.bond_coupling;
  m.kernel = kernel;
  m.validate();
  return m;
}

ContrastReport lattice_contrast(const ContrastSettings& settings) {
  const int l = settings.sites;
  if (l < 3) throw ValidationError("lattice_contrast: need at least three sites");
  const DensityMatrix rho0 = contrast_initial_state(l);
  const Matrix probe = contrast_probe();
  ContrastReport rep;

  // Unitary run: all pairs (0, d) so the envelope can be fitted on d < L-1.
  std::vector<std::pair<int, int>> pairs;
  for (int d = 1; d < l; ++d) pairs.emplace_back(0, d);
  const LatticeModel unitary = contrast_model(settings, std::vector<double>(static_cast<std::size_t>(l), 0.0));
  const CorrelationSeries all = track_correlations(unitary, rho0, probe, probe, pairs, settings.duration, settings.steps);
  std::vector<double> dist, peak;
  for (int d = 1; d + 1 < l; ++d) {
    double m = 0.0;
    for (const auto& row : all.values) m = std::max(m, std::abs(row[static_cast<std::size_t>(d - 1)]));
    dist.push_back(d);
    peak.push_back(m);
  }
  rep.envelope = fit_envelope(dist, peak);
  rep.bound = rep.envelope.bound(l - 1);

  auto finish = [&](std::string name, CorrelationSeries series) {
    ContrastRun run;
    run.name = std::move(name);
    for (std::size_t k = 0; k < series.times.size(); ++k) {
      const double c = std::abs(series.values[k][0]);
      run.max_correlation = std::max(run.max_correlation, c);
      if (!run.first_exceed_time && c > rep.bound) run.first_exceed_time = series.times[k];
    }
    run.series = std::move(series);
    rep.runs.push_back(std::move(run));
  };

  CorrelationSeries far;
  far.times = all.times;
  for (const auto& row : all.values) far.values.push_back({row.back()});
  finish("unitary", std::move(far));

  const std::vector<std::pair<int, int>> end_pair{{0, l - 1}};
  std::vector<double> onsite(static_cast<std::size_t>(l), 0.0);
  onsite[0] = settings.onsite_rate;
  finish("onsite", track_correlations(contrast_model(settings, onsite), rho0, probe, probe, end_pair,
                                      settings.duration, settings.steps));

  const std::vector<double> constant(static_cast<std::size_t>(l), settings.collective_rate);
  const LatticeModel collective = contrast_model(settings, constant);
  rep.collective_rate = correlation_growth(collective, rho0, probe, 0, probe, l - 1);
  finish("collective", track_correlations(collective, rho0, probe, probe, end_pair, settings.duration, settings.steps));
  return rep;
}

}  // namespace infoloss::models
