#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "infoloss/bh_thermo.hpp"
#include "infoloss/cli.hpp"
#include "infoloss/infoscrambling.hpp"
#include "infoloss/lindblad.hpp"
#include "infoloss/models.hpp"
#include "infoloss/stochastic.hpp"

namespace infoloss::cli {

namespace {

using qm::DensityMatrix;
using qm::HermitianOperator;

struct Output {
  std::ostringstream csv;
  json metrics = json::object();
};

// Non-finite values have no JSON encoding; they are written as strings.
json number(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

std::vector<HermitianOperator> hermitian_list(const std::vector<Matrix>& ms, const std::string& what) {
  std::vector<HermitianOperator> out;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    try {
      out.emplace_back(ms[i]);
    } catch (const ValidationError& e) {
      throw ValidationError(what + "[" + std::to_string(i) + "]: " + e.what());
    }
  }
  return out;
}

DensityMatrix initial_state(const Params& p) {
  const bool has_rho = p.has("rho0");
  const bool has_psi = p.has("psi0");
  if (has_rho == has_psi) throw ValidationError("exactly one of rho0 and psi0 is required");
  if (has_rho) return DensityMatrix(p.matrix("rho0"));
  return DensityMatrix::pure(qm::PureState(p.vector("psi0")));
}

int positive_int(const Params& p, const std::string& key, long fallback, long max) {
  const long v = p.integer(key, fallback);
  if (v < 1 || v > max) throw ValidationError(key + ": must lie in [1, " + std::to_string(max) + "]");
  return static_cast<int>(v);
}

int positive_int(const Params& p, const std::string& key, long max) {
  if (!p.has(key)) throw ValidationError(key + ": required");
  return positive_int(p, key, 0, max);
}

double positive_number(const Params& p, const std::string& key) {
  const double v = p.number(key);
  if (!(v > 0) || !std::isfinite(v)) throw ValidationError(key + ": must be positive and finite");
  return v;
}

void write_rows(Output& out, const std::vector<scrambling::ScanRow>& rows) {
  io::CsvWriter w(out.csv, {"k_or_m", "mean", "stderr", "max"});
  for (const auto& r : rows) w.row({static_cast<double>(r.index), r.mean, r.std_error, r.max});
}

// ------------------------------------------------------------------ kinds

void run_evolve(const Params& p, std::uint64_t, Output& out) {
  const HermitianOperator h(p.matrix("H"));
  std::vector<HermitianOperator> ops;
  if (p.has("jump_ops")) ops = hermitian_list(p.matrices("jump_ops"), "jump_ops");
  Matrix couplings = Matrix::Zero(static_cast<Eigen::Index>(ops.size()), static_cast<Eigen::Index>(ops.size()));
  if (p.has("couplings")) couplings = p.matrix("couplings");
  else if (!ops.empty()) throw ValidationError("couplings: required when jump_ops are given");
  const lindblad::LindbladGenerator gen = ops.empty() && couplings.size() == 0
                                              ? lindblad::LindbladGenerator(h)
                                              : lindblad::LindbladGenerator(h, ops, lindblad::CouplingMatrix(couplings));
  const DensityMatrix rho0 = initial_state(p);
  const double duration = positive_number(p, "T");
  const int steps = positive_int(p, "steps", 1'000'000);
  const std::string method_name = p.text("method", "exact");
  lindblad::Method method;
  if (method_name == "exact") method = lindblad::Method::exact_exponential;
  else if (method_name == "rk4") method = lindblad::Method::rk4;
  else throw ValidationError("method: expected 'exact' or 'rk4'");
  lindblad::EvolveOptions options;
  options.record_every = positive_int(p, "record_every", 1, steps);
  options.store_states = false;
  p.finish();

  const auto traj = lindblad::evolve(gen, rho0, duration, steps, method, options);
  io::CsvWriter w(out.csv, {"t", "trace_re", "trace_im", "purity", "entropy", "energy", "min_eig"});
  double lowest = 0.0;
  double worst_trace = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const auto& o = traj.observables[i];
    w.row({traj.times[i], o.trace.real(), o.trace.imag(), o.purity, o.entropy, o.energy, o.min_eig});
    lowest = i ? std::min(lowest, o.min_eig) : o.min_eig;
    worst_trace = std::max(worst_trace, std::abs(o.trace - 1.0));
  }
  const auto& first = traj.observables.front();
  const auto& last = traj.observables.back();

  json ops_json = json::array();
  for (const auto& q : gen.jump_ops()) ops_json.push_back(io::matrix_to_json(q.matrix()));
  out.metrics["generator"] = {{"dim", gen.dim()},
                              {"H", io::matrix_to_json(gen.hamiltonian().matrix())},
                              {"jump_ops", ops_json},
                              {"couplings", io::matrix_to_json(gen.couplings().matrix())}};
  out.metrics["couplings_psd"] = gen.couplings().is_psd();
  out.metrics["records"] = traj.times.size();
  out.metrics["max_trace_deviation"] = worst_trace;
  out.metrics["min_eigenvalue"] = number(lowest);
  out.metrics["initial_entropy"] = number(first.entropy);
  out.metrics["final_entropy"] = number(last.entropy);
  out.metrics["final_purity"] = last.purity;
  out.metrics["energy_drift"] = last.energy - first.energy;
}

void run_stochastic(const Params& p, std::uint64_t seed, Output& out) {
  const HermitianOperator h0(p.matrix("H0"));
  const auto sources = hermitian_list(p.matrices("sources"), "sources");
  const lindblad::CouplingMatrix covariance(p.matrix("covariance"));
  const double dt = positive_number(p, "dt");
  const double duration = positive_number(p, "T");
  const DensityMatrix rho0 = initial_state(p);
  const long n = positive_int(p, "n", 10'000'000);
  p.finish();

  const stochastic::NoiseSpec spec(h0, sources, covariance, dt, duration);
  const auto report = stochastic::compare_to_lindblad(spec, rho0, n, seed);
  const Matrix& mean = report.ensemble.mean_state.matrix();
  io::CsvWriter w(out.csv, {"row", "col", "mean_re", "mean_im", "lindblad_re", "lindblad_im", "z"});
  for (Eigen::Index i = 0; i < mean.rows(); ++i)
    for (Eigen::Index j = 0; j < mean.cols(); ++j)
      w.row({static_cast<double>(i), static_cast<double>(j), mean(i, j).real(), mean(i, j).imag(),
             report.reference(i, j).real(), report.reference(i, j).imag(), report.z(i, j)});
  out.metrics["n"] = n;
  out.metrics["dt"] = dt;
  out.metrics["T"] = duration;
  out.metrics["steps"] = spec.steps();
  out.metrics["max_dev"] = report.max_dev;
  out.metrics["z_max"] = number(report.z_max);
  out.metrics["seed"] = seed;
}

void run_liu_scan(const Params& p, std::uint64_t seed, Output& out) {
  const double g = p.number("g");
  const int n_states = positive_int(p, "n_states", 100'000);
  const double duration = positive_number(p, "T");
  const int steps = positive_int(p, "steps", 500, 1'000'000);
  p.finish();
  if (g < 0) throw ValidationError("g: must be non-negative");

  SeededRng rng(seed);
  const auto scan = models::liu_positivity_scan(g, n_states, duration, rng, steps);
  io::CsvWriter w(out.csv, {"state", "min_eig", "time_of_min"});
  for (int i = 0; i < scan.states; ++i)
    w.row({static_cast<double>(i), scan.state_min[static_cast<std::size_t>(i)], scan.state_time[static_cast<std::size_t>(i)]});
  out.metrics["states"] = scan.states;
  out.metrics["min_eigenvalue"] = scan.min_eigenvalue;
  out.metrics["time_of_min"] = scan.time_of_min;
  out.metrics["worst_state"] = scan.worst_state;
  out.metrics["positivity_preserved"] = scan.positivity_preserved;
}

void run_uw_report(const Params& p, std::uint64_t, Output& out) {
  const HermitianOperator h(p.matrix("H"));
  const json& regions_json = p.raw("regions");
  if (!regions_json.is_array() || regions_json.empty()) throw ValidationError("regions: expected a nonempty array");
  std::vector<models::ProjectionRegion> regions;
  for (std::size_t i = 0; i < regions_json.size(); ++i) {
    Params r(regions_json[i], "uw-report.regions[" + std::to_string(i) + "]");
    models::ProjectionRegion region{HermitianOperator(r.matrix("field")), r.number("threshold"), r.number("rate")};
    r.finish();
    regions.push_back(std::move(region));
  }
  const qm::PureState lab(p.vector("lab_state"));
  std::optional<HermitianOperator> observable;
  if (p.has("observable")) observable.emplace(p.matrix("observable"));
  p.finish();

  const models::ProjectionModel model(h, regions);
  const auto report = models::lab_state_report(model, lab);
  io::CsvWriter w(out.csv, {"region", "overlap", "exact", "predicted"});
  for (std::size_t i = 0; i < report.regions.size(); ++i) {
    const auto& r = report.regions[i];
    w.row({static_cast<double>(i), r.overlap, r.exact, r.predicted});
  }
  const auto rho = DensityMatrix::pure(lab);
  out.metrics["exact_rate"] = report.exact_rate;
  out.metrics["predicted_rate"] = report.predicted_rate;
  out.metrics["relative_error"] = report.relative_error;
  out.metrics["purity_rate"] = models::decoherence_rate(model, rho);
  out.metrics["purity_rate_closed_form"] = models::decoherence_rate_closed_form(model, rho);
  out.metrics["purity_rate_plus_form"] = models::decoherence_rate_plus_form(model, rho);
  if (observable) {
    const auto res = models::protection_residual(model, *observable);
    out.metrics["protection_residual"] = {{"generator", res.generator}, {"finite_difference", res.finite_difference}};
  }
}

void run_lattice(const Params& p, std::uint64_t, Output& out) {
  models::ContrastSettings s;
  s.sites = positive_int(p, "sites", s.sites, models::kMaxLatticeSites);
  s.duration = p.has("T") ? positive_number(p, "T") : s.duration;
  s.steps = positive_int(p, "steps", s.steps, 1'000'000);
  s.onsite_rate = p.number("onsite_rate", s.onsite_rate);
  s.collective_rate = p.number("collective_rate", s.collective_rate);
  s.bond_coupling = p.number("bond_coupling", s.bond_coupling);
  p.finish();
  if (s.sites < 4) throw ValidationError("sites: at least 4 are needed to fit and test the envelope");
  if (s.onsite_rate < 0 || s.collective_rate < 0) throw ValidationError("rates must be non-negative");

  const auto rep = models::lattice_contrast(s);
  const auto& collective = rep.runs.back();
  const double rate = rep.collective_rate.estimate.real();
  io::CsvWriter w(out.csv, {"t", "exact", "estimate", "bound"});
  for (std::size_t k = 0; k < collective.series.times.size(); ++k) {
    const double t = collective.series.times[k];
    w.row({t, collective.series.values[k][0].real(), rate * t, rep.bound});
  }
  out.metrics["envelope"] = {{"amplitude", rep.envelope.amplitude},
                             {"decay", rep.envelope.decay},
                             {"residual", rep.envelope.residual},
                             {"lift", rep.envelope.lift},
                             {"points", rep.envelope.points}};
  out.metrics["bound"] = rep.bound;
  out.metrics["distance"] = s.sites - 1;
  out.metrics["collective_rate"] = {{"exact", rep.collective_rate.exact.real()},
                                    {"estimate", rep.collective_rate.estimate.real()},
                                    {"dissipative_part", rep.collective_rate.dissipative_part.real()},
                                    {"clustering_residual", rep.collective_rate.clustering_residual}};
  json runs = json::array();
  for (const auto& r : rep.runs) {
    json j = {{"name", r.name}, {"max_correlation", r.max_correlation}, {"exceeds_bound", r.first_exceed_time.has_value()}};
    j["first_exceed_time"] = r.first_exceed_time ? json(*r.first_exceed_time) : json(nullptr);
    runs.push_back(std::move(j));
  }
  out.metrics["runs"] = std::move(runs);
}

void run_page_scan(const Params& p, std::uint64_t seed, Output& out) {
  const int spins = positive_int(p, "N", 14);
  const int seeds = positive_int(p, "seeds", 100'000);
  p.finish();
  if (spins < 2) throw ValidationError("N: at least 2 spins");

  const auto rows = scrambling::page_scan(spins, seeds, seed);
  write_rows(out, rows);
  json deviation = json::array();
  for (const auto& r : rows) deviation.push_back(std::abs(r.mean - std::min(r.index, spins - r.index) * std::numbers::ln2));
  out.metrics["spins"] = spins;
  out.metrics["seeds"] = seeds;
  out.metrics["deviation_from_page"] = std::move(deviation);
  out.metrics["full_system_entropy"] = rows.back().max;
}

scrambling::HPExperiment hp_experiment(const Params& p, std::uint64_t seed) {
  scrambling::HPExperiment exp;
  exp.n = positive_int(p, "n", exp.n, scrambling::kMaxRegisterQubits);
  exp.k = static_cast<int>(p.integer("k", exp.k));
  exp.trials = positive_int(p, "trials", exp.trials, 1'000'000);
  exp.seed = seed;
  exp.validate();
  return exp;
}

bool non_increasing(const std::vector<scrambling::ScanRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (rows[i].mean > rows[i - 1].mean) return false;
  return true;
}

void run_hp(const Params& p, std::uint64_t seed, Output& out) {
  const auto exp = hp_experiment(p, seed);
  p.finish();
  const auto result = scrambling::hp_run(exp);
  write_rows(out, result.rows);
  out.metrics["experiment"] = {{"n", exp.n}, {"k", exp.k}, {"trials", exp.trials}, {"seed", exp.seed}};
  out.metrics["non_increasing"] = non_increasing(result.rows);
  out.metrics["final_delta"] = result.rows.back().max;
}

void run_hp_threshold(const Params& p, std::uint64_t seed, Output& out) {
  const auto exp = hp_experiment(p, seed);
  const double safety = p.number("safety", 3.0);
  const int calibration_trials = positive_int(p, "calibration_trials", 2000, 1'000'000);
  p.finish();
  if (safety < 0) throw ValidationError("safety: must be non-negative");

  const auto cal = scrambling::calibrate_threshold(safety, calibration_trials, seed);
  const auto scan = scrambling::hp_threshold_scan(exp, cal.tau);
  write_rows(out, scan.result.rows);
  const double predicted = 0.5 * (exp.n + exp.k + safety);
  out.metrics["experiment"] = {{"n", exp.n}, {"k", exp.k}, {"trials", exp.trials}, {"seed", exp.seed}};
  out.metrics["calibration"] = {{"intercept", cal.intercept},
                                {"slope", cal.slope},
                                {"safety", cal.safety},
                                {"tau", cal.tau},
                                {"points", cal.points},
                                {"trials", calibration_trials}};
  out.metrics["threshold"] = scan.threshold;
  out.metrics["predicted_threshold"] = predicted;
  out.metrics["within_one"] = std::abs(scan.threshold - predicted) <= 1.0;
  out.metrics["non_increasing"] = non_increasing(scan.result.rows);
}

double thermo_mass(const Params& p) {
  const int given = int(p.has("M")) + int(p.has("beta")) + int(p.has("solar_masses"));
  if (given != 1) throw ValidationError("exactly one of M, beta, solar_masses is required");
  if (p.has("M")) return positive_number(p, "M");
  if (p.has("beta")) return positive_number(p, "beta") / (8.0 * std::numbers::pi);
  return positive_number(p, "solar_masses") * thermo::kSolarMass;
}

void run_thermo(const Params& p, std::uint64_t, Output& out) {
  const double mass = thermo_mass(p);
  bool si = false;
  if (p.has("si")) {
    const json& v = p.raw("si");
    if (!v.is_boolean()) throw ValidationError("si: expected a boolean");
    si = v.get<bool>();
  }
  p.finish();
  const auto r = thermo::thermo_report(mass);
  io::CsvWriter w(out.csv, {"mass", "temperature", "entropy", "area", "beta", "evaporation_time", "remnant_decay_time",
                            "page_time", "thermalization_time", "log_z", "energy_expectation"});
  w.row({r.mass, r.temperature, r.entropy, r.area, r.beta, r.evaporation_time, r.remnant_decay_time, r.page_time,
         r.thermalization_time.value_or(std::nan("")), r.log_z, r.energy_expectation});
  out.metrics = thermo_summary(mass, si);
}

using Runner = std::function<void(const Params&, std::uint64_t, Output&)>;

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> table{
      {"evolve", run_evolve},         {"stochastic-compare", run_stochastic}, {"liu-scan", run_liu_scan},
      {"uw-report", run_uw_report},   {"lattice-correlations", run_lattice}, {"page-scan", run_page_scan},
      {"hp-run", run_hp},             {"hp-threshold", run_hp_threshold},    {"thermo", run_thermo}};
  return table;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot write " + path.string());
  f << text;
  if (!f) throw ValidationError("write failed: " + path.string());
}

}  // namespace

json thermo_summary(double mass, bool si) {
  const auto r = thermo::thermo_report(mass);
  json j = {{"units", "planck"},
            {"mass", r.mass},
            {"temperature", r.temperature},
            {"entropy", r.entropy},
            {"area", r.area},
            {"beta", r.beta},
            {"evaporation_time", r.evaporation_time},
            {"evaporation_constant", thermo::evaporation_constant()},
            {"remnant_decay_time", r.remnant_decay_time},
            {"page_time", r.page_time},
            {"log_z", r.log_z},
            {"energy_expectation", r.energy_expectation}};
  j["thermalization_time"] = r.thermalization_time ? json(*r.thermalization_time) : json(nullptr);
  if (si) {
    json s = {{"mass_kg", r.mass * thermo::kPlanckMassKg},
              {"temperature_K", r.temperature * thermo::kPlanckTemperatureK},
              {"area_m2", r.area * thermo::kPlanckLengthM * thermo::kPlanckLengthM},
              {"evaporation_time_s", r.evaporation_time * thermo::kPlanckTimeS},
              {"evaporation_time_years", r.evaporation_time * thermo::kPlanckTimeS / thermo::kJulianYearS},
              {"remnant_decay_time_s", r.remnant_decay_time * thermo::kPlanckTimeS},
              {"page_time_s", r.page_time * thermo::kPlanckTimeS},
              {"energy_expectation_J", r.energy_expectation * thermo::kPlanckEnergyJ}};
    s["thermalization_time_s"] = r.thermalization_time ? json(*r.thermalization_time * thermo::kPlanckTimeS) : json(nullptr);
    s["constants"] = {{"planck_mass_kg", thermo::kPlanckMassKg},   {"planck_time_s", thermo::kPlanckTimeS},
                      {"planck_length_m", thermo::kPlanckLengthM}, {"planck_temperature_K", thermo::kPlanckTemperatureK},
                      {"planck_energy_J", thermo::kPlanckEnergyJ}, {"solar_mass_kg", thermo::kSolarMassKg},
                      {"julian_year_s", thermo::kJulianYearS}};
    j["si"] = std::move(s);
  }
  return j;
}

RunOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& prefix, bool timing) {
  const auto it = runners().find(config.kind);
  if (it == runners().end()) throw ValidationError("config.kind: unknown kind '" + config.kind + "'");
  const auto start = std::chrono::steady_clock::now();
  Output out;
  it->second(Params(config.params, config.kind), config.seed, out);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json summary = {{"kind", config.kind},
                  {"seed", config.seed},
                  {"config", {{"kind", config.kind}, {"params", config.params}, {"seed", config.seed}}},
                  {"metrics", out.metrics}};
  if (timing) summary["wall_time_s"] = elapsed;

  RunOutcome outcome{prefix.string() + ".csv", prefix.string() + ".json"};
  write_file(outcome.csv, out.csv.str());
  write_file(outcome.summary, summary.dump(2) + "\n");
  return outcome;
}

int run_command(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& err) {
  try {
    const auto config = load_config(config_path);
    std::filesystem::path prefix;
    if (options.output) prefix = *options.output;
    else if (!config.output.empty()) prefix = config.output;
    else prefix = config_path.parent_path() / (config_path.stem().string() + ".out");
    run_experiment(config, prefix, options.timing);
    return kExitOk;
  } catch (const ValidationError& e) {
    err << "error: validation: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    err << "error: numerical: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace infoloss::cli
