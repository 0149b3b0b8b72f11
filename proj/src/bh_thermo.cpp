#include "infoloss/bh_thermo.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "infoloss/errors.hpp"

namespace infoloss::thermo {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) throw ValidationError(std::string(what) + " must be positive and finite");
}

}  // namespace

double evaporation_constant() {
  const double lifetime = 1e64 * kJulianYearS / kPlanckTimeS;
  return kSolarMass * kSolarMass * kSolarMass / (3.0 * lifetime);
}

double temperature(double mass) {
  require_positive(mass, "mass");
  return 1.0 / (8.0 * kPi * mass);
}

double entropy(double mass) {
  require_positive(mass, "mass");
  return 4.0 * kPi * mass * mass;
}

double area(double mass) {
  require_positive(mass, "mass");
  return 16.0 * kPi * mass * mass;
}

double beta(double mass) {
  require_positive(mass, "mass");
  return 8.0 * kPi * mass;
}

PartitionChain partition_chain(double b) {
  require_positive(b, "beta");
  PartitionChain p;
  p.log_z = -b * b / (16.0 * kPi);
  p.energy = b / (8.0 * kPi);
  p.entropy = b * p.energy + p.log_z;
  return p;
}

double evaporation_time(double mass, double c) {
  require_positive(mass, "mass");
  require_positive(c, "evaporation constant");
  return mass * mass * mass / (3.0 * c);
}

double evaporation_time(double mass) { return evaporation_time(mass, evaporation_constant()); }

RemnantBudget remnant_budget(double mass) {
  RemnantBudget r;
  r.quanta = entropy(mass);
  r.quantum_energy = 1.0 / r.quanta;
  r.wavelength = r.quanta;
  r.decay_time = r.quanta * r.wavelength;
  return r;
}

double thermalization_time(double mass) {
  if (!(mass > 1.0) || !std::isfinite(mass)) throw ValidationError("thermalization_time: M log M needs M > 1");
  return mass * std::log(mass);
}

double message_window(double mass, double delta_t) {
  require_positive(mass, "mass");
  if (!(delta_t >= 0.0)) throw ValidationError("message_window: delta_t must be >= 0");
  return mass * std::exp(-delta_t / mass);
}

double correlator_error(double separation) {
  if (!(separation >= 0.0)) throw ValidationError("correlator_error: separation must be >= 0");
  return std::exp(-separation * separation);
}

double page_time(double mass) { return std::pow(entropy(mass), 1.5); }

ThermoReport thermo_report(double mass) {
  ThermoReport r;
  r.mass = mass;
  r.temperature = temperature(mass);
  r.entropy = entropy(mass);
  r.area = area(mass);
  r.beta = beta(mass);
  r.evaporation_time = evaporation_time(mass);
  r.remnant_decay_time = remnant_budget(mass).decay_time;
  r.page_time = page_time(mass);
  if (mass > 1.0) r.thermalization_time = thermalization_time(mass);
  const PartitionChain p = partition_chain(r.beta);
  r.log_z = p.log_z;
  r.energy_expectation = p.energy;
  return r;
}

}  // namespace infoloss::thermo
