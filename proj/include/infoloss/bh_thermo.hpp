#pragma once

#include <optional>

namespace infoloss::thermo {

// Conversion data (CODATA 2018, IAU nominal solar mass).
inline constexpr double kPlanckMassKg = 2.176434e-8;
inline constexpr double kPlanckTimeS = 5.391247e-44;
inline constexpr double kPlanckLengthM = 1.616255e-35;
inline constexpr double kPlanckTemperatureK = 1.416784e32;
inline constexpr double kPlanckEnergyJ = 1.9561e9;
inline constexpr double kPlanckEnergyEv = 1.22089e28;
inline constexpr double kSolarMassKg = 1.98847e30;
inline constexpr double kJulianYearS = 3.15576e7;

/// One solar mass in Planck masses (about 9.14e37).
inline constexpr double kSolarMass = kSolarMassKg / kPlanckMassKg;

/// Upper bound on the eigenvalues of the dissipative term from neutral kaon
/// data, 2e-12 eV, in Planck energy units. Reference value only.
inline constexpr double kKaonBoundEv = 2e-12;
inline constexpr double kKaonBound = kKaonBoundEv / kPlanckEnergyEv;

/// Evaporation constant C in dM/dt = -C / M^2, fixed so that one solar mass
/// lives 1e64 Julian years: C = M_sun^3 / (3 t).
double evaporation_constant();

// All inputs and outputs in Planck units. Non-positive masses throw ValidationError.
double temperature(double mass);  // 1 / (8 pi M)
double entropy(double mass);      // 4 pi M^2
double area(double mass);         // 16 pi M^2
double beta(double mass);         // 8 pi M

/// Leading saddle of the Euclidean partition function at inverse temperature beta.
struct PartitionChain {
  double log_z = 0.0;   // -beta^2 / (16 pi)
  double energy = 0.0;  // -d log Z / d beta = beta / (8 pi)
  double entropy = 0.0; // beta E + log Z
};
PartitionChain partition_chain(double beta);

/// Solution of dM/dt = -C / M^2 from M to zero: M^3 / (3 C).
double evaporation_time(double mass, double c);
double evaporation_time(double mass);

struct RemnantBudget {
  double quanta = 0.0;          // 4 pi M^2
  double quantum_energy = 0.0;  // 1 / (4 pi M^2)
  double wavelength = 0.0;      // 4 pi M^2
  double decay_time = 0.0;      // quanta * wavelength
};
RemnantBudget remnant_budget(double mass);

/// M log M; requires M > 1.
double thermalization_time(double mass);
/// M exp(-dt / M)
double message_window(double mass, double delta_t);

/// exp(-d^2) for separation d >= 0.
double correlator_error(double separation);
/// (4 pi M^2)^{3/2}
double page_time(double mass);

struct ThermoReport {
  double mass = 0.0;
  double temperature = 0.0;
  double entropy = 0.0;
  double area = 0.0;
  double beta = 0.0;
  double evaporation_time = 0.0;
  double remnant_decay_time = 0.0;
  double page_time = 0.0;
  /// Absent for M <= 1, where M log M is not a time scale.
  std::optional<double> thermalization_time;
  double log_z = 0.0;
  double energy_expectation = 0.0;
};
ThermoReport thermo_report(double mass);

}  // namespace infoloss::thermo
