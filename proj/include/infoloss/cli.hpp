#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "infoloss/serialization.hpp"

namespace infoloss::cli {

using io::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

const std::vector<std::string>& known_kinds();

/// Typed, schema-checked access to a config's "params" object. Every getter
/// marks its key as consumed; finish() rejects keys nobody asked for.
class Params {
 public:
  Params(json params, std::string kind);

  bool has(const std::string& key) const;
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  long integer(const std::string& key, long fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  Matrix matrix(const std::string& key) const;
  std::vector<Matrix> matrices(const std::string& key) const;
  Vector vector(const std::string& key) const;
  const json& raw(const std::string& key) const;

  void finish() const;

 private:
  std::string where(const std::string& key) const;
  const json& require(const std::string& key) const;

  json params_;
  std::string kind_;
  mutable std::set<std::string> used_;
};

struct ExperimentConfig {
  std::string kind;
  json params;
  std::uint64_t seed = 0;
  std::string output;  // path prefix; empty when not given
};

/// Validates the top-level shape (kind, params, seed, output).
ExperimentConfig parse_config(const json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

struct RunOptions {
  /// Replaces the config's output prefix.
  std::optional<std::filesystem::path> output;
  /// Adds wall_time_s to the summary (off by default so outputs are reproducible).
  bool timing = false;
};

struct RunOutcome {
  std::filesystem::path csv;
  std::filesystem::path summary;
};

/// Runs one experiment and writes <prefix>.csv and <prefix>.json. Throws
/// ValidationError or NumericalError.
RunOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& prefix, bool timing = false);

/// run subcommand: loads, runs, reports errors on `err` as one line
/// "error: <category>: <reason>" and returns the exit code.
int run_command(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& err);

/// Summary JSON for the thermo subcommand.
json thermo_summary(double mass, bool si);

// -------------------------------------------------------------- goldens

inline constexpr double kRelativeTolerance = 1e-9;
inline constexpr double kAbsoluteFloor = 1e-15;

bool numbers_match(double expected, double actual);

/// Cell-by-cell comparison; returns mismatch descriptions "file:row:col ...".
std::vector<std::string> compare_csv(const std::string& expected, const std::string& actual, const std::string& label);
/// Recursive comparison; integers, booleans and strings exactly, other numbers
/// within tolerance; keys named wall_time_s are ignored.
std::vector<std::string> compare_json(const json& expected, const json& actual, const std::string& label);

/// Re-runs every <dir>/configs/*.json into a scratch directory and compares
/// with <dir>/expected/<name>.{csv,json}. Returns the exit code.
int verify_command(const std::filesystem::path& golden_dir, std::ostream& out, std::ostream& err);

}  // namespace infoloss::cli
