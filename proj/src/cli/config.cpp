#include <algorithm>
#include <fstream>

#include "infoloss/cli.hpp"

namespace infoloss::cli {

const std::vector<std::string>& known_kinds() {
  static const std::vector<std::string> kinds{"evolve",  "stochastic-compare", "liu-scan",     "uw-report", "lattice-correlations",
                                              "page-scan", "hp-run",            "hp-threshold", "thermo"};
  return kinds;
}

Params::Params(json params, std::string kind) : params_(std::move(params)), kind_(std::move(kind)) {
  if (!params_.is_object()) throw ValidationError("params must be an object");
}

std::string Params::where(const std::string& key) const { return kind_ + ".params." + key; }

bool Params::has(const std::string& key) const { return params_.contains(key); }

const json& Params::require(const std::string& key) const {
  if (!params_.contains(key)) throw ValidationError(where(key) + ": required");
  used_.insert(key);
  return params_.at(key);
}

double Params::number(const std::string& key) const {
  const json& v = require(key);
  if (!v.is_number()) throw ValidationError(where(key) + ": expected a number");
  return v.get<double>();
}

double Params::number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

long Params::integer(const std::string& key) const {
  const json& v = require(key);
  if (!v.is_number_integer()) throw ValidationError(where(key) + ": expected an integer");
  return v.get<long>();
}

long Params::integer(const std::string& key, long fallback) const { return has(key) ? integer(key) : fallback; }

std::string Params::text(const std::string& key, const std::string& fallback) const {
  if (!has(key)) return fallback;
  const json& v = require(key);
  if (!v.is_string()) throw ValidationError(where(key) + ": expected a string");
  return v.get<std::string>();
}

Matrix Params::matrix(const std::string& key) const {
  try {
    return io::matrix_from_json(require(key));
  } catch (const ShapeError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ValidationError(where(key) + ": " + e.what());
  }
}

std::vector<Matrix> Params::matrices(const std::string& key) const {
  const json& v = require(key);
  if (!v.is_array()) throw ValidationError(where(key) + ": expected an array of matrices");
  std::vector<Matrix> out;
  for (const auto& m : v) {
    try {
      out.push_back(io::matrix_from_json(m));
    } catch (const ValidationError& e) {
      throw ValidationError(where(key) + ": " + e.what());
    }
  }
  return out;
}

Vector Params::vector(const std::string& key) const {
  try {
    return io::vector_from_json(require(key));
  } catch (const ValidationError& e) {
    throw ValidationError(where(key) + ": " + e.what());
  }
}

const json& Params::raw(const std::string& key) const { return require(key); }

void Params::finish() const {
  for (const auto& [key, value] : params_.items()) {
    (void)value;
    if (!used_.count(key)) throw ValidationError(where(key) + ": unknown parameter");
  }
}

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) throw ValidationError("config: top level must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "kind" && key != "params" && key != "seed" && key != "output")
      throw ValidationError("config: unknown field '" + key + "'");
  }
  ExperimentConfig c;
  if (!j.contains("kind") || !j["kind"].is_string()) throw ValidationError("config.kind: required string");
  c.kind = j["kind"].get<std::string>();
  const auto& kinds = known_kinds();
  if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end())
    throw ValidationError("config.kind: unknown kind '" + c.kind + "'");
  c.params = j.contains("params") ? j["params"] : json::object();
  if (!c.params.is_object()) throw ValidationError("config.params: must be an object");
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
      throw ValidationError("config.seed: must be a non-negative 64-bit integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ValidationError("config.output: must be a string");
    c.output = j["output"].get<std::string>();
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config: " + path.string() + ": " + e.what());
  }
  return parse_config(j);
}

}  // namespace infoloss::cli
