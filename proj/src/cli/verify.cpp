#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "infoloss/cli.hpp"

namespace infoloss::cli {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

bool parse_number(const std::string& s, double& value) {
  if (s.empty()) return false;
  char* end = nullptr;
  value = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot read " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string describe(const json& j) {
  std::string s = j.dump();
  return s.size() > 60 ? s.substr(0, 57) + "..." : s;
}

void compare_json_at(const json& e, const json& a, const std::string& path, std::vector<std::string>& out) {
  if (e.is_number() && a.is_number()) {
    const bool exact = e.is_number_integer() && a.is_number_integer();
    if (exact ? e != a : !numbers_match(e.get<double>(), a.get<double>()))
      out.push_back(path + ": expected " + describe(e) + ", got " + describe(a));
    return;
  }
  if (e.type() != a.type()) {
    out.push_back(path + ": expected " + describe(e) + ", got " + describe(a));
    return;
  }
  if (e.is_object()) {
    for (const auto& [key, value] : e.items()) {
      if (key == "wall_time_s") continue;
      if (!a.contains(key)) out.push_back(path + "." + key + ": missing");
      else compare_json_at(value, a.at(key), path + "." + key, out);
    }
    for (const auto& [key, value] : a.items()) {
      (void)value;
      if (key != "wall_time_s" && !e.contains(key)) out.push_back(path + "." + key + ": unexpected");
    }
  } else if (e.is_array()) {
    if (e.size() != a.size()) {
      out.push_back(path + ": length " + std::to_string(a.size()) + ", expected " + std::to_string(e.size()));
      return;
    }
    for (std::size_t i = 0; i < e.size(); ++i) compare_json_at(e[i], a[i], path + "[" + std::to_string(i) + "]", out);
  } else if (e != a) {
    out.push_back(path + ": expected " + describe(e) + ", got " + describe(a));
  }
}

std::filesystem::path scratch_directory() {
  std::string pattern = (std::filesystem::temp_directory_path() / "infoloss-verify-XXXXXX").string();
  if (!::mkdtemp(pattern.data())) throw ValidationError("cannot create a scratch directory");
  return pattern;
}

}  // namespace

bool numbers_match(double expected, double actual) {
  if (std::isnan(expected) || std::isnan(actual)) return std::isnan(expected) && std::isnan(actual);
  if (std::isinf(expected) || std::isinf(actual)) return expected == actual;
  return std::abs(expected - actual) <= std::max(kRelativeTolerance * std::abs(expected), kAbsoluteFloor);
}

std::vector<std::string> compare_csv(const std::string& expected, const std::string& actual, const std::string& label) {
  std::vector<std::string> out;
  const auto e_lines = split(expected, '\n');
  const auto a_lines = split(actual, '\n');
  if (e_lines.size() != a_lines.size())
    out.push_back(label + ": " + std::to_string(a_lines.size()) + " lines, expected " + std::to_string(e_lines.size()));
  const std::size_t rows = std::min(e_lines.size(), a_lines.size());
  std::vector<std::string> header;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto e = split(e_lines[r], ',');
    const auto a = split(a_lines[r], ',');
    if (r == 0) header = e;
    if (e.size() != a.size()) {
      out.push_back(label + ":" + std::to_string(r) + ": " + std::to_string(a.size()) + " columns, expected " +
                    std::to_string(e.size()));
      continue;
    }
    for (std::size_t c = 0; c < e.size(); ++c) {
      double x = 0.0;
      double y = 0.0;
      const bool same = r > 0 && parse_number(e[c], x) && parse_number(a[c], y) ? numbers_match(x, y) : e[c] == a[c];
      if (!same) {
        const std::string column = c < header.size() ? header[c] : std::to_string(c);
        out.push_back(label + ":" + std::to_string(r) + ":" + column + ": expected " + e[c] + ", got " + a[c]);
      }
    }
  }
  return out;
}

std::vector<std::string> compare_json(const json& expected, const json& actual, const std::string& label) {
  std::vector<std::string> out;
  compare_json_at(expected, actual, label, out);
  return out;
}

int verify_command(const std::filesystem::path& golden_dir, std::ostream& out, std::ostream& err) {
  const auto configs = golden_dir / "configs";
  const auto expected = golden_dir / "expected";
  if (!std::filesystem::is_directory(configs) || !std::filesystem::is_directory(expected)) {
    err << "error: validation: " << golden_dir.string() << " needs configs/ and expected/\n";
    return kExitValidation;
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(configs))
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    err << "error: validation: no configs in " << configs.string() << '\n';
    return kExitValidation;
  }

  std::filesystem::path scratch;
  try {
    scratch = scratch_directory();
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return kExitFailure;
  }

  int code = kExitOk;
  std::size_t failed = 0;
  for (const auto& file : files) {
    const std::string name = file.stem().string();
    std::vector<std::string> mismatches;
    try {
      const auto config = load_config(file);
      const auto outcome = run_experiment(config, scratch / name);
      mismatches = compare_csv(read_file(expected / (name + ".csv")), read_file(outcome.csv), name + ".csv");
      const auto json_diff = compare_json(json::parse(read_file(expected / (name + ".json"))),
                                          json::parse(read_file(outcome.summary)), name + ".json");
      mismatches.insert(mismatches.end(), json_diff.begin(), json_diff.end());
    } catch (const std::exception& e) {
      mismatches.push_back(name + ": " + e.what());
    }
    if (mismatches.empty()) {
      out << "ok " << name << '\n';
    } else {
      ++failed;
      code = kExitFailure;
      out << "FAIL " << name << '\n';
      for (const auto& m : mismatches) err << "mismatch: " << m << '\n';
    }
  }
  std::error_code ec;
  std::filesystem::remove_all(scratch, ec);
  out << files.size() - failed << "/" << files.size() << " golden configs match\n";
  return code;
}

}  // namespace infoloss::cli
