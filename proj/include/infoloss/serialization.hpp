#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "infoloss/qm_core.hpp"

namespace infoloss::io {

using nlohmann::json;

/// Row-major array of rows, each entry a [re, im] pair.
json matrix_to_json(const Matrix& m);
/// Accepts [re, im] pairs or plain reals. Throws ValidationError on ragged or
/// malformed input.
Matrix matrix_from_json(const json& j);

json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j);

/// %.17g
std::string format_double(double x);

/// Comma-separated, header row, '\n' line endings.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header);
  void row(const std::vector<double>& values);

 private:
  std::ostream& out_;
  std::size_t columns_;
};

}  // namespace infoloss::io
