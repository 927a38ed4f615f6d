#pragma once

#include <stdexcept>
#include <string>

#include <json.hpp>

#include "carnot/algebra.hpp"
#include "carnot/deviation.hpp"
#include "carnot/metric.hpp"

namespace carnot {

using Json = nlohmann::ordered_json;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MalformedJsonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownGroupError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Group schema: {"m": int, "m2": int, "B": [m2 x (m x m) nested arrays]}.
Json algebra_to_json(const StepTwoAlgebra& a);
StepTwoAlgebra algebra_from_json(const Json& j);

/// Metric schema: {"G": [[...]]}.
Json metric_to_json(const VerticalMetric& v);
VerticalMetric metric_from_json(const Json& j);

Json solver_to_json(const SolverConfig& cfg);
SolverConfig solver_from_json(const Json& j);

Json report_to_json(const DeviationReport& r);

/// Parses catalog names: heis(b1,...,bn), free(m), geps(n,eps), gbar(n,eps).
/// Throws UnknownGroupError for unrecognized call-style names.
StepTwoAlgebra parse_group_name(const std::string& name);

/// A string is treated as a catalog name when it has call syntax; anything
/// else is interpreted as a file path.
bool looks_like_group_name(const std::string& s);

/// Loads a group from a catalog name or a JSON file.
StepTwoAlgebra load_group(const std::string& name_or_path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& body);

/// Doubles with 17 significant digits and '.' decimal separator, enough to
/// round-trip exactly.
std::string format_double(double x);

}  // namespace carnot
