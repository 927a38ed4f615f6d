#pragma once

#include <iosfwd>
#include <string>

#include "carnot/deviation.hpp"

namespace carnot {

/// One fully-specified CLI invocation. `group` is a catalog name or a JSON
/// path; `metric` is "identity", "optimal", or a JSON path; `n_range` is a
/// single index or an inclusive "a..b" range.
struct RunSpec {
  std::string command;  // validate | deviation | defects | verify-fundamental | conjecture | catalog
  std::string group;
  std::string metric = "identity";
  SolverConfig solver;
  std::string output;  // empty writes to stdout
  std::string format = "json";
  std::string n_range = "2..4";
  int samples = 100;
};

/// Executes the run and writes the serialized report. Exit codes:
/// 0 success, 1 validation failure, 2 I/O or input errors.
int run(const RunSpec& spec, std::ostream& out, std::ostream& err);
int run(const RunSpec& spec);

}  // namespace carnot
