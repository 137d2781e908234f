#pragma once

// One end-to-end run: build or load a problem, run the requested method over
// the grid, and produce a line-delimited JSON report.
//
// Report records, one JSON object per line, keys in this order:
//   {"record":"config", ...}   the effective configuration
//   {"record":"row", ...}      one per grid value (per k for tsvd)
//   {"record":"summary", ...}  selection and query counts
// Wall time is not part of the report.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtikhonov/linalg.hpp"

namespace qtik {

enum class Method { LCurve, Gcv, ClassicalLCurve, ClassicalGcv, Tikhonov, Tsvd };

/// Throws std::invalid_argument for unknown names.
Method parse_method(const std::string& name);
std::string to_string(Method method);
const std::vector<std::string>& method_names();

struct RunConfig {
  std::string problem = "geometric-spectrum";
  Eigen::Index m = 6;
  Eigen::Index n = 4;
  double noise = 0.01;
  std::string matrix_file;  // replaces the generator when set
  std::string rhs_file;
  double mu0 = 1.0;
  double rho = 0.9;
  std::size_t p = 16;
  std::string method = "lcurve";
  double epsilon = 0.05;
  int phase_bits = 8;
  Eigen::Index rank = 2;
  std::uint64_t seed = 0;
  std::string out;  // empty: stdout

  /// Throws std::invalid_argument on out-of-range settings.
  void validate() const;
};

struct RunReport {
  nlohmann::ordered_json config;
  std::vector<nlohmann::ordered_json> rows;
  nlohmann::ordered_json summary;

  std::string to_jsonl() const;
};

RegularizedProblem load_or_generate(const RunConfig& config);

RunReport run(const RunConfig& config);

void write_report(const RunReport& report, std::ostream& out);

}  // namespace qtik
