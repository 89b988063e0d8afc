#pragma once

#include <duality_lab/registry.hpp>

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace duality_lab::cli {

struct RunConfig {
  std::string command;  // check | sweep | simulate | tabulate | list
  std::vector<std::string> suites;

  // Grid lists; check uses the first entry of each.
  std::vector<double> q, lambda, rho, v, sigma;
  std::vector<std::vector<double>> k;
  std::optional<int> sites;  // M; a single k value is repeated to M sites

  int max_n = 3;
  int max_index = 2;
  int n_trunc = 14;
  std::optional<double> tolerance;
  std::uint64_t seed = 20240601;
  std::string output;
  std::string format = "json";     // json | csv
  std::string precision = "high";  // high | standard
  bool richardson = false;
  int jobs = 1;

  // simulate
  std::string process;
  std::vector<double> initial;
  double horizon = 1.0;
  double dt = 1e-3;
  long samples = 1;

  // tabulate
  std::string family;
  std::vector<int> n_values, x_values;

  bool operator==(const RunConfig&) const = default;

  GridSpec grid() const;
  SuiteOptions suite_options() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

// Checks command, suite names and ranges; throws Error(config).
void validate(const RunConfig& c);

// "0.4,0.7" -> {0.4, 0.7}
std::vector<double> parse_list(const std::string& s);
// "1,1;0.5,2" -> {{1,1},{0.5,2}}
std::vector<std::vector<double>> parse_k_list(const std::string& s);
// "0..3" or "0,2,5"
std::vector<int> parse_range(const std::string& s);

// Report schema: suite, params, n_cases, max_abs, max_rel, tolerance, pass, worst_case
// (plus tail_bound, flags, errors, notes when present).
nlohmann::json report_json(const CheckReport& r);
// Decimal string when |log10 |x|| > 300 or x is not finite.
nlohmann::json number_json(double x);
std::string report_csv_header();
std::string report_csv_row(const CheckReport& r);

// Writes to path via a temporary file and rename.
void write_atomically(const std::string& path, const std::string& contents);

}  // namespace duality_lab::cli
