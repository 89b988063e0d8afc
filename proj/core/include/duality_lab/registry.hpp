#pragma once

#include <duality_lab/report.hpp>
#include <duality_lab/verify.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace duality_lab {

struct SuiteOptions {
  int max_total = 3;   // particle bound of the exhaustive state sets
  int max_index = 2;   // index totals for multi-site orthogonality (one-site: 2 * max_index)
  int n_trunc = 14;
  int n_points = 4;    // continuous sample points in (0.1, 2)^M
  Precision precision = Precision::high;
  bool richardson = false;
  std::uint64_t seed = 20240601;
  long mc_samples = 20000;
  double mc_time = 0.3;
  long stationarity_samples = 100000;
  long pushforward_samples = 5000;
  std::map<std::string, double> tolerances;  // by suite name
};

struct Suite;
using SuiteRun = std::function<CheckReport(const Params&, const SuiteOptions&, double tolerance)>;

struct Suite {
  std::string name;
  std::string group;  // duality, orthogonality, reversibility, algebra, limits, symmetry, simulation
  std::string description;
  double tolerance = 1e-9;
  double richardson_tolerance = 0;  // used instead of tolerance when the Richardson flag is on (0: unchanged)
  GridSpec default_grid;
  SuiteRun run;

  double tolerance_for(const SuiteOptions& opts) const;
};

const std::vector<Suite>& suites();
const Suite* find_suite(const std::string& name);

// Suite names that must be present: one per identity the library claims to check.
const std::vector<std::string>& identity_manifest();

// Marks a report as skipped because the point is outside the suite's regime.
CheckReport skipped_report(const std::string& suite, const Params& p, const std::string& reason);
bool is_skipped(const CheckReport& r);

// Runs one suite at one point; regime violations become skipped reports.
CheckReport run_suite(const Suite& suite, const Params& point, const SuiteOptions& opts);

// One report per (suite, point), suites in the given order, points in grid order.
std::vector<CheckReport> grid_sweep(const std::vector<std::string>& suite_names, const GridSpec& grid,
                                    const SuiteOptions& opts, int jobs);
// Same, each suite over its own default grid.
std::vector<CheckReport> default_sweep(const std::vector<std::string>& suite_names, const SuiteOptions& opts,
                                       int jobs);

// Per-suite aggregate of a sweep, in first-appearance order.
std::vector<CheckReport> summarize(const std::vector<CheckReport>& reports);

// Deterministic points in (lo, hi)^M from an additive recurrence.
std::vector<std::vector<double>> sample_points(int M, int count, double lo = 0.1, double hi = 2.0);

}  // namespace duality_lab
