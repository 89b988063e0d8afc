#pragma once

#include <duality_lab/scalar.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace duality_lab {

struct CheckReport {
  std::string suite;
  std::string params;
  long n_cases = 0;
  double max_abs = 0.0;
  double max_rel = 0.0;
  std::string worst_case;
  bool pass = false;
  double tolerance = 0.0;
  std::optional<double> tail_bound;
  std::vector<std::string> flags;
  std::vector<std::string> errors;
  std::vector<std::string> notes;
};

// Accumulates residuals with the max(|lhs|, |rhs|, 1) normalization.
class Residuals {
 public:
  template <class T>
  void add(const T& lhs, const T& rhs, const std::string& what) {
    using std::abs;
    const T d = abs(lhs - rhs);
    const T scale = std::max({abs(lhs), abs(rhs), T(1)});
    record(to_double(d), to_double(d / scale), what);
  }

  // Pre-normalized residual.
  void record(double abs_res, double rel_res, const std::string& what) {
    ++n_;
    if (!std::isfinite(abs_res) || !std::isfinite(rel_res)) {
      abs_res = rel_res = INFINITY;
    }
    max_abs_ = std::max(max_abs_, abs_res);
    if (rel_res > max_rel_ || worst_.empty()) {
      if (rel_res >= max_rel_) {
        max_rel_ = rel_res;
        worst_ = what;
      }
    }
  }

  void error(const std::string& what) { errors_.push_back(what); }

  long count() const { return n_; }
  double max_rel() const { return max_rel_; }
  double max_abs() const { return max_abs_; }

  CheckReport report(const std::string& suite, const std::string& params, double tolerance) const {
    CheckReport r;
    r.suite = suite;
    r.params = params;
    r.n_cases = n_;
    r.max_abs = max_abs_;
    r.max_rel = max_rel_;
    r.worst_case = worst_;
    r.tolerance = tolerance;
    r.errors = errors_;
    r.pass = n_ > 0 && errors_.empty() && max_rel_ < tolerance;
    return r;
  }

 private:
  long n_ = 0;
  double max_abs_ = 0.0;
  double max_rel_ = 0.0;
  std::string worst_;
  std::vector<std::string> errors_;
};

// Combines several reports of one suite into one.
CheckReport merge_reports(const std::string& suite, const std::vector<CheckReport>& parts);

}  // namespace duality_lab
