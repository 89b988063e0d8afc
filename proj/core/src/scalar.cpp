#include <duality_lab/scalar.hpp>

#include <cstdio>
#include <algorithm>
#include <cstdlib>
#include <functional>

namespace duality_lab {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::vanished_denominator: return "vanished-denominator";
    case ErrorKind::non_convergent: return "non-convergent";
    case ErrorKind::invalid_state: return "invalid-state";
    case ErrorKind::kind_mismatch: return "kind-mismatch";
    case ErrorKind::regime_violation: return "regime-violation";
    case ErrorKind::index_out_of_range: return "index-out-of-range";
    case ErrorKind::dt_collapse: return "dt-collapse";
    case ErrorKind::slice_too_large: return "slice-too-large";
    case ErrorKind::rank_deficient: return "rank-deficient";
    case ErrorKind::config: return "config";
  }
  return "unknown";
}

std::vector<Config> enumerate_slice(int M, int n) {
  std::vector<Config> out;
  if (M <= 0 || n < 0) return out;
  Config c(M, 0);
  std::function<void(int, int)> rec = [&](int site, int left) {
    if (site == M - 1) {
      c[site] = left;
      out.push_back(c);
      return;
    }
    for (int a = left; a >= 0; --a) {
      c[site] = a;
      rec(site + 1, left - a);
    }
  };
  rec(0, n);
  return out;
}

std::vector<Config> enumerate_states(int M, int max_total, int min_total) {
  std::vector<Config> out;
  for (int n = std::max(0, min_total); n <= max_total; ++n) {
    auto s = enumerate_slice(M, n);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

std::string format_config(const Config& c) {
  std::string s = "(";
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(c[i]);
  }
  return s + ")";
}

std::string format_real(double x) {
  // Shortest representation that round-trips.
  char buf[32];
  for (int p = 1; p <= 17; ++p) {
    std::snprintf(buf, sizeof buf, "%.*g", p, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

std::string format_reals(const std::vector<double>& x) {
  std::string s = "(";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) s += ",";
    s += format_real(x[i]);
  }
  return s + ")";
}

}  // namespace duality_lab
