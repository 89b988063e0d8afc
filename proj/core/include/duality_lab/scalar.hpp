#pragma once

#include <boost/multiprecision/float128.hpp>

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace duality_lab {

// Quad precision (113-bit mantissa, ~33 significant digits).
using hp = boost::multiprecision::float128;

enum class Precision { standard, high };

enum class ErrorKind {
  domain,
  vanished_denominator,
  non_convergent,
  invalid_state,
  kind_mismatch,
  regime_violation,
  index_out_of_range,
  dt_collapse,
  slice_too_large,
  rank_deficient,
  config,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Occupation vector of a discrete configuration.
using Config = std::vector<int>;
// Energy vector of a continuous configuration.
using RealConfig = std::vector<double>;

template <class T>
inline T eps() {
  return std::numeric_limits<T>::epsilon();
}

template <class T>
inline double to_double(const T& x) {
  return static_cast<double>(x);
}

template <class T>
inline std::vector<T> convert(const std::vector<double>& v) {
  std::vector<T> out;
  out.reserve(v.size());
  for (double x : v) out.push_back(T(x));
  return out;
}

inline int total(const Config& eta) {
  int s = 0;
  for (int e : eta) s += e;
  return s;
}

template <class T>
inline T total(const std::vector<T>& x) {
  T s = 0;
  for (const auto& e : x) s += e;
  return s;
}

inline Config reversed(Config c) {
  return Config(c.rbegin(), c.rend());
}

template <class T>
inline std::vector<T> reversed(const std::vector<T>& c) {
  return std::vector<T>(c.rbegin(), c.rend());
}

// Moves one particle from site `from` to site `to`.
inline Config moved(Config c, int from, int to) {
  --c[from];
  ++c[to];
  return c;
}

// All configurations on M sites with total in [min_total, max_total].
std::vector<Config> enumerate_states(int M, int max_total, int min_total = 0);
// All configurations on M sites with total exactly n.
std::vector<Config> enumerate_slice(int M, int n);

std::string format_config(const Config& c);
std::string format_real(double x);
std::string format_reals(const std::vector<double>& x);

}  // namespace duality_lab
