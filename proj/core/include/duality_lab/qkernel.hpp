#pragma once

#include <duality_lab/scalar.hpp>

#include <sstream>
#include <vector>

namespace duality_lab {

inline constexpr double q1_threshold = 1e-12;

struct Termination {
  bool terminating = true;
  int N = 0;
  double tol = 0.0;

  static Termination at(int n) { return {true, n, 0.0}; }
  static Termination tolerance(double t) { return {false, 0, t}; }
};

template <class T>
struct SeriesSpec {
  std::vector<T> numerators;
  std::vector<T> denominators;
  T base = T(0);
  T argument = T(0);
  Termination termination;
  int max_terms = 100000;
};

template <class T>
T q_bracket(const T& a, const T& q) {
  using std::abs;
  using std::pow;
  if (abs(q - T(1)) <= T(q1_threshold)) return a;
  return (pow(q, a) - pow(q, -a)) / (q - T(1) / q);
}

template <class T>
T q_poch(const T& a, const T& q, int n) {
  T r = 1;
  T qj = 1;
  for (int j = 0; j < n; ++j) {
    r *= T(1) - a * qj;
    qj *= q;
  }
  return r;
}

// Truncated (a;q)_inf. Stops after factor m once |a| q^m < tol (1 - q).
template <class T>
T q_poch_inf(const T& a, const T& q, const T& tol = eps<T>()) {
  using std::abs;
  if (!(q > T(0) && q < T(1)))
    throw Error(ErrorKind::domain, "infinite product undefined for q >= 1");
  const T stop = tol * (T(1) - q);
  T r = 1;
  T t = a;
  for (int m = 0; m < 1000000; ++m) {
    if (abs(t) < stop) return r;
    r *= T(1) - t;
    if (r == T(0)) return r;
    t *= q;
  }
  throw Error(ErrorKind::non_convergent, "q_poch_inf: more than 1e6 factors");
}

namespace detail {

template <class T>
bool vanishes(const T& factor, const T& scale) {
  using std::abs;
  T s = abs(scale) > T(1) ? abs(scale) : T(1);
  return abs(factor) <= T(64) * eps<T>() * s;
}

template <class T>
std::string describe(const T& b, int j) {
  std::ostringstream os;
  os.precision(17);
  os << "vanished denominator Pochhammer: parameter " << to_double(b) << " at index "
     << j;
  return os.str();
}

}  // namespace detail

// Basic hypergeometric series r+1 phi r with the given base.
template <class T>
T phi_series(const SeriesSpec<T>& s) {
  using std::abs;
  const int last = s.termination.terminating ? s.termination.N : s.max_terms;
  T sum = 0;
  T term = 1;
  T bj = 1;  // base^j
  int small = 0;
  for (int j = 0; j <= last; ++j) {
    sum += term;
    if (!s.termination.terminating) {
      if (abs(term) < T(s.termination.tol) * abs(sum)) {
        if (++small >= 3) return sum;
      } else {
        small = 0;
      }
    }
    if (j == last) break;
    T num = s.argument;
    for (const auto& a : s.numerators) num *= T(1) - a * bj;
    if (num == T(0)) return sum;
    T den = T(1) - s.base * bj;
    for (const auto& b : s.denominators) {
      T f = T(1) - b * bj;
      if (detail::vanishes(f, b * bj)) throw Error(ErrorKind::vanished_denominator, detail::describe(b, j));
      den *= f;
    }
    term *= num / den;
    bj *= s.base;
  }
  if (s.termination.terminating) return sum;
  throw Error(ErrorKind::non_convergent, "phi_series: max_terms reached before tolerance");
}

// (a;q)_inf / (b;q)_inf as a single product. Near q = 1 both products are tiny
// while their ratio is not.
template <class T>
T q_poch_inf_ratio(const T& a, const T& b, const T& q, const T& tol = eps<T>()) {
  using std::abs;
  if (!(q > T(0) && q < T(1)))
    throw Error(ErrorKind::domain, "infinite product undefined for q >= 1");
  const T stop = tol * (T(1) - q);
  T r = 1;
  T ta = a;
  T tb = b;
  for (int m = 0; m < 10000000; ++m) {
    if (abs(ta) < stop && abs(tb) < stop) return r;
    const T den = T(1) - tb;
    if (detail::vanishes(den, T(1))) throw Error(ErrorKind::domain, "q_poch_inf_ratio: vanishing factor");
    r *= (T(1) - ta) / den;
    ta *= q;
    tb *= q;
  }
  throw Error(ErrorKind::non_convergent, "q_poch_inf_ratio: more than 1e7 factors");
}

// Rising factorial (a)_n.
template <class T>
T rising(const T& a, int n) {
  T r = 1;
  for (int j = 0; j < n; ++j) r *= a + T(j);
  return r;
}

// Generalized hypergeometric series r+1 F r.
template <class T>
T f_series(const std::vector<T>& numerators, const std::vector<T>& denominators, const T& z,
           Termination termination, int max_terms = 100000) {
  using std::abs;
  const int last = termination.terminating ? termination.N : max_terms;
  T sum = 0;
  T term = 1;
  int small = 0;
  for (int j = 0; j <= last; ++j) {
    sum += term;
    if (!termination.terminating) {
      if (abs(term) < T(termination.tol) * abs(sum)) {
        if (++small >= 3) return sum;
      } else {
        small = 0;
      }
    }
    if (j == last) break;
    T num = z;
    for (const auto& a : numerators) num *= a + T(j);
    if (num == T(0)) return sum;
    T den = T(j + 1);
    for (const auto& b : denominators) {
      T f = b + T(j);
      if (detail::vanishes(f, b)) throw Error(ErrorKind::vanished_denominator, detail::describe(b, j));
      den *= f;
    }
    term *= num / den;
  }
  if (termination.terminating) return sum;
  throw Error(ErrorKind::non_convergent, "f_series: max_terms reached before tolerance");
}

// Poles at alpha = 0, -1, -2, ... The two products are taken as one ratio since
// each underflows on its own as q -> 1.
template <class T>
T q_gamma(const T& alpha, const T& q) {
  using std::abs;
  using std::pow;
  using std::round;
  if (alpha <= T(0) && abs(alpha - round(alpha)) <= T(64) * eps<T>() * (T(1) + abs(alpha)))
    throw Error(ErrorKind::domain, "q_gamma: pole");
  return q_poch_inf_ratio(q, pow(q, alpha), q) * pow(T(1) - q, T(1) - alpha);
}

template <class T>
T mu_rho(const T& rho, const T& q) {
  using std::pow;
  return (pow(q, rho) + pow(q, -rho)) / (T(1) / q - q);
}

}  // namespace duality_lab
