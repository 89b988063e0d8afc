#include <duality_lab/qkernel.hpp>

#include <doctest.h>

#include <cmath>

using namespace duality_lab;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

// (q;q)_inf by Euler's pentagonal number theorem, independent of the product.
double euler_qq(double q) {
  double s = 1;
  for (int k = 1; k < 200; ++k) {
    const double sg = k % 2 ? -1.0 : 1.0;
    s += sg * (std::pow(q, k * (3.0 * k - 1) / 2) + std::pow(q, k * (3.0 * k + 1) / 2));
  }
  return s;
}

double long_product(double a, double q) {
  double r = 1;
  for (int j = 0; j < 5000; ++j) r *= 1 - a * std::pow(q, j);
  return r;
}

}  // namespace

TEST_CASE("q_bracket values") {
  CHECK(q_bracket(1.0, 0.5) == doctest::Approx(1.0));
  CHECK(q_bracket(0.0, 0.7) == 0.0);
  CHECK(q_bracket(2.0, 0.5) == doctest::Approx(2.5));
  CHECK(q_bracket(3.7, 1.0) == 3.7);
}

TEST_CASE("q_bracket tends to a as q -> 1") {
  for (double a : {0.5, 2.0, 7.5}) {
    double prev_c = 0;
    for (double e : {1e-4, 1e-5}) {
      const double c = std::abs(q_bracket(a, 1 + e) - a) / e;
      CHECK(c < 10 * (1 + a * a * a));
      if (prev_c > 0) CHECK(c <= prev_c * 1.5 + 1e-3);
      prev_c = c;
    }
  }
}

TEST_CASE("q_poch values and splitting") {
  CHECK(q_poch(3.0, 0.5, 0) == 1.0);
  CHECK(q_poch(1.0, 0.5, 2) == 0.0);
  CHECK(q_poch(0.5, 0.5, 2) == doctest::Approx(0.375));
  for (double a : {0.3, -1.7, 2.2})
    for (double q : {0.3, 0.8, 1.6})
      for (int m = 0; m <= 8; ++m)
        for (int n = 0; n <= 8 - m; ++n)
          CHECK(rel(q_poch(a, q, m + n), q_poch(a, q, m) * q_poch(a * std::pow(q, m), q, n)) < 1e-12);
}

TEST_CASE("q_poch base inversion") {
  // (a; q^-2)_n = (-a)^n q^{-n(n-1)} (1/a; q^2)_n
  for (double a : {0.4, -2.5, 3.0})
    for (double q : {0.5, 0.9})
      for (int n = 0; n <= 8; ++n) {
        const double lhs = q_poch(a, 1 / (q * q), n);
        const double rhs = std::pow(-a, n) * std::pow(q, -n * (n - 1.0)) * q_poch(1 / a, q * q, n);
        CHECK(rel(lhs, rhs) < 1e-12);
      }
}

TEST_CASE("q_poch_inf against independent oracles") {
  CHECK(q_poch_inf(0.0, 0.5) == 1.0);
  CHECK(q_poch_inf(1.0, 0.5) == 0.0);
  CHECK(rel(q_poch_inf(0.5, 0.5), long_product(0.5, 0.5)) < 1e-14);
  CHECK(q_poch_inf(0.5, 0.5) == doctest::Approx(0.288788).epsilon(1e-5));
  // The pentagonal sum cancels down to (q;q)_inf, so it is only a sharp oracle for small q.
  for (double q : {0.1, 0.3, 0.5}) CHECK(rel(q_poch_inf(q, q), euler_qq(q)) < 1e-12);
  CHECK(rel(q_poch_inf(0.99, 0.99), long_product(0.99, 0.99)) < 1e-12);
  // shifting the start of the product
  for (double a : {0.7, -3.0})
    for (int m : {1, 4, 9}) {
      const double q = 0.6;
      CHECK(rel(q_poch_inf(a, q) / q_poch(a, q, m), q_poch_inf(a * std::pow(q, m), q)) < 1e-13);
    }
  CHECK_THROWS_AS(q_poch_inf(0.5, 1.0), Error);
  CHECK_THROWS_AS(q_poch_inf(0.5, 1.5), Error);
}

TEST_CASE("q_poch_inf_ratio matches the quotient") {
  for (double q : {0.3, 0.95})
    CHECK(rel(q_poch_inf_ratio(0.2, -0.7, q), q_poch_inf(0.2, q) / q_poch_inf(-0.7, q)) < 1e-13);
}

TEST_CASE("phi_series examples") {
  const double q = 0.5;
  SeriesSpec<double> s;
  s.numerators = {1.0, 0.3};
  s.denominators = {0.2};
  s.base = q;
  s.argument = 0.9;
  s.termination = Termination::at(5);
  CHECK(phi_series(s) == 1.0);

  // two-term 2phi1(q^-2, q^-2; q^{2k}; q^2, q^2) at k = 1
  SeriesSpec<double> t;
  t.numerators = {1 / (q * q), 1 / (q * q)};
  t.denominators = {q * q};
  t.base = q * q;
  t.argument = q * q;
  t.termination = Termination::at(1);
  CHECK(phi_series(t) == doctest::Approx(5.0));
}

TEST_CASE("phi_series: q-binomial theorem in tolerance mode") {
  // 1phi0(a;-;q,z) = (az;q)_inf / (z;q)_inf
  for (double a : {0.3, -2.0})
    for (double z : {0.4, -0.6}) {
      SeriesSpec<hp> s;
      s.numerators = {hp(a)};
      s.base = hp(0.7);
      s.argument = hp(z);
      s.termination = Termination::tolerance(1e-33);
      const hp exact = q_poch_inf(hp(a) * hp(z), hp(0.7)) / q_poch_inf(hp(z), hp(0.7));
      CHECK(to_double(abs((phi_series(s) - exact) / exact)) < 1e-28);
    }
}

TEST_CASE("phi_series: q-Chu-Vandermonde and termination order") {
  // 2phi1(q^-n, b; c; q, q) = (c/b; q)_n / (c; q)_n b^n
  // Alternating terms of size q^{-n}: checked in float128.
  const hp qh = hp(0.6), b = hp(0.35), c = hp(-1.3);
  for (int n = 0; n <= 8; ++n) {
    SeriesSpec<hp> s;
    s.numerators = {pow(qh, -n), b};
    s.denominators = {c};
    s.base = qh;
    s.argument = qh;
    s.termination = Termination::at(n);
    const hp exact = q_poch(c / b, qh, n) / q_poch(c, qh, n) * pow(b, n);
    CHECK(to_double(abs((phi_series(s) - exact) / exact)) < 1e-24);
  }
  const double q = 0.6;
  // Two terminating numerators: the sum does not care which one stops it.
  for (int n = 0; n <= 4; ++n)
    for (int x = 0; x <= 4; ++x) {
      SeriesSpec<double> s;
      s.numerators = {std::pow(q, -2 * n), std::pow(q, -2 * x), 0.4};
      s.denominators = {0.7, -0.2};
      s.base = q * q;
      s.argument = q * q;
      s.termination = Termination::at(n);
      auto t = s;
      t.termination = Termination::at(x);
      std::swap(t.numerators[0], t.numerators[1]);
      CHECK(rel(phi_series(s), phi_series(t)) < 1e-12);
    }
}

TEST_CASE("phi_series errors") {
  SeriesSpec<double> s;
  s.numerators = {std::pow(0.5, -6)};
  s.denominators = {4.0};  // 1 - 4 q^2 = 0 at j = 2
  s.base = 0.5;
  s.argument = 1.0;
  s.termination = Termination::at(6);
  CHECK_THROWS_AS(phi_series(s), Error);
  try {
    phi_series(s);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::vanished_denominator);
  }
  SeriesSpec<double> d;
  d.numerators = {0.5};
  d.base = 0.5;
  d.argument = 3.0;  // diverges
  d.termination = Termination::tolerance(1e-15);
  d.max_terms = 200;
  try {
    phi_series(d);
    FAIL("expected non-convergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::non_convergent);
  }
}

TEST_CASE("f_series examples") {
  CHECK(f_series<double>({0.0, 2.0}, {3.0}, 0.5, Termination::at(4)) == 1.0);
  for (double b : {0.5, 3.0})
    for (double z : {0.3, -2.0}) {
      const double c = 1.7;
      CHECK(f_series<double>({-1.0, b}, {c}, z, Termination::at(1)) == doctest::Approx(1 - b * z / c));
    }
  CHECK(f_series<double>({0.0, 1.5, 2.0, 0.7}, {1.0, 2.0, 3.0}, 1.0, Termination::at(0)) == 1.0);
  // Chu-Vandermonde: 2F1(-n, b; c; 1) = (c - b)_n / (c)_n
  for (int n = 0; n <= 8; ++n)
    CHECK(rel(f_series<double>({double(-n), 0.4}, {2.3}, 1.0, Termination::at(n)), rising(1.9, n) / rising(2.3, n)) <
          1e-12);
}

TEST_CASE("q_gamma") {
  CHECK(q_gamma(1.0, 0.5) == doctest::Approx(1.0));
  // Direct product ratio (q;q)_inf / (q^2;q)_inf (1-q)^{-1} = 1.
  const double q = 0.5;
  const double oracle = long_product(q, q) / long_product(q * q, q) * std::pow(1 - q, -1.0);
  CHECK(rel(q_gamma(2.0, q), oracle) < 1e-14);
  CHECK(q_gamma(2.0, q) == doctest::Approx(1.0));
  // functional equation Gamma_q(x+1) = (1-q^x)/(1-q) Gamma_q(x)
  for (double x : {0.3, 1.7, 4.2})
    for (double qq : {0.2, 0.8})
      CHECK(rel(q_gamma(x + 1, qq), (1 - std::pow(qq, x)) / (1 - qq) * q_gamma(x, qq)) < 1e-13);
  // q -> 1: Gamma_{q^2}(3) = 1 + q^2 approaches Gamma(3) = 2 at rate 2 (1 - q).
  for (double qq : {0.999, 0.9999}) {
    const double g = q_gamma(3.0, qq * qq);
    CHECK(rel(g, 1 + qq * qq) < 1e-10);
    CHECK(std::abs(g - 2.0) <= 2.0 * (1 - qq) * 1.01);
  }
  CHECK_THROWS_AS(q_gamma(-1.0, 0.5), Error);
}

TEST_CASE("mu_rho") {
  CHECK(mu_rho(0.0, 0.5) == doctest::Approx(2.0 / 1.5));
  CHECK(mu_rho(1.0, 0.5) == doctest::Approx(2.5 / 1.5));
  for (double r : {0.3, -2.2, 5.0}) CHECK(mu_rho(r, 0.7) == doctest::Approx(mu_rho(-r, 0.7)));
}
