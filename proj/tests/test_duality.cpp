#include <duality_lab/duality.hpp>
#include <duality_lab/process.hpp>
#include <duality_lab/verify.hpp>

#include <doctest.h>

#include <cmath>

using namespace duality_lab;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0}); }

double long_product(double a, double q) {
  double r = 1;
  for (int j = 0; j < 5000; ++j) r *= 1 - a * std::pow(q, j);
  return r;
}

std::vector<std::vector<double>> sample_points_for_tests() { return {{0.3}, {0.2, 1.4}, {1.1, 0.05, 0.6}}; }

Params point(double q, std::vector<double> k) {
  Params p;
  p.q = q;
  p.k = std::move(k);
  return p;
}

}  // namespace

TEST_CASE("heights") {
  const auto hm = height_minus<double>({1, 2}, {0.5, 0.5}, 0.3);
  CHECK(hm[0] == doctest::Approx(0.3));
  CHECK(hm[1] == doctest::Approx(2.8));
  CHECK(hm[2] == doctest::Approx(7.3));
  const auto hp = height_plus<double>({0, 1}, {1, 1}, 2.0);
  CHECK(hp[3] == doctest::Approx(2.0));
  CHECK(hp[2] == doctest::Approx(5.0));
  CHECK(hp[1] == doctest::Approx(6.0));
  // mirror: h^+_j(xi) = h^-_{M+1-j}(xi reversed)
  const Config xi{2, 0, 1};
  const std::vector<double> k{0.4, 1.3, 0.9};
  const auto p = height_plus<double>(xi, k, -1.5);
  const auto m = height_minus<double>(reversed(xi), reversed(k), -1.5);
  for (int j = 1; j <= 4; ++j) CHECK(p[j] == doctest::Approx(m[4 - j]));
  const auto z = height_minus<double>({0, 0, 0}, k, 0.7);
  CHECK(z[3] == doctest::Approx(0.7 + 0.4 + 1.3 + 0.9));
}

TEST_CASE("u_factor") {
  CHECK(u_factor<double>({0, 0}, {1, 2}) == 0.0);
  CHECK(u_factor<double>({3}, {1.5}) == doctest::Approx(4.5));
  CHECK(u_factor<double>({1, 1}, {1, 2}) == doctest::Approx(5.0));
}

TEST_CASE("one-site functions") {
  for (int x = 0; x <= 4; ++x) CHECK(p_asc(0, x, 0.3, 0.8, 0.5) == 1.0);
  CHECK(p_asc(2, 0, 0.3, 0.8, 0.5) == doctest::Approx(std::pow(0.5, -2.4)));
  CHECK(p_aw(0, 0, 0.3, -0.2, 0.7, 1.1, 0.5) == 1.0);
  CHECK(one_site_poly<double>(Family::ASC, 2, 0.0, 0.3, 0.0, std::nullopt, 0.8, 0.5) ==
        doctest::Approx(p_asc(2, 0, 0.3, 0.8, 0.5)));
}

TEST_CASE("P_R nesting against per-site evaluation") {
  auto p = point(0.5, {1, 1});
  p.rho = 0.2;
  CHECK(duality_value(DualityKind::P_R, Config{0, 0}, Config{2, 1}, p) == 1.0);
  // eta=(1,0), xi=(0,1): site one sees h^+_2 = rho + 2 + 1, u = 1.
  const double oracle = std::pow(0.5, -(2 * 3.2 + 1 + 1) / 2) * std::pow(0.5, -0.5);
  CHECK(rel(duality_value(DualityKind::P_R, Config{1, 0}, Config{0, 1}, p), oracle) < 1e-12);

  auto p3 = point(0.6, {0.7, 1.4, 0.5});
  p3.rho = -0.4;
  for (const auto& eta : enumerate_states(3, 3))
    for (const auto& xi : enumerate_states(3, 2)) {
      const auto h = height_plus(xi, p3.k, *p3.rho);
      double prod = std::pow(p3.q, -u_factor(eta, p3.k) / 2);
      for (int j = 0; j < 3; ++j) prod *= p_asc(eta[j], xi[j], h[j + 2], p3.k[j], p3.q);
      CHECK(rel(duality_value(DualityKind::P_R, eta, xi, p3), prod) < 1e-12);
    }
}

TEST_CASE("continuous dualities at zero") {
  auto p = point(0.5, {0.8, 1.2});
  p.sigma = 0.7;
  p.lambda = 0.5;
  CHECK(duality_value(DualityKind::D_B_S, std::vector<double>{0.3, 1.1}, Config{0, 0}, p) == doctest::Approx(1.0));
}

TEST_CASE("measure examples") {
  auto p = point(0.5, {0.8, 1.2});
  CHECK(measure_weight(MeasureKind::W_asip, Config{0, 0}, p) == doctest::Approx(1.0));
  for (double q : {0.3, 0.8}) CHECK(w_site(1, 1.0, q) == doctest::Approx(1.0));
  const double q = 0.5, a = 0.3, k = 1;
  const double oracle = long_product(std::pow(q, 2 * a + 2), q * q) / long_product(std::pow(q, 2 * a + 2 * k + 2), q * q);
  CHECK(rel(w_dyn(0, a, k, q, WdynBranch::upper), oracle) < 1e-13);
}

TEST_CASE("W_L of the reversed configuration is W_R") {
  for (double b : {0.5, -7.5}) {
    auto pl = point(0.6, {0.9, 0.4, 1.3});
    pl.lambda = b;
    auto pr = point(0.6, {1.3, 0.4, 0.9});
    pr.rho = b;
    for (const auto& xi : enumerate_states(3, 3)) {
      if (!state_space_contains(ProcessSpec<double>{ProcessKind::ASIP_R, pr}, xi)) continue;
      CHECK(rel(measure_weight(MeasureKind::W_L, reversed(xi), pl), measure_weight(MeasureKind::W_R, xi, pr)) < 1e-12);
    }
  }
}

TEST_CASE("omega_M at zero totals") {
  auto p = point(0.5, {0.8, 1.2});
  p.v = 0.3;
  const double q = 0.5, K = 2.0, v = 0.3;
  const double oracle = long_product(std::pow(q, K + 1) / v, q * q) / long_product(std::pow(q, -K + 1) / v, q * q);
  CHECK(rel(omega_factor(OmegaKind::M, 0, 0, p), oracle) < 1e-12);
}

TEST_CASE("telescoping product of the AW prefactors") {
  const double q = 0.5, v = 0.2, lam = 0.4, rho = -0.3;
  const std::vector<double> k{0.8, 1.1, 0.6};
  for (const auto& zeta : enumerate_states(3, 2))
    for (const auto& xi : enumerate_states(3, 2)) {
      const auto hm = height_minus(zeta, k, lam);
      const auto hp = height_plus(xi, k, rho);
      double lhs = 1;
      for (int j = 0; j < 3; ++j) {
        const double c = hm[j] - hp[j + 2];
        lhs *= q_poch_inf(v * std::pow(q, 2 * zeta[j] + c + k[j] + 1), q * q) /
               q_poch_inf(v * std::pow(q, -2 * xi[j] + c - k[j] + 1), q * q);
      }
      const double K = 2.5;
      const double rhs = q_poch_inf(v * std::pow(q, 2 * total(zeta) + K + lam - rho + 1), q * q) /
                         q_poch_inf(v * std::pow(q, -2 * total(xi) - K + lam - rho + 1), q * q);
      CHECK(rel(lhs, rhs) < 1e-10);
    }
}

TEST_CASE("g transform") {
  const double s = 0.7, lam = 0.5;
  CHECK(g_transform<double>({0, 0, 0}, s, lam) == std::vector<double>{0, 0, 0});
  CHECK(g_inverse<double>({0, 0}, s, lam) == std::vector<double>{0, 0});
  for (const auto& x : sample_points_for_tests()) {
    const auto y = g_transform(x, s, lam);
    const auto back = g_inverse(y, s, lam);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(back[i] - x[i]) < 1e-12);
    Params p = point(0.5, std::vector<double>(x.size(), 0.9));
    p.sigma = s;
    p.lambda = lam;
    for (const auto& eta : enumerate_states(static_cast<int>(x.size()), 3))
      CHECK(rel(duality_value(DualityKind::D_B_S, y, eta, p), duality_value(DualityKind::D_prime, x, eta, p)) < 1e-12);
  }
}

TEST_CASE("state space membership") {
  auto p = point(0.5, {1, 1});
  CHECK(state_space_contains(ProcessSpec<double>{ProcessKind::ASIP, p}, Config{7, 3}));
  p.lambda = -10;
  const ProcessSpec<double> L{ProcessKind::ASIP_L, p};
  CHECK(state_space_contains(L, Config{1, 1}));
  CHECK_FALSE(state_space_contains(L, Config{3, 1}));
}

TEST_CASE("jump rates") {
  auto p = point(0.5, {1, 1});
  const auto asip = jump_rates(ProcessSpec<double>{ProcessKind::ASIP, p}, Config{1, 0});
  REQUIRE(asip.size() == 1);
  CHECK(asip[0].from == 0);
  CHECK(asip[0].rate == doctest::Approx(0.5));
  const auto sip = jump_rates(ProcessSpec<double>{ProcessKind::SIP, p}, Config{1, 0});
  REQUIRE(sip.size() == 1);
  CHECK(sip[0].rate == doctest::Approx(1.0));
  for (const auto& j : jump_rates(ProcessSpec<double>{ProcessKind::ASIP, p}, Config{0, 0})) CHECK(j.rate == 0.0);
}

TEST_CASE("symmetry identities") {
  // Rate invariances, P_AW site reversal and (q, v) inversion, particle-hole, sigma inversion.
  Params p = point(0.6, {0.8, 1.3});
  p.lambda = 0.5;
  p.rho = -9;
  p.v = 0.3;
  p.sigma = 0.7;
  const auto r = symmetry_checks({p}, 2);
  INFO(r.worst_case);
  CHECK(r.pass);
  CHECK(r.max_rel < 1e-10);
}
