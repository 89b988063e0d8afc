#include <duality_lab/algebra.hpp>
#include <duality_lab/verify.hpp>

#include <doctest.h>

#include <random>

using namespace duality_lab;

namespace {

// Random parameter points for property tests, fixed seed.
std::vector<Params> random_points(int count, int M, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> kd(0.2, 2.0), qd(0.3, 0.8), bd(-1.0, 1.0), vd(0.2, 2.5);
  std::vector<Params> out;
  for (int i = 0; i < count; ++i) {
    Params p;
    p.q = qd(rng);
    for (int j = 0; j < M; ++j) p.k.push_back(kd(rng));
    // Either regime for each boundary.
    p.lambda = i % 2 ? bd(rng) : -(p.k_total() + 6 + bd(rng));
    p.rho = i % 3 ? bd(rng) : -(p.k_total() + 6 + bd(rng));
    p.v = vd(rng);
    out.push_back(p);
  }
  return out;
}

}  // namespace

TEST_CASE("property: discrete dualities on random points") {
  for (const auto& pd : random_points(4, 2, 7)) {
    const auto p = pd.as<hp>();
    for (auto kind : {DualityKind::P_R, DualityKind::P_L, DualityKind::P_AW}) {
      const auto pair = make_duality_pair(kind, p);
      std::vector<Config> left, right;
      for (const auto& c : enumerate_states(2, 2)) {
        if (state_space_contains(pair.left_spec, c)) left.push_back(c);
        if (state_space_contains(pair.right_spec, c)) right.push_back(c);
      }
      const auto r = duality_residual(pair, left, right, DualityOptions{1e-9, {}});
      INFO(to_string(kind), " ", describe(pd), " ", r.worst_case);
      CHECK(r.pass);
      CHECK(r.max_rel < 1e-9);
    }
  }
}

TEST_CASE("property: detailed balance on random points") {
  const auto S = enumerate_states(3, 3);
  for (const auto& pd : random_points(3, 3, 11)) {
    const auto p = pd.as<hp>();
    for (auto [kind, m] : {std::pair{ProcessKind::ASIP, MeasureKind::W_asip}, {ProcessKind::ASIP_L, MeasureKind::W_L},
                           {ProcessKind::ASIP_R, MeasureKind::W_R}}) {
      const auto r = detailed_balance_residual(ProcessSpec<hp>{kind, p}, m, S, 1e-9);
      INFO(to_string(kind), " ", describe(pd), " ", r.worst_case);
      CHECK(r.pass);
    }
  }
}

TEST_CASE("duality residual detects a wrong pairing") {
  // P_R is not a duality for ASIP <-> ASIP_L; the check must notice.
  Params pd;
  pd.q = 0.5;
  pd.k = {0.8, 1.2};
  pd.rho = 0.4;
  pd.lambda = 0.4;
  auto pair = make_duality_pair(DualityKind::P_R, pd.as<hp>());
  pair.right_spec.kind = ProcessKind::ASIP_L;
  const auto S = enumerate_states(2, 2);
  bool failed = false;
  try {
    failed = !duality_residual(pair, S, S, DualityOptions{}).pass;
  } catch (const Error&) {
    failed = true;  // kind mismatch is also a detection
  }
  CHECK(failed);
}

TEST_CASE("orthogonality: one-site and q-Meixner") {
  Params p;
  p.q = 0.5;
  p.k = {0.8};
  p.lambda = 0.3;
  p.rho = -6.1;
  OrthogonalityOptions o;
  std::vector<std::pair<Config, Config>> pairs;
  for (int i = 0; i <= 2; ++i)
    for (int j = 0; j <= 2; ++j) pairs.push_back({{i}, {j}});
  const auto r = orthogonality_residual(Relation::orth_asc_qinv, p, pairs, o);
  INFO(r.worst_case);
  CHECK(r.pass);
  REQUIRE(r.tail_bound);
  CHECK(*r.tail_bound < 1e-10);

  Params m;
  m.q = 0.5;
  m.k = {0.8, 1.2};
  m.v = 0.3;
  std::vector<std::pair<Config, Config>> mp;
  for (const auto& a : enumerate_states(2, 1))
    for (const auto& b : enumerate_states(2, 1)) mp.push_back({a, b});
  const auto rm = orthogonality_residual(Relation::qmeixner, m.as<hp>(), mp, o);
  INFO(rm.worst_case);
  CHECK(rm.pass);
}

TEST_CASE("aw scalar product rejects v outside the convergence disc") {
  Params p;
  p.q = 0.5;
  p.k = {0.8, 1.2};
  p.lambda = 0.5;
  p.rho = 0.3;
  const Config z{1, 0}, x{0, 1};
  const double bound = aw_scalar_product_v_bound(p, z, x);
  CHECK(bound > 0);
  p.v = 2 * bound;
  CHECK_THROWS_AS(aw_scalar_product_residual(p, {{z, x}}, OrthogonalityOptions{}), Error);
  p.v = bound / 10;
  CHECK(aw_scalar_product_residual(p, {{z, x}}, OrthogonalityOptions{}).pass);
}

TEST_CASE("verify is deterministic") {
  const auto pts = random_points(2, 2, 3);
  const auto a = symmetry_checks(pts, 2);
  const auto b = symmetry_checks(pts, 2);
  CHECK(a.max_rel == b.max_rel);
  CHECK(a.worst_case == b.worst_case);
  CHECK(a.n_cases == b.n_cases);
}

TEST_CASE("grid points are the cartesian product in order") {
  GridSpec g;
  g.q = {0.4, 0.7};
  g.k = {{1, 1}, {0.5, 0.5, 0.5}};
  g.rho = {0.5, -8};
  const auto pts = g.points();
  REQUIRE(pts.size() == 8);
  CHECK(pts[0].q == 0.4);
  CHECK(pts[0].rho == 0.5);
  CHECK(pts[1].rho == -8);
  CHECK(pts[7].q == 0.7);
  CHECK(GridSpec{}.points().empty());
}

TEST_CASE("algebra at small truncation") {
  Params pd;
  pd.q = 0.6;
  pd.k = {0.9, 1.7};
  const auto p = pd.as<hp>();
  const auto rep = make_pair_rep(p, 8);
  CHECK(check_relations(rep.left).pass);
  CHECK(check_star_structure(rep.left).pass);
  CHECK(check_coideal(rep, hp(0.3)).pass);
  CHECK(check_generator_equals_casimir(rep).pass);
  CHECK(check_asc_eigen(rep.left, 2, hp(0.3)).pass);
  // The nine-term expansion holds and its two coefficients are the ASIP_R rates times alpha_q.
  auto pr = p;
  pr.rho = hp(-9);
  const auto r = check_nine_term(pr, Config{1, 1});
  INFO(r.worst_case);
  CHECK(r.pass);
}
