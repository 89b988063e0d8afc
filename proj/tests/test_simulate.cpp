#include <duality_lab/simulate.hpp>

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace duality_lab;

namespace {

Params point(std::vector<double> k) {
  Params p;
  p.q = 0.5;
  p.k = std::move(k);
  return p;
}

}  // namespace

TEST_CASE("streams are reproducible and distinct") {
  auto a = make_stream(42, 3), b = make_stream(42, 3), c = make_stream(42, 4), d = make_stream(43, 3);
  const auto x = a();
  CHECK(x == b());
  CHECK(x != c());
  CHECK(x != d());
}

TEST_CASE("gillespie: determinism and conservation") {
  const ProcessSpec<double> spec{ProcessKind::ASIP, point({0.8, 1.2, 0.5})};
  const auto t1 = gillespie_trajectory(spec, {3, 0, 2}, 2.0, 99, 5);
  const auto t2 = gillespie_trajectory(spec, {3, 0, 2}, 2.0, 99, 5);
  CHECK(t1.times == t2.times);
  CHECK(t1.states == t2.states);
  REQUIRE(t1.states.size() > 1);
  for (std::size_t i = 0; i < t1.states.size(); ++i) {
    CHECK(total(t1.states[i]) == 5);
    if (i) CHECK(t1.times[i] > t1.times[i - 1]);
  }
  const auto still = gillespie_trajectory(spec, {0, 0, 0}, 2.0, 1);
  for (const auto& s : still.states) CHECK(s == Config{0, 0, 0});
}

TEST_CASE("euler-maruyama: conservation and absorbing zero") {
  auto p = point({1, 1});
  p.sigma = 0.5;
  p.lambda = 0.5;
  const ProcessSpec<double> spec{ProcessKind::ABEP_L, p};
  const auto tr = euler_maruyama_trajectory(spec, {1.0, 0.7}, 0.5, 1e-3, 7);
  for (const auto& x : tr.states) {
    CHECK(std::abs(x[0] + x[1] - 1.7) < 1e-12);
    CHECK(x[0] >= 0);
    CHECK(x[1] >= 0);
  }
  const auto again = euler_maruyama_trajectory(spec, {1.0, 0.7}, 0.5, 1e-3, 7);
  CHECK(again.states == tr.states);
  const ProcessSpec<double> bep{ProcessKind::BEP, point({1, 1})};
  const auto z = euler_maruyama_trajectory(bep, {0.0, 0.0}, 0.2, 1e-3, 1);
  for (const auto& x : z.states) CHECK(x == RealConfig{0.0, 0.0});
}

TEST_CASE("BEP mean is constant in time") {
  const ProcessSpec<double> bep{ProcessKind::BEP, point({1, 1})};
  const auto samples = parallel_samples(4000, 5, 2, [&](long, Rng& rng) {
    return euler_maruyama_state_at(bep, {1.0, 1.0}, 0.5, 1e-3, rng)[0];
  });
  const auto e = estimate(samples);
  CHECK(std::abs(e.mean - 1.0) < 3 * e.stderr_);
}

TEST_CASE("parallel samples do not depend on the job count") {
  const ProcessSpec<double> spec{ProcessKind::ASIP, point({0.8, 1.2})};
  auto f = [&](long, Rng& rng) { return static_cast<double>(gillespie_state_at(spec, {2, 1}, 0.4, rng)[0]); };
  CHECK(parallel_samples(300, 17, 1, f) == parallel_samples(300, 17, 4, f));
}

TEST_CASE("estimate") {
  const auto e = estimate({1, 2, 3, 4});
  CHECK(e.mean == doctest::Approx(2.5));
  CHECK(e.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0) / 2));
  CHECK(e.n_samples == 4);
}

TEST_CASE("slice sampler") {
  const ProcessSpec<double> spec{ProcessKind::ASIP, point({0.8, 1.2})};
  const SliceSampler zero(spec, MeasureKind::W_asip, 0);
  REQUIRE(zero.states().size() == 1);
  CHECK(zero.probabilities()[0] == 1.0);
  const SliceSampler s(spec, MeasureKind::W_asip, 3);
  double sum = 0;
  for (double p : s.probabilities()) sum += p;
  CHECK(sum == doctest::Approx(1.0));
  auto rng = make_stream(1, 0);
  std::vector<long> counts(s.states().size());
  for (int i = 0; i < 20000; ++i) ++counts[s.index_of(s.draw(rng))];
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double expect = 20000 * s.probabilities()[i];
    CHECK(std::abs(counts[i] - expect) < 5 * std::sqrt(expect) + 1);
  }
  // restricted regime: every state respects the guard
  auto pl = point({1, 1});
  pl.lambda = -10;
  const ProcessSpec<double> L{ProcessKind::ASIP_L, pl};
  const SliceSampler r(L, MeasureKind::W_L, 2);
  for (const auto& c : r.states()) CHECK(state_space_contains(L, c));
}

TEST_CASE("mc duality at t = 0 is exact") {
  Params p = point({0.8, 1.2});
  p.rho = 0.5;
  const auto pair = make_duality_pair(DualityKind::P_R, p);
  const auto r = mc_duality_check(pair, {2, 1}, {1, 1}, 0.0, 50, 3);
  CHECK(r.left.mean == doctest::Approx(duality_value(DualityKind::P_R, Config{2, 1}, Config{1, 1}, p)));
  CHECK(r.left.stderr_ == 0.0);
  CHECK(r.right.stderr_ == 0.0);
}

TEST_CASE("pushforward from zero") {
  PushforwardOptions o;
  o.n_samples = 50;
  const auto r = g_pushforward_check({0.0, 0.0}, 0.5, 0.5, {1, 1}, o, 1);
  CHECK(r.pass);
  CHECK(r.max_abs == 0.0);
}

TEST_CASE("trajectory csv") {
  Trajectory<Config> t;
  t.times = {0, 0.5};
  t.states = {{1, 0}, {0, 1}};
  std::ostringstream os;
  write_csv(os, t);
  CHECK(os.str() == "t,site_1,site_2\n0,1,0\n0.5,0,1\n");
}

TEST_CASE("invalid initial states are rejected") {
  auto pl = point({1, 1});
  pl.lambda = -10;
  CHECK_THROWS_AS(gillespie_trajectory({ProcessKind::ASIP_L, pl}, {3, 1}, 1.0, 1), Error);
}
