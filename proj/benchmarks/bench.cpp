#include <duality_lab/algebra.hpp>
#include <duality_lab/simulate.hpp>
#include <duality_lab/verify.hpp>

#include <benchmark/benchmark.h>

using namespace duality_lab;

namespace {

Params base(int M) {
  Params p;
  p.q = 0.5;
  p.k.assign(M, 0.9);
  p.lambda = 0.4;
  p.rho = -0.3;
  p.v = 0.3;
  return p;
}

void BM_q_poch_inf(benchmark::State& st) {
  double a = 0.3;
  for (auto _ : st) benchmark::DoNotOptimize(q_poch_inf(a, 0.9));
}
BENCHMARK(BM_q_poch_inf);

template <class T>
void BM_p_aw(benchmark::State& st) {
  const auto p = base(static_cast<int>(st.range(0))).as<T>();
  const Config z(p.k.size(), 2), x(p.k.size(), 1);
  for (auto _ : st) benchmark::DoNotOptimize(duality_value(DualityKind::P_AW, z, x, p));
}
BENCHMARK_TEMPLATE(BM_p_aw, double)->Arg(2)->Arg(3);
BENCHMARK_TEMPLATE(BM_p_aw, hp)->Arg(2)->Arg(3);

void BM_duality_residual_P_R(benchmark::State& st) {
  const auto p = base(static_cast<int>(st.range(0))).as<hp>();
  const auto pair = make_duality_pair(DualityKind::P_R, p);
  const auto S = enumerate_states(static_cast<int>(p.k.size()), 3);
  for (auto _ : st) benchmark::DoNotOptimize(duality_residual(pair, S, S, DualityOptions{}));
}
BENCHMARK(BM_duality_residual_P_R)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_casimir_matrix(benchmark::State& st) {
  const auto rep = make_pair_rep(base(2).as<hp>(), static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(rep_matrix(rep, coproduct(casimir(hp(0.5)))));
}
BENCHMARK(BM_casimir_matrix)->Arg(8)->Arg(14)->Unit(benchmark::kMillisecond);

void BM_gillespie(benchmark::State& st) {
  const ProcessSpec<double> spec{ProcessKind::ASIP, base(3)};
  std::uint64_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(gillespie_trajectory(spec, {3, 2, 1}, 1.0, 1, i++));
}
BENCHMARK(BM_gillespie);

void BM_euler_maruyama(benchmark::State& st) {
  Params p = base(2);
  p.lambda = 0.5;
  p.sigma = 0.5;
  const ProcessSpec<double> spec{ProcessKind::ABEP_L, p};
  std::uint64_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(euler_maruyama_trajectory(spec, {1.0, 1.0}, 0.5, 1e-3, 1, i++));
}
BENCHMARK(BM_euler_maruyama)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
