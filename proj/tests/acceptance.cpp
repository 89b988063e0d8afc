// Acceptance run: one line per criterion with the worst residual and the wall time.
// Exit status 0 iff every criterion passes.

#include <duality_lab/registry.hpp>
#include <duality_lab/simulate.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <thread>

using namespace duality_lab;

namespace {

struct Outcome {
  bool pass = true;
  double max_rel = 0;
  double tolerance = 0;
  long cases = 0;
  long points = 0;
  long skipped = 0;
  std::vector<std::string> problems;

  void absorb(const CheckReport& r, double tol) {
    ++points;
    if (is_skipped(r)) {
      ++skipped;
      return;
    }
    cases += r.n_cases;
    if (r.max_rel / tol >= max_rel / std::max(tolerance, 1e-300) || tolerance == 0) {
      max_rel = r.max_rel;
      tolerance = tol;
    }
    if (!r.pass || !(r.max_rel < tol)) {
      pass = false;
      std::string why = r.suite + " [" + r.params + "] max_rel=" + format_real(r.max_rel) + ": " + r.worst_case;
      for (const auto& e : r.errors) why += "; " + e;
      problems.push_back(why);
    }
  }
  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      problems.push_back(what);
    }
  }
};

struct Criterion {
  int id;
  std::string title;
  double time_limit;  // seconds, 0 for none
  std::function<Outcome()> run;
};

int jobs = 1;

// Sample points as hp vectors.
std::vector<std::vector<hp>> convert_points(const std::vector<std::vector<double>>& xs) {
  std::vector<std::vector<hp>> out;
  for (const auto& x : xs) out.push_back(convert<hp>(x));
  return out;
}

// Random k vectors in (0.2, 2)^M, fixed seed.
std::vector<std::vector<double>> random_k(int M, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(0.2, 2.0);
  std::vector<std::vector<double>> out;
  for (int i = 0; i < count; ++i) {
    std::vector<double> k;
    for (int j = 0; j < M; ++j) k.push_back(d(rng));
    out.push_back(k);
  }
  return out;
}

double restricted(const std::vector<double>& k) {
  double s = 0;
  for (double x : k) s += x;
  return -(s + 6);
}

// Every discrete grid uses M in {2, 3}, two random k per M, both boundary regimes.
std::vector<GridSpec> discrete_grids(std::vector<double> q, bool lambda, bool rho, std::vector<double> v) {
  std::vector<GridSpec> out;
  for (int M : {2, 3})
    for (const auto& k : random_k(M, 2, 1000 + M)) {
      GridSpec g;
      g.q = q;
      g.k = {k};
      if (lambda) g.lambda = {0.5, restricted(k)};
      if (rho) g.rho = {0.5, restricted(k)};
      g.v = v;
      out.push_back(g);
    }
  return out;
}

void sweep(Outcome& o, const std::vector<std::string>& names, const std::vector<GridSpec>& grids,
           const SuiteOptions& opts, double tol) {
  for (const auto& g : grids)
    for (const auto& r : grid_sweep(names, g, opts, jobs)) o.absorb(r, tol);
}

void defaults(Outcome& o, const std::vector<std::string>& names, const SuiteOptions& opts) {
  for (const auto& r : default_sweep(names, opts, jobs)) o.absorb(r, find_suite(r.suite)->tolerance_for(opts));
}

SuiteOptions with_tol(SuiteOptions o, const std::vector<std::string>& names, double tol) {
  for (const auto& n : names) o.tolerances[n] = tol;
  return o;
}

Outcome criterion_1() {
  Outcome o;
  const std::vector<std::string> s{"asc-duality"};
  sweep(o, s, discrete_grids({0.4, 0.7}, false, true, {}), with_tol({}, s, 1e-9), 1e-9);
  return o;
}

Outcome criterion_2() {
  Outcome o;
  const std::vector<std::string> s{"aw-duality", "asip-l-duality"};
  const auto grids = discrete_grids({0.4, 0.7}, true, true, {0.3, 2.0});
  sweep(o, {"aw-duality"}, grids, with_tol({}, s, 1e-8), 1e-8);
  sweep(o, {"asip-l-duality"}, discrete_grids({0.4, 0.7}, true, false, {}), with_tol({}, s, 1e-8), 1e-8);
  return o;
}

CheckReport g_pushforward_run() {
  PushforwardOptions po;
  po.horizon = 0.5;
  po.dt = 1e-3;
  po.n_samples = 5000;
  po.jobs = jobs;
  return g_pushforward_check({1.0, 1.0}, 0.5, 0.5, {1.0, 1.0}, po, 20240601);
}

Outcome criterion_3() {
  Outcome o;
  for (int M : {2, 3})
    for (const auto& k : random_k(M, 2, 3000 + M))
      for (double q : {0.4, 0.7})
        for (double b : {0.5, restricted(k)}) {
          Params pd;
          pd.q = q;
          pd.k = k;
          pd.lambda = b;
          pd.rho = b;
          const auto p = pd.as<hp>();
          const auto S = enumerate_states(M, 3);
          for (auto [kind, m] :
               {std::pair{ProcessKind::ASIP, MeasureKind::W_asip}, {ProcessKind::ASIP_L, MeasureKind::W_L},
                {ProcessKind::ASIP_R, MeasureKind::W_R}, {ProcessKind::SIP_L, MeasureKind::W_hat_L}}) {
            if (kind == ProcessKind::ASIP && b != 0.5) continue;
            auto r = detailed_balance_residual(ProcessSpec<hp>{kind, p}, m, S, 1e-9);
            r.params = describe(pd) + " " + to_string(kind);
            o.absorb(r, 1e-9);
          }
        }
  // mu_L pointwise against the pushed-forward BEP measure.
  for (int M : {1, 2, 3})
    for (double lam : {0.5, 1.5}) {
      Params p;
      p.q = 0.5;
      p.k = random_k(M, 1, 3100 + M).front();
      p.lambda = lam;
      p.sigma = 0.7;
      o.absorb(mu_l_pushforward_residual(p.as<hp>(), convert_points(sample_points(M, 6)), 1e-10), 1e-10);
    }
  // Weak surrogate: the same pushforward run as criterion 8.
  const auto pf = g_pushforward_run();
  o.require(pf.pass, "g-pushforward moments: " + pf.worst_case);
  return o;
}

Outcome criterion_4() {
  Outcome o;
  SuiteOptions opts;
  opts.max_index = 4;
  const std::vector<std::string> s{"orth-asc-onesite", "orth-asc",          "aw-biorthogonality",
                                   "orth-bigqjacobi",  "orth-bigqinvjacobi", "orth-qmeixner"};
  for (const auto& r : default_sweep(s, with_tol(opts, s, 1e-6), jobs)) {
    o.absorb(r, 1e-6);
    if (!is_skipped(r))
      o.require(r.tail_bound && *r.tail_bound < 1e-10,
                r.suite + " [" + r.params + "] tail bound " + format_real(r.tail_bound.value_or(INFINITY)));
  }
  // Both mixed regimes of the biorthogonality must have run.
  std::set<std::string> ran;
  for (const auto& r : default_sweep({"aw-biorthogonality"}, opts, jobs))
    if (!is_skipped(r)) ran.insert(r.params);
  o.require(ran.size() >= 2, "aw-biorthogonality ran in fewer than two regimes");
  return o;
}

Outcome criterion_5() {
  Outcome o;
  const std::vector<std::string> s{"degenerate-duality", "triangular-duality"};
  sweep(o, s, discrete_grids({0.4, 0.7}, false, true, {0.3, 2.0}), with_tol({}, s, 1e-9), 1e-9);
  // P_AW -> P_J at lambda = 40, q = 0.5.
  GridSpec g;
  g.q = {0.5};
  g.k = {{0.8, 1.3}, {0.45, 1.1, 0.8}};
  g.rho = {0.3, -8.5};
  g.v = {0.3};
  for (const auto& r : grid_sweep({"degeneration-limits"}, g, SuiteOptions{}, jobs)) o.absorb(r, 1e-6);
  return o;
}

Outcome criterion_6() {
  Outcome o;
  SuiteOptions opts;
  opts.n_trunc = 14;
  const std::vector<std::string> s{"relations", "star", "coideal", "casimir-generator", "eigen",
                                   "casimir-decomposition", "nine-term", "casimir-transfer"};
  for (const auto& r : default_sweep(s, with_tol(opts, s, 1e-10), jobs)) o.absorb(r, 1e-10);
  for (const auto& r : default_sweep({"aw-summation"}, with_tol(opts, {"aw-summation"}, 1e-9), jobs))
    o.absorb(r, 1e-9);
  return o;
}

Outcome criterion_7() {
  Outcome o;
  const std::vector<std::string> s{"dynabep-duality", "bep-dualities"};
  SuiteOptions plain;
  for (const auto& r : default_sweep(s, with_tol(plain, s, 1e-5), jobs)) o.absorb(r, 1e-5);
  SuiteOptions rich;
  rich.richardson = true;
  for (const auto& r : default_sweep(s, with_tol(rich, s, 1e-7), jobs)) o.absorb(r, 1e-7);
  return o;
}

Outcome criterion_8() {
  Outcome o;
  for (const auto& r : default_sweep({"g-intertwining"}, with_tol({}, {"g-intertwining"}, 1e-5), jobs))
    o.absorb(r, 1e-5);
  o.absorb(g_pushforward_run(), 1.0);
  return o;
}

Outcome criterion_9() {
  Outcome o;
  defaults(o, {"eps-scaling"}, SuiteOptions{});
  return o;
}

Outcome criterion_10() {
  Outcome o;
  SuiteOptions opts;
  opts.mc_samples = 20000;
  opts.mc_time = 0.3;
  GridSpec g;
  g.q = {0.5};
  g.k = {{0.8, 1.2}};
  g.rho = {0.5, -8.0};
  g.v = {0.3};
  for (const auto& r : grid_sweep({"mc-duality"}, g, opts, jobs)) o.absorb(r, 1.0);
  opts.stationarity_samples = 100000;
  for (const auto& r : default_sweep({"stationarity"}, opts, jobs)) o.absorb(r, 1.0 - 1e-3);
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* s = std::getenv("DUALITY_LAB_JOBS")) jobs = std::max(1, std::atoi(s));
  else jobs = std::max(1u, std::thread::hardware_concurrency());
  std::set<int> only;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--jobs" && i + 1 < argc) jobs = std::max(1, std::atoi(argv[++i]));
    else only.insert(std::atoi(a.c_str()));
  }

  const std::vector<Criterion> criteria = {
      {1, "ASIP <-> ASIP_R duality, nested Al-Salam-Chihara", 30, criterion_1},
      {2, "ASIP_L <-> ASIP_R Askey-Wilson and ASIP <-> ASIP_L dualities", 0, criterion_2},
      {3, "reversibility: detailed balance, mu_L pointwise and pushforward", 0, criterion_3},
      {4, "orthogonality relations, index totals <= 4", 0, criterion_4},
      {5, "degenerate and triangular dualities, P_AW -> P_J at lambda = 40", 0, criterion_5},
      {6, "quantum algebra identities at n_trunc = 14", 60, criterion_6},
      {7, "diffusion dualities, plain and Richardson", 0, criterion_7},
      {8, "g-intertwining and g-pushforward moments", 120, criterion_8},
      {9, "eps-scaling of the dynamic rates, first order", 0, criterion_9},
      {10, "Monte-Carlo duality in expectation and stationarity", 0, criterion_10},
  };

  int passed = 0, ran = 0;
  const auto t_all = std::chrono::steady_clock::now();
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    ++ran;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.problems.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.cases == 0) o.require(false, "no case was evaluated");
    if (c.time_limit > 0) o.require(secs < c.time_limit, "runtime over " + format_real(c.time_limit) + " s");
    passed += o.pass ? 1 : 0;
    char line[512];
    std::snprintf(line, sizeof line, "C%-2d %s  %-66s max_rel=%-10.3g tol=%-8.3g cases=%-7ld points=%-3ld skipped=%-2ld %7.2fs",
                  c.id, o.pass ? "PASS" : "FAIL", c.title.c_str(), o.max_rel, o.tolerance, o.cases, o.points,
                  o.skipped, secs);
    std::cout << line;
    if (c.time_limit > 0) std::cout << " (limit " << c.time_limit << "s)";
    std::cout << "\n";
    for (std::size_t i = 0; i < o.problems.size() && i < 8; ++i) std::cout << "      " << o.problems[i] << "\n";
    std::cout.flush();
  }
  const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_all).count();
  std::cout << passed << "/" << ran << " criteria passed in " << format_real(std::round(total * 100) / 100)
            << " s (jobs=" << jobs << ")\n";
  return passed == ran ? 0 : 1;
}
