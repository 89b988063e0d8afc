#include <duality_lab/simulate.hpp>

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <ostream>
#include <thread>

namespace duality_lab {

Rng make_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x5eedu};
  return Rng(seq);
}

MCEstimate estimate(const std::vector<double>& samples) {
  MCEstimate e;
  e.n_samples = static_cast<long>(samples.size());
  if (samples.empty()) return e;
  // Welford: a constant sample gives its value and a zero stderr exactly.
  double mean = 0, m2 = 0, n = 0;
  for (double s : samples) {
    n += 1;
    const double d = s - mean;
    mean += d / n;
    m2 += d * (s - mean);
  }
  e.mean = mean;
  if (samples.size() >= 2) e.stderr_ = std::sqrt(m2 / (n - 1) / n);
  return e;
}

namespace {

// Calls f(i, stream_i) for every i; each worker owns a contiguous block so the
// result only depends on (seed, i).
template <class R>
std::vector<R> run_samples(long n, std::uint64_t seed, int jobs, const std::function<R(long, Rng&)>& f) {
  std::vector<R> out(static_cast<std::size_t>(std::max(0L, n)));
  auto one = [&](long i) {
    Rng rng = make_stream(seed, static_cast<std::uint64_t>(i));
    out[static_cast<std::size_t>(i)] = f(i, rng);
  };
  jobs = static_cast<int>(std::max(1L, std::min<long>(jobs, n)));
  if (jobs == 1) {
    for (long i = 0; i < n; ++i) one(i);
    return out;
  }
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (long i = next++; i < n && !failed; i = next++) {
        try {
          one(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

const Jump<double>& pick(const JumpList<double>& jumps, double u) {
  for (const auto& j : jumps) {
    if (u < j.rate) return j;
    u -= j.rate;
  }
  return jumps.back();
}

// One Gillespie step; false when the state is absorbing or the next jump falls after horizon.
bool gillespie_step(const ProcessSpec<double>& spec, Config& state, double& t, double horizon, Rng& rng) {
  const auto jumps = jump_rates(spec, state);
  double total_rate = 0;
  for (const auto& j : jumps) {
    if (j.rate < 0)
      throw Error(ErrorKind::invalid_state, "negative rate " + format_real(j.rate) + " out of " + format_config(state));
    total_rate += j.rate;
  }
  if (total_rate <= 0) return false;
  const double tau = std::exponential_distribution<double>(total_rate)(rng);
  if (t + tau > horizon) return false;
  t += tau;
  const double u = std::uniform_real_distribution<double>(0.0, total_rate)(rng);
  state = pick(jumps, u).target;
  return true;
}

void check_initial(const ProcessSpec<double>& spec, const Config& c) {
  if (!state_space_contains(spec, c))
    throw Error(ErrorKind::invalid_state,
                "invalid initial state " + format_config(c) + " for " + to_string(spec.kind));
}

void check_initial(const ProcessSpec<double>& spec, const RealConfig& x) {
  if (!state_space_contains(spec, x))
    throw Error(ErrorKind::invalid_state, "invalid initial state " + format_reals(x) + " for " + to_string(spec.kind));
}

// Euler-Maruyama step of length h; empty when the proposal leaves the state space.
std::optional<RealConfig> em_propose(const ProcessSpec<double>& spec, const RealConfig& x, double h, Rng& rng) {
  const auto c = diffusion_coefficients(spec, x);
  std::normal_distribution<double> normal;
  RealConfig y = x;
  for (std::size_t j = 0; j + 1 < x.size(); ++j) {
    const double d = c.B[j] * h + std::sqrt(std::max(0.0, 2.0 * c.A[j] * h)) * normal(rng);
    y[j] += d;
    y[j + 1] -= d;
  }
  for (double e : y)
    if (!(e >= 0.0)) return std::nullopt;
  if (!state_space_contains(spec, y)) return std::nullopt;
  return y;
}

// Advances x by one outer step of at most dt; returns the time actually advanced.
double em_step(const ProcessSpec<double>& spec, RealConfig& x, double dt, Rng& rng) {
  double h = dt;
  for (int halvings = 0; halvings <= 40; ++halvings, h *= 0.5) {
    if (auto y = em_propose(spec, x, h, rng)) {
      x = std::move(*y);
      return h;
    }
  }
  throw Error(ErrorKind::dt_collapse, "dt collapse at " + format_reals(x) + " after 40 halvings of " + format_real(dt));
}

}  // namespace

std::vector<double> parallel_samples(long n, std::uint64_t seed, int jobs,
                                     const std::function<double(long, Rng&)>& f) {
  return run_samples<double>(n, seed, jobs, f);
}

Trajectory<Config> gillespie_trajectory(const ProcessSpec<double>& spec, const Config& initial, double horizon,
                                        std::uint64_t seed, std::uint64_t index) {
  check_initial(spec, initial);
  Trajectory<Config> tr;
  tr.seed = seed;
  tr.index = index;
  tr.spec = spec;
  Rng rng = make_stream(seed, index);
  Config state = initial;
  double t = 0;
  tr.times.push_back(t);
  tr.states.push_back(state);
  while (gillespie_step(spec, state, t, horizon, rng)) {
    tr.times.push_back(t);
    tr.states.push_back(state);
  }
  return tr;
}

Config gillespie_state_at(const ProcessSpec<double>& spec, const Config& initial, double t, Rng& rng) {
  check_initial(spec, initial);
  Config state = initial;
  double now = 0;
  while (gillespie_step(spec, state, now, t, rng)) {
  }
  return state;
}

Trajectory<RealConfig> euler_maruyama_trajectory(const ProcessSpec<double>& spec, const RealConfig& initial,
                                                 double horizon, double dt, std::uint64_t seed,
                                                 std::uint64_t index) {
  if (!(dt > 0)) throw Error(ErrorKind::domain, "dt must be positive");
  check_initial(spec, initial);
  Trajectory<RealConfig> tr;
  tr.seed = seed;
  tr.index = index;
  tr.spec = spec;
  Rng rng = make_stream(seed, index);
  RealConfig x = initial;
  double t = 0;
  tr.times.push_back(t);
  tr.states.push_back(x);
  while (t < horizon) {
    t += em_step(spec, x, std::min(dt, horizon - t), rng);
    tr.times.push_back(t);
    tr.states.push_back(x);
  }
  return tr;
}

RealConfig euler_maruyama_state_at(const ProcessSpec<double>& spec, const RealConfig& initial, double t, double dt,
                                   Rng& rng) {
  if (!(dt > 0)) throw Error(ErrorKind::domain, "dt must be positive");
  check_initial(spec, initial);
  RealConfig x = initial;
  double now = 0;
  while (now < t) now += em_step(spec, x, std::min(dt, t - now), rng);
  return x;
}

SliceSampler::SliceSampler(const ProcessSpec<double>& spec, MeasureKind measure, int total_particles) {
  const int M = spec.params.sites();
  // Number of compositions of n into M parts, checked before enumerating.
  double count = 1;
  for (int i = 1; i < M; ++i) count = count * (total_particles + i) / i;
  if (count > static_cast<double>(max_states))
    throw Error(ErrorKind::slice_too_large, "slice has " + format_real(count) + " states (limit 1e6)");
  std::vector<double> w;
  for (const auto& c : enumerate_slice(M, total_particles)) {
    if (!state_space_contains(spec, c)) continue;
    states_.push_back(c);
    w.push_back(measure_weight(measure, c, spec.params));
  }
  if (states_.empty()) throw Error(ErrorKind::invalid_state, "no valid state with this particle number");
  // A reversible measure has one sign on a connected slice; fold it out.
  const bool negative = w.front() < 0;
  double sum = 0;
  for (double& x : w) {
    if ((x < 0) != negative || !std::isfinite(x))
      throw Error(ErrorKind::domain, "measure weights change sign or are not finite on the slice");
    x = std::abs(x);
    sum += x;
  }
  double acc = 0;
  for (double x : w) {
    prob_.push_back(x / sum);
    acc += x / sum;
    cdf_.push_back(acc);
  }
  cdf_.back() = 1.0;
}

Config SliceSampler::draw(Rng& rng) const {
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return states_[std::min<std::size_t>(it - cdf_.begin(), states_.size() - 1)];
}

std::size_t SliceSampler::index_of(const Config& c) const {
  const auto it = std::find(states_.begin(), states_.end(), c);
  if (it == states_.end()) throw Error(ErrorKind::invalid_state, "state not in slice: " + format_config(c));
  return static_cast<std::size_t>(it - states_.begin());
}

Config sample_reversible(const ProcessSpec<double>& spec, MeasureKind measure, int total_particles,
                         std::uint64_t seed, std::uint64_t index) {
  Rng rng = make_stream(seed, index);
  return SliceSampler(spec, measure, total_particles).draw(rng);
}

double MCDualityResult::z_ratio() const {
  const double s = 3.0 * (left.stderr_ + right.stderr_);
  const double d = std::abs(left.mean - right.mean);
  if (s == 0) return d == 0 ? 0.0 : INFINITY;
  return d / s;
}

MCDualityResult mc_duality_check(const DualityPair<double>& pair, const Config& eta0, const Config& xi0, double t,
                                 long n_samples, std::uint64_t seed, int jobs) {
  pair.validate();
  if (!is_discrete(pair.left_spec.kind) || !is_discrete(pair.right_spec.kind))
    throw Error(ErrorKind::kind_mismatch, "mc_duality_check needs two discrete processes");
  check_initial(pair.left_spec, eta0);
  check_initial(pair.right_spec, xi0);
  const auto fp = pair.function_params();
  MCDualityResult r;
  // Separate stream families for the two sides.
  r.left = estimate(run_samples<double>(n_samples, seed, jobs, [&](long, Rng& rng) {
    return duality_value(pair.kind, gillespie_state_at(pair.left_spec, eta0, t, rng), xi0, fp);
  }));
  r.right = estimate(run_samples<double>(n_samples, seed ^ 0x9e3779b97f4a7c15ull, jobs, [&](long, Rng& rng) {
    return duality_value(pair.kind, eta0, gillespie_state_at(pair.right_spec, xi0, t, rng), fp);
  }));
  return r;
}

CheckReport g_pushforward_check(const RealConfig& x0, double sigma, double lambda, const std::vector<double>& k,
                                const PushforwardOptions& opts, std::uint64_t seed) {
  if (!(lambda >= 0)) throw Error(ErrorKind::regime_violation, "regime violation: g-pushforward needs lambda >= 0");
  const int M = static_cast<int>(k.size());
  Params pa;
  pa.k = k;
  pa.sigma = sigma;
  pa.lambda = lambda;
  Params pb;
  pb.k = k;
  const ProcessSpec<double> abep{ProcessKind::ABEP_L, pa}, bep{ProcessKind::BEP, pb};
  const RealConfig z0 = g_transform(x0, sigma, lambda);

  // Per sample: y_1..y_M then y_1^2..y_M^2.
  auto moments = [M](const RealConfig& y) {
    std::vector<double> m(2 * M);
    for (int j = 0; j < M; ++j) {
      m[j] = y[j];
      m[M + j] = y[j] * y[j];
    }
    return m;
  };
  using Vec = std::vector<double>;
  const auto a = run_samples<Vec>(opts.n_samples, seed, opts.jobs, [&](long, Rng& rng) {
    return moments(g_transform(euler_maruyama_state_at(abep, x0, opts.horizon, opts.dt, rng), sigma, lambda));
  });
  const auto b = run_samples<Vec>(opts.n_samples, seed ^ 0x9e3779b97f4a7c15ull, opts.jobs, [&](long, Rng& rng) {
    return moments(euler_maruyama_state_at(bep, z0, opts.horizon, opts.dt, rng));
  });

  Residuals res;
  for (int m = 0; m < 2 * M; ++m) {
    Vec sa, sb;
    for (const auto& s : a) sa.push_back(s[m]);
    for (const auto& s : b) sb.push_back(s[m]);
    const auto ea = estimate(sa), eb = estimate(sb);
    const double allowance = 3.0 * std::hypot(ea.stderr_, eb.stderr_) +
                             opts.bias_per_dt * opts.dt * (1.0 + std::max(std::abs(ea.mean), std::abs(eb.mean)));
    const double d = std::abs(ea.mean - eb.mean);
    const std::string what = (m < M ? "E[y_" : "E[y_^2 ") + std::to_string(m % M + 1) + "] g(ABEP_L)=" +
                             format_real(ea.mean) + "+-" + format_real(ea.stderr_) + " BEP=" + format_real(eb.mean) +
                             "+-" + format_real(eb.stderr_);
    res.record(d, allowance > 0 ? d / allowance : (d == 0 ? 0.0 : INFINITY), what);
  }
  auto r = res.report("g-pushforward", "x0=" + format_reals(x0) + " sigma=" + format_real(sigma) +
                                           " lambda=" + format_real(lambda) + " k=" + format_reals(k),
                      1.0);
  // Conservation: |g(x)| depends on |x| alone, and both processes conserve their totals.
  const double g_total = total(z0);
  r.notes.push_back("max_rel is |difference| / (3 sigma + bias allowance); pass below 1");
  r.notes.push_back("|g(x0)| = " + format_real(g_total));
  return r;
}

CheckReport stationarity_check(const ProcessSpec<double>& spec, MeasureKind measure, int total_particles,
                               const StationarityOptions& opts, std::uint64_t seed) {
  const SliceSampler sampler(spec, measure, total_particles);
  const auto idx = run_samples<double>(opts.n_samples, seed, opts.jobs, [&](long, Rng& rng) {
    const Config start = sampler.draw(rng);
    return static_cast<double>(sampler.index_of(gillespie_state_at(spec, start, opts.t, rng)));
  });
  const auto& prob = sampler.probabilities();
  std::vector<double> observed(prob.size(), 0.0);
  for (double i : idx) observed[static_cast<std::size_t>(i)] += 1;
  const double n = static_cast<double>(opts.n_samples);

  // Pool states with expected count below 5 into one bin.
  double chi2 = 0, pooled_obs = 0, pooled_exp = 0;
  int bins = 0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const double e = prob[i] * n;
    if (e < 5) {
      pooled_obs += observed[i];
      pooled_exp += e;
      continue;
    }
    chi2 += (observed[i] - e) * (observed[i] - e) / e;
    ++bins;
  }
  if (pooled_exp > 0) {
    chi2 += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++bins;
  }
  CheckReport r;
  r.suite = "stationarity";
  r.params = std::string(to_string(spec.kind)) + " " + describe(spec.params) +
             " n=" + std::to_string(total_particles) + " t=" + format_real(opts.t);
  r.n_cases = opts.n_samples;
  double p = 1.0;
  if (bins > 1) p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(bins - 1), chi2));
  // Reported as 1 - p against 1 - p_min so that smaller is better.
  r.max_rel = 1.0 - p;
  r.max_abs = chi2;
  r.tolerance = 1.0 - opts.p_min;
  r.pass = p > opts.p_min;
  r.worst_case = "chi2=" + format_real(chi2) + " dof=" + std::to_string(std::max(0, bins - 1)) + " p=" + format_real(p);
  r.notes.push_back(std::to_string(prob.size()) + " states, " + std::to_string(bins) + " bins");
  return r;
}

namespace {

template <class State>
void write_rows(std::ostream& os, const Trajectory<State>& traj) {
  const std::size_t M = traj.states.empty() ? traj.spec.params.k.size() : traj.states.front().size();
  os << "t";
  for (std::size_t j = 1; j <= M; ++j) os << ",site_" << j;
  os << "\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    os << format_real(traj.times[i]);
    for (const auto& e : traj.states[i]) os << "," << format_real(static_cast<double>(e));
    os << "\n";
  }
}

}  // namespace

void write_csv(std::ostream& os, const Trajectory<Config>& traj) { write_rows(os, traj); }
void write_csv(std::ostream& os, const Trajectory<RealConfig>& traj) { write_rows(os, traj); }

}  // namespace duality_lab
