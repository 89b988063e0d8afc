#pragma once

#include <duality_lab/process.hpp>
#include <duality_lab/report.hpp>
#include <duality_lab/scalar.hpp>
#include <duality_lab/verify.hpp>

#include <cstdint>
#include <iosfwd>
#include <random>
#include <utility>
#include <vector>

namespace duality_lab {

using Rng = std::mt19937_64;

// Independent stream for trajectory `index` of a run seeded with `seed`.
Rng make_stream(std::uint64_t seed, std::uint64_t index);

template <class State>
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  ProcessSpec<double> spec;
};

struct MCEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample standard deviation / sqrt(n)
  long n_samples = 0;
};

MCEstimate estimate(const std::vector<double>& samples);

// Exact jump-chain simulation on [0, horizon].
Trajectory<Config> gillespie_trajectory(const ProcessSpec<double>& spec, const Config& initial, double horizon,
                                        std::uint64_t seed, std::uint64_t index = 0);
// State at time t only, drawing from rng.
Config gillespie_state_at(const ProcessSpec<double>& spec, const Config& initial, double t, Rng& rng);

// Euler-Maruyama along the bond directions e_j - e_{j+1}. A step that leaves the
// state space is redrawn with half the step, at most 40 times (then dt_collapse).
Trajectory<RealConfig> euler_maruyama_trajectory(const ProcessSpec<double>& spec, const RealConfig& initial,
                                                 double horizon, double dt, std::uint64_t seed,
                                                 std::uint64_t index = 0);
RealConfig euler_maruyama_state_at(const ProcessSpec<double>& spec, const RealConfig& initial, double t, double dt,
                                   Rng& rng);

// Exact sampler for a reversible measure restricted to {|eta| = n}.
class SliceSampler {
 public:
  static constexpr std::size_t max_states = 1000000;

  SliceSampler(const ProcessSpec<double>& spec, MeasureKind measure, int total_particles);

  Config draw(Rng& rng) const;
  const std::vector<Config>& states() const { return states_; }
  const std::vector<double>& probabilities() const { return prob_; }
  std::size_t index_of(const Config& c) const;

 private:
  std::vector<Config> states_;
  std::vector<double> prob_;
  std::vector<double> cdf_;
};

Config sample_reversible(const ProcessSpec<double>& spec, MeasureKind measure, int total_particles,
                         std::uint64_t seed, std::uint64_t index = 0);

struct MCDualityResult {
  MCEstimate left;   // E_{eta0}[D(eta_t, xi0)]
  MCEstimate right;  // E_{xi0}[D(eta0, xi_t)]
  // |mean_left - mean_right| / (3 (stderr_left + stderr_right)); the check passes below 1.
  double z_ratio() const;
};

MCDualityResult mc_duality_check(const DualityPair<double>& pair, const Config& eta0, const Config& xi0, double t,
                                 long n_samples, std::uint64_t seed, int jobs = 1);

// Moments of g(ABEP_L at horizon) against BEP started from g(x0): means and
// second moments per site must agree within 3 sigma plus bias_per_dt * dt * (1 + |moment|).
struct PushforwardOptions {
  double horizon = 0.5;
  double dt = 1e-3;
  long n_samples = 5000;
  double bias_per_dt = 10.0;
  int jobs = 1;
};
CheckReport g_pushforward_check(const RealConfig& x0, double sigma, double lambda, const std::vector<double>& k,
                                const PushforwardOptions& opts, std::uint64_t seed);

// Start from the reversible measure on the slice, run to time t, chi-square the
// empirical distribution against the weights. Passes when p > p_min.
struct StationarityOptions {
  double t = 1.0;
  long n_samples = 100000;
  double p_min = 1e-3;
  int jobs = 1;
};
CheckReport stationarity_check(const ProcessSpec<double>& spec, MeasureKind measure, int total_particles,
                               const StationarityOptions& opts, std::uint64_t seed);

// Runs f(i, rng_i) for i in [0, n) with rng_i = make_stream(seed, i); results in index order.
std::vector<double> parallel_samples(long n, std::uint64_t seed, int jobs,
                                     const std::function<double(long, Rng&)>& f);

// CSV with columns t, site_1..site_M.
void write_csv(std::ostream& os, const Trajectory<Config>& traj);
void write_csv(std::ostream& os, const Trajectory<RealConfig>& traj);

}  // namespace duality_lab
