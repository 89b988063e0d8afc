#pragma once

#include <duality_lab/duality.hpp>
#include <duality_lab/process.hpp>
#include <duality_lab/report.hpp>
#include <duality_lab/scalar.hpp>

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace duality_lab {

// "q=0.5 k=(1,1) rho=0.3" style summary of a parameter point.
std::string describe(const Params& p);
template <class T>
std::string describe(const ModelParams<T>& p) {
  return describe(p.template as<double>());
}

// Two processes and a function D(left, right) intertwining their generators.
template <class T>
struct DualityPair {
  ProcessSpec<T> left_spec;
  ProcessSpec<T> right_spec;
  DualityKind kind = DualityKind::P_R;
  std::optional<T> v;

  // Parameters passed to the duality function: q and k of the left process,
  // boundaries and sigma from whichever side carries them, v from the pair.
  ModelParams<T> function_params() const;
  // Checks that kind fits the two process kinds. Throws Error(kind_mismatch).
  void validate() const;
};

// The process pair a duality function belongs to, both sides built from p
// (the right side at 1/q for the q <-> 1/q dualities).
template <class T>
DualityPair<T> make_duality_pair(DualityKind kind, const ModelParams<T>& p);

struct DualityOptions {
  double tolerance = 1e-9;
  StencilOptions stencil;  // diffusion sides only
};

// Discrete left and right sides.
template <class T>
CheckReport duality_residual(const DualityPair<T>& pair, const std::vector<Config>& left_states,
                             const std::vector<Config>& right_states, const DualityOptions& opts);
// Diffusion left side, discrete right side.
template <class T>
CheckReport duality_residual(const DualityPair<T>& pair, const std::vector<std::vector<T>>& left_points,
                             const std::vector<Config>& right_states, const DualityOptions& opts);
// BEP self-duality through the Bessel function: [L B(., y)](x) = [L B(x, .)](y).
template <class T>
CheckReport bessel_duality_residual(const ModelParams<T>& p, const std::vector<std::vector<T>>& xs,
                                    const std::vector<std::vector<T>>& ys, const DualityOptions& opts);
// [L_BEP f](g(x)) = [L_ABEP_L (f o g)](x) for every monomial f of degree <= 2.
template <class T>
CheckReport g_intertwining_residual(const ModelParams<T>& p, const std::vector<std::vector<T>>& xs,
                                    const DualityOptions& opts);

// Largest |mu(a) r(a -> b) - mu(b) r(b -> a)| / max(|mu(a) r(a -> b)|, |mu(b) r(b -> a)|) over edges leaving
// the given states. Measures are tiny far from the origin, so the floor of 1 is not applied here.
template <class T>
CheckReport detailed_balance_residual(const ProcessSpec<T>& spec, MeasureKind measure,
                                      const std::vector<Config>& states, double tolerance);

// mu_L(x) against mu_BEP(g(x)) |J_g(x)| 2^{-M} e^{sum g(x)} pointwise.
template <class T>
CheckReport mu_l_pushforward_residual(const ModelParams<T>& p, const std::vector<std::vector<T>>& xs,
                                      double tolerance);
// d_j(A_j mu_L) = B_j mu_L along every bond, by finite differences.
template <class T>
CheckReport mu_l_symmetry_residual(const ModelParams<T>& p, const std::vector<std::vector<T>>& xs,
                                   const DualityOptions& opts);

// <L f, g>_W = <f, L g>_W slice by slice for f, g among P_L(., zeta) and P_R(., xi).
template <class T>
CheckReport generator_symmetry_residual(const ModelParams<T>& p, int max_total, double tolerance);

enum class Relation {
  orth_asc_qinv,
  dualorth_asc_qinv,
  dualorth_asc_q,
  P_L_both,
  P_R,
  AW_bi_L,
  AW_bi_R,
  bigqjacobi,
  bigqinvjacobi,
  qmeixner,
};

const char* to_string(Relation r);
std::optional<Relation> relation_from_string(const std::string& s);

struct OrthogonalityOptions {
  double tail_tol = 1e-13;     // slice mass relative to the running sum that counts as negligible
  int quiet_slices = 5;        // consecutive negligible slices before stopping
  long max_terms = 100000;
  double tolerance = 1e-6;     // diagonal relative and off-diagonal absolute
  double tail_bound_tol = 1e-10;
};

// Index pairs are configurations on params.sites() sites; the one-site relations
// take params.k of length 1. Normalized so that the diagonal target is 1.
template <class T>
CheckReport orthogonality_residual(Relation relation, const ModelParams<T>& p,
                                   const std::vector<std::pair<Config, Config>>& index_pairs,
                                   const OrthogonalityOptions& opts);

// Largest |v| for which the eta-sum below converges: min_j q^{2 xi_j + k_j + h^+_{j+1} - h^-_{j-1} - 1}.
template <class T>
T aw_scalar_product_v_bound(const ModelParams<T>& p, const Config& zeta, const Config& xi);
// (v q^{-2|xi|-|k|+lambda-rho+1}; q^2)_inf / (v q^{2|zeta|+|k|+lambda-rho+1}; q^2)_inf
// times sum_eta v^{|eta|} P_L(eta, zeta) P_R(eta, xi) W(eta), against P_AW^v(zeta, xi).
template <class T>
CheckReport aw_scalar_product_residual(const ModelParams<T>& p, const std::vector<std::pair<Config, Config>>& pairs,
                                       const OrthogonalityOptions& opts);

// Grid of parameter points. Empty lists leave the field unset.
struct GridSpec {
  std::vector<double> q;
  std::vector<std::vector<double>> k;
  std::vector<double> lambda;
  std::vector<double> rho;
  std::vector<double> v;
  std::vector<double> sigma;

  std::vector<Params> points() const;  // cartesian product in declaration order
  bool empty() const { return q.empty() || k.empty(); }
};

// Identities checked over a parameter list: rate invariances, P_AW symmetries,
// particle-hole, sigma-inversion, sinh/exp forms of the coefficients.
CheckReport symmetry_checks(const std::vector<Params>& grid, int max_total = 3);
enum class LimitGroup : unsigned {
  boundary_rates = 1u << 0,  // dynamic rates -> ASIP(q^{+-1})
  measure = 1u << 1,         // W_L -> W as lambda -> infinity
  q_to_one = 1u << 2,        // w_dyn -> w_hat_dyn
  degenerations = 1u << 3,   // P_AW -> P_BigQJacobi -> P_QMeixner
  eps_scaling = 1u << 4,     // ASIP_L rates -> ABEP_L coefficients
  pl_to_dprime = 1u << 5,    // scaled P_L -> D'
  abep = 1u << 6,            // ABEP_L -> ABEP(+-sigma), ABEP_L -> BEP_L
};
inline constexpr unsigned all_limit_groups = (1u << 7) - 1;

// Finite surrogates for the limits; errors must shrink at the claimed order.
// An empty result (no parts) fails, so select groups the grid points can feed.
CheckReport limit_checks(const std::vector<Params>& grid, unsigned groups = all_limit_groups);

// Empirical convergence order from errors at a geometric sequence of step sizes.
std::vector<double> empirical_orders(const std::vector<double>& steps, const std::vector<double>& errors);

// One row of the epsilon-scaling study at a point x: errors of eps^2 C^{L,+}, eps^2 C^{L,-}
// against A_j and of eps (C^{L,-} - C^{L,+}) against B_j, maximized over bonds.
struct ScalingErrors {
  double eps = 0;
  double plus = 0;
  double minus = 0;
  double drift = 0;
};
std::vector<ScalingErrors> eps_scaling_errors(const std::vector<hp>& x, const std::vector<hp>& k, const hp& sigma,
                                              const hp& lambda, const std::vector<double>& eps_values);

CheckReport merge_reports(const std::string& suite, const std::vector<CheckReport>& parts);

// Runs tasks on `jobs` threads; results come back in input order.
std::vector<CheckReport> run_parallel(const std::vector<std::function<CheckReport()>>& tasks, int jobs);

}  // namespace duality_lab
