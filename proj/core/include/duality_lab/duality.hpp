#pragma once

#include <duality_lab/qkernel.hpp>
#include <duality_lab/scalar.hpp>

#include <optional>
#include <string>
#include <vector>

namespace duality_lab {

enum class BoundaryTag { none, left, right, both };

template <class T>
struct ModelParams {
  T q = T(0.5);
  std::vector<T> k;
  std::optional<T> lambda;
  std::optional<T> rho;
  std::optional<T> v;
  std::optional<T> sigma;

  int sites() const { return static_cast<int>(k.size()); }
  T k_total() const { return total(k); }
  BoundaryTag boundary() const {
    if (lambda && rho) return BoundaryTag::both;
    if (lambda) return BoundaryTag::left;
    if (rho) return BoundaryTag::right;
    return BoundaryTag::none;
  }

  template <class U>
  ModelParams<U> as() const {
    ModelParams<U> p;
    p.q = U(q);
    for (const auto& x : k) p.k.push_back(U(x));
    if (lambda) p.lambda = U(*lambda);
    if (rho) p.rho = U(*rho);
    if (v) p.v = U(*v);
    if (sigma) p.sigma = U(*sigma);
    return p;
  }

  // Validates q, k and v/sigma when present. Throws Error(domain).
  void validate() const;
  const T& need_lambda() const;
  const T& need_rho() const;
  const T& need_v() const;
  const T& need_sigma() const;
};

using Params = ModelParams<double>;

enum class DualityKind {
  P_R,
  P_L,
  P_AW,
  P_BigQJacobi,
  P_QMeixner,
  P_BigQLaguerre,
  D_triangular,
  D_qqinv,
  P_Wilson,
  P_JacobiHat,
  P_Laguerre,
  P_Monomial,
  P_Bessel,
  D_prime,
  D_AB_S,
  D_B_S,
};

enum class MeasureKind { W_asip, W_L, W_R, W_hat_L, W_hat_R, mu_BEP, mu_ABEP_L };

enum class OmegaKind { AW, J, Jprime, M };

enum class Family { ASC, AW, BigQJacobi, QMeixner, BigQLaguerre, Wilson, JacobiHat };

const char* to_string(DualityKind kind);
const char* to_string(MeasureKind kind);
bool is_continuous(DualityKind kind);

// h^-_j for j = 0..M; entry 0 is lambda.
template <class T>
std::vector<T> height_minus(const Config& zeta, const std::vector<T>& k, const T& lambda);
// h^+_j for j = 1..M+1 stored at index j; entry 0 is unused.
template <class T>
std::vector<T> height_plus(const Config& xi, const std::vector<T>& k, const T& rho);

template <class T>
T height_minus_at(const Config& zeta, const ModelParams<T>& p, int j);
template <class T>
T height_plus_at(const Config& xi, const ModelParams<T>& p, int j);

template <class T>
T u_factor(const Config& eta, const std::vector<T>& k);
// Gauge factor u_j(k) = q^{k_j/2 - sum_{l<=j} k_l} of the single-site representation (0-based j).
template <class T>
T u_gauge(const std::vector<T>& k, int j, const T& q);

// One-site functions.
template <class T>
T p_asc(int n, int x, const T& rho, const T& k, const T& q);
template <class T>
T p_aw(int y, int x, const T& lambda, const T& rho, const T& v, const T& k, const T& q);
template <class T>
T p_big_q_jacobi(int n, int x, const T& lambda, const T& rho, const T& v, const T& k, const T& q);
template <class T>
T p_q_meixner(int n, int x, const T& lambda, const T& rho, const T& v, const T& k, const T& q);
template <class T>
T p_big_q_laguerre(int n, int x, const T& lambda, const T& rho, const T& v, const T& k, const T& q);
template <class T>
T p_wilson(int y, int x, const T& lambda, const T& rho, const T& v, const T& k);
// Jacobi one-site factor V^xi 2F1(-xi, xi + h + k; k; -y / V).
template <class T>
T p_jacobi_hat(int xi, const T& y, const T& V, const T& h, const T& k);

// Family dispatch. For ASC: (n, x, a = rho). AW, Jacobi, Meixner, Laguerre,
// Wilson: (n = y, x, a = lambda, b = rho). JacobiHat: (n = xi, x = y, a = V, b = h).
template <class T>
T one_site_poly(Family family, int n, const T& x, const T& a, const T& b,
                const std::optional<T>& v, const T& k, const T& q);

// Discrete-discrete duality functions. Argument order follows the table:
// P_R(eta, xi), P_L(eta, zeta), P_AW(zeta, xi), P_BigQJacobi(eta, xi), ...
template <class T>
T duality_value(DualityKind kind, const Config& left, const Config& right, const ModelParams<T>& p);

// Continuous-discrete duality functions: P_JacobiHat(y, xi), P_Laguerre(y, xi),
// P_Monomial / D_B_S(x, eta), D_prime(x, eta), D_AB_S(x, eta).
template <class T>
T duality_value(DualityKind kind, const std::vector<T>& x, const Config& right, const ModelParams<T>& p);

// Continuous-continuous: P_Bessel(x, y).
template <class T>
T bessel_duality(const std::vector<T>& x, const std::vector<T>& y, const ModelParams<T>& p);

// Measures.
template <class T>
T w_site(int n, const T& k, const T& q);
enum class WdynBranch { upper, lower };  // upper: a > -1, lower: a <= -1
template <class T>
T w_dyn(int z, const T& a, const T& k, const T& q, WdynBranch branch);
template <class T>
T w_hat_dyn(int z, const T& a, const T& k, WdynBranch branch);
// Branch used by W_L / W_R for a global boundary value.
template <class T>
WdynBranch branch_for(const T& boundary);

template <class T>
T measure_weight(MeasureKind kind, const Config& config, const ModelParams<T>& p);
template <class T>
T measure_weight(MeasureKind kind, const std::vector<T>& x, const ModelParams<T>& p);

struct RegimeFlags {
  bool restricted = false;           // boundary <= -1
  bool strict_threshold = false;     // boundary < -2
  bool borderline_site = false;      // some per-site height in (-1, 0) while restricted
};
template <class T>
RegimeFlags regime_flags(const Config& config, const std::vector<T>& k, const T& boundary, bool left);

// Omega correction factors.
template <class T>
T omega_aw(int y, int x, const T& lambda, const T& rho, const T& K, const T& v, const T& q);
template <class T>
T omega_factor(OmegaKind kind, int total_left, int total_right, const ModelParams<T>& p);

// Partial energies E^-_j = sum_{i<=j} x_i (j = 0..M) and E^+_j = sum_{i>=j} x_i (j = 1..M+1).
template <class T>
std::vector<T> energy_minus(const std::vector<T>& x);
template <class T>
std::vector<T> energy_plus(const std::vector<T>& x);

template <class T>
std::vector<T> g_transform(const std::vector<T>& x, const T& sigma, const T& lambda);
template <class T>
std::vector<T> g_inverse(const std::vector<T>& y, const T& sigma, const T& lambda);
// |det Dg(x)| in closed form.
template <class T>
T g_jacobian(const std::vector<T>& x, const T& sigma, const T& lambda);

}  // namespace duality_lab
