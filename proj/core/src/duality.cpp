#include <duality_lab/duality.hpp>

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <sstream>

namespace duality_lab {

const char* to_string(DualityKind kind) {
  switch (kind) {
    case DualityKind::P_R: return "P_R";
    case DualityKind::P_L: return "P_L";
    case DualityKind::P_AW: return "P_AW";
    case DualityKind::P_BigQJacobi: return "P_BigQJacobi";
    case DualityKind::P_QMeixner: return "P_QMeixner";
    case DualityKind::P_BigQLaguerre: return "P_BigQLaguerre";
    case DualityKind::D_triangular: return "D_triangular";
    case DualityKind::D_qqinv: return "D_qqinv";
    case DualityKind::P_Wilson: return "P_Wilson";
    case DualityKind::P_JacobiHat: return "P_JacobiHat";
    case DualityKind::P_Laguerre: return "P_Laguerre";
    case DualityKind::P_Monomial: return "P_Monomial";
    case DualityKind::P_Bessel: return "P_Bessel";
    case DualityKind::D_prime: return "D_prime";
    case DualityKind::D_AB_S: return "D_AB_S";
    case DualityKind::D_B_S: return "D_B_S";
  }
  return "?";
}

const char* to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::W_asip: return "W_asip";
    case MeasureKind::W_L: return "W_L";
    case MeasureKind::W_R: return "W_R";
    case MeasureKind::W_hat_L: return "W_hat_L";
    case MeasureKind::W_hat_R: return "W_hat_R";
    case MeasureKind::mu_BEP: return "mu_BEP";
    case MeasureKind::mu_ABEP_L: return "mu_ABEP_L";
  }
  return "?";
}

bool is_continuous(DualityKind kind) {
  switch (kind) {
    case DualityKind::P_JacobiHat:
    case DualityKind::P_Laguerre:
    case DualityKind::P_Monomial:
    case DualityKind::P_Bessel:
    case DualityKind::D_prime:
    case DualityKind::D_AB_S:
    case DualityKind::D_B_S:
      return true;
    default:
      return false;
  }
}

template <class T>
void ModelParams<T>::validate() const {
  if (!(q > T(0))) throw Error(ErrorKind::domain, "q must be positive");
  for (const auto& kj : k)
    if (!(kj > T(0))) throw Error(ErrorKind::domain, "site parameters k_j must be positive");
  if (v && *v == T(0)) throw Error(ErrorKind::domain, "v must be nonzero");
  if (sigma && *sigma == T(0)) throw Error(ErrorKind::domain, "sigma must be nonzero");
}

template <class T>
const T& ModelParams<T>::need_lambda() const {
  if (!lambda) throw Error(ErrorKind::kind_mismatch, "kind/param mismatch: lambda required");
  return *lambda;
}
template <class T>
const T& ModelParams<T>::need_rho() const {
  if (!rho) throw Error(ErrorKind::kind_mismatch, "kind/param mismatch: rho required");
  return *rho;
}
template <class T>
const T& ModelParams<T>::need_v() const {
  if (!v) throw Error(ErrorKind::kind_mismatch, "kind/param mismatch: v required");
  return *v;
}
template <class T>
const T& ModelParams<T>::need_sigma() const {
  if (!sigma) throw Error(ErrorKind::kind_mismatch, "kind/param mismatch: sigma required");
  return *sigma;
}

template <class T>
std::vector<T> height_minus(const Config& zeta, const std::vector<T>& k, const T& lambda) {
  const int M = static_cast<int>(zeta.size());
  std::vector<T> h(M + 1);
  h[0] = lambda;
  for (int j = 1; j <= M; ++j) h[j] = h[j - 1] + T(2 * zeta[j - 1]) + k[j - 1];
  return h;
}

template <class T>
std::vector<T> height_plus(const Config& xi, const std::vector<T>& k, const T& rho) {
  const int M = static_cast<int>(xi.size());
  std::vector<T> h(M + 2, T(0));
  h[M + 1] = rho;
  for (int j = M; j >= 1; --j) h[j] = h[j + 1] + T(2 * xi[j - 1]) + k[j - 1];
  return h;
}

template <class T>
T height_minus_at(const Config& zeta, const ModelParams<T>& p, int j) {
  if (j < 0 || j > static_cast<int>(zeta.size()))
    throw Error(ErrorKind::index_out_of_range, "height_minus: index out of range");
  return height_minus(zeta, p.k, p.need_lambda())[j];
}

template <class T>
T height_plus_at(const Config& xi, const ModelParams<T>& p, int j) {
  if (j < 1 || j > static_cast<int>(xi.size()) + 1)
    throw Error(ErrorKind::index_out_of_range, "height_plus: index out of range");
  return height_plus(xi, p.k, p.need_rho())[j];
}

template <class T>
T u_factor(const Config& eta, const std::vector<T>& k) {
  T u = 0;
  T prefix = 0;
  for (std::size_t j = 0; j < eta.size(); ++j) {
    u += T(eta[j]) * (k[j] + T(2) * prefix);
    prefix += k[j];
  }
  return u;
}

template <class T>
T u_gauge(const std::vector<T>& k, int j, const T& q) {
  using std::pow;
  T s = 0;
  for (int l = 0; l <= j; ++l) s += k.at(l);
  return pow(q, k.at(j) / T(2) - s);
}

template <class T>
T p_asc(int n, int x, const T& rho, const T& k, const T& q) {
  using std::pow;
  SeriesSpec<T> s;
  s.numerators = {pow(q, T(-2 * n)), pow(q, T(-2 * x)), pow(q, T(2 * x) + T(2) * rho + T(2) * k)};
  s.denominators = {pow(q, T(2) * k), T(0)};
  s.base = q * q;
  s.argument = q * q;
  s.termination = Termination::at(std::min(n, x));
  return pow(q, -T(n) * (T(2) * rho + k + T(1)) / T(2)) * phi_series(s);
}

template <class T>
T p_aw(int y, int x, const T& lambda, const T& rho, const T& v, const T& k, const T& q) {
  using std::pow;
  const T c = pow(q, rho + lambda + k + T(1));
  const T pre = q_poch(v * c, q * q, x) * q_poch(v / c, T(1) / (q * q), y);
  SeriesSpec<T> s;
  s.numerators = {pow(q, T(-2 * y)), pow(q, T(2 * y) + T(2) * lambda + T(2) * k), pow(q, T(-2 * x)),
                  pow(q, T(2 * x) + T(2) * rho + T(2) * k)};
  s.denominators = {pow(q, T(2) * k), v * c, c / v};
  s.base = q * q;
  s.argument = q * q;
  s.termination = Termination::at(std::min(x, y));
  return pre * phi_series(s);
}

template <class T>
T p_big_q_jacobi(int n, int x, const T& lambda, const T& rho, const T& v, const T& k, const T& q) {
  using std::pow;
  const T pre = q_poch(v * pow(q, -lambda - rho - k - T(1)), T(1) / (q * q), n);
  SeriesSpec<T> s;
  s.numerators = {pow(q, T(-2 * x)), pow(q, T(2 * x) + T(2) * rho + T(2) * k), pow(q, T(-2 * n))};
  s.denominators = {pow(q, T(2) * k), pow(q, rho + lambda + k + T(1)) / v};
  s.base = q * q;
  s.argument = q * q;
  s.termination = Termination::at(std::min(n, x));
  return pre * phi_series(s);
}

template <class T>
T p_q_meixner(int n, int x, const T& lambda, const T& rho, const T& v, const T& k, const T& q) {
  using std::pow;
  SeriesSpec<T> s;
  s.numerators = {pow(q, T(-2 * x)), pow(q, T(-2 * n))};
  s.denominators = {pow(q, T(2) * k)};
  s.base = q * q;
  s.argument = v * pow(q, T(2 * x) + rho - lambda + k + T(1));
  s.termination = Termination::at(std::min(n, x));
  return phi_series(s);
}

template <class T>
T p_big_q_laguerre(int n, int x, const T& lambda, const T& rho, const T& v, const T& k, const T& q) {
  using std::pow;
  const T pre = q_poch(pow(q, -lambda - rho - k - T(1)) / v, T(1) / (q * q), n);
  SeriesSpec<T> s;
  s.numerators = {pow(q, T(-2 * x)), T(0), pow(q, T(-2 * n))};
  s.denominators = {pow(q, T(2) * k), v * pow(q, rho + lambda + k + T(1))};
  s.base = q * q;
  s.argument = q * q;
  s.termination = Termination::at(std::min(n, x));
  return pre * phi_series(s);
}

template <class T>
T p_wilson(int y, int x, const T& lambda, const T& rho, const T& v, const T& k) {
  const T half = (rho + lambda + k + T(1)) / T(2);
  const T pre = rising(half + v, x) * rising(half - v, y);
  return pre * f_series<T>({T(-y), T(y) + lambda + k, T(-x), T(x) + rho + k}, {k, half + v, half - v},
                           T(1), Termination::at(std::min(x, y)));
}

template <class T>
T p_jacobi_hat(int xi, const T& y, const T& V, const T& h, const T& k) {
  using std::pow;
  return pow(V, T(xi)) *
         f_series<T>({T(-xi), T(xi) + h + k}, {k}, -y / V, Termination::at(xi));
}

template <class T>
T one_site_poly(Family family, int n, const T& x, const T& a, const T& b, const std::optional<T>& v,
                const T& k, const T& q) {
  auto need_v = [&]() -> const T& {
    if (!v) throw Error(ErrorKind::kind_mismatch, "kind/param mismatch: v required");
    return *v;
  };
  const int xi = static_cast<int>(to_double(x));
  switch (family) {
    case Family::ASC: return p_asc(n, xi, a, k, q);
    case Family::AW: return p_aw(n, xi, a, b, need_v(), k, q);
    case Family::BigQJacobi: return p_big_q_jacobi(n, xi, a, b, need_v(), k, q);
    case Family::QMeixner: return p_q_meixner(n, xi, a, b, need_v(), k, q);
    case Family::BigQLaguerre: return p_big_q_laguerre(n, xi, a, b, need_v(), k, q);
    case Family::Wilson: return p_wilson(n, xi, a, b, need_v(), k);
    case Family::JacobiHat: return p_jacobi_hat(n, x, a, b, k);
  }
  throw Error(ErrorKind::kind_mismatch, "unknown family");
}

namespace {

void check_lengths(std::size_t a, std::size_t b, std::size_t m) {
  if (a != m || b != m) throw Error(ErrorKind::kind_mismatch, "kind/param mismatch: configuration lengths differ from k");
}

}  // namespace

template <class T>
T duality_value(DualityKind kind, const Config& left, const Config& right, const ModelParams<T>& p) {
  using std::pow;
  const int M = p.sites();
  check_lengths(left.size(), right.size(), p.k.size());
  const T& q = p.q;
  const T qi = T(1) / q;
  T r = 1;
  switch (kind) {
    case DualityKind::P_R: {
      const auto hp = height_plus(right, p.k, p.need_rho());
      r = pow(q, -u_factor(left, p.k) / T(2));
      for (int j = 0; j < M; ++j) r *= p_asc(left[j], right[j], hp[j + 2], p.k[j], q);
      return r;
    }
    case DualityKind::P_L: {
      const auto hm = height_minus(right, p.k, p.need_lambda());
      r = pow(q, -u_factor(left, p.k) / T(2));
      for (int j = 0; j < M; ++j) r *= p_asc(left[j], right[j], hm[j], p.k[j], qi);
      return r;
    }
    case DualityKind::P_AW: {
      const auto hm = height_minus(left, p.k, p.need_lambda());
      const auto hp = height_plus(right, p.k, p.need_rho());
      for (int j = 0; j < M; ++j) r *= p_aw(left[j], right[j], hm[j], hp[j + 2], p.need_v(), p.k[j], q);
      return r;
    }
    case DualityKind::P_BigQJacobi: {
      const auto hm = height_minus(left, p.k, T(0));
      const auto hp = height_plus(right, p.k, p.need_rho());
      for (int j = 0; j < M; ++j)
        r *= p_big_q_jacobi(left[j], right[j], hm[j], hp[j + 2], p.need_v(), p.k[j], q);
      return r;
    }
    case DualityKind::P_QMeixner: {
      const auto hm = height_minus(left, p.k, T(0));
      const auto hp = height_plus(right, p.k, T(0));
      for (int j = 0; j < M; ++j)
        r *= p_q_meixner(left[j], right[j], hm[j], hp[j + 2], p.need_v(), p.k[j], q);
      return r;
    }
    case DualityKind::P_BigQLaguerre: {
      const auto hm = height_minus(left, p.k, T(0));
      const auto hp = height_plus(right, p.k, T(0));
      for (int j = 0; j < M; ++j)
        r *= p_big_q_laguerre(left[j], right[j], hm[j], hp[j + 2], p.need_v(), p.k[j], q);
      return r;
    }
    case DualityKind::D_qqinv: {
      const auto hm = height_minus(left, p.k, T(0));
      const auto hp = height_plus(right, p.k, T(0));
      for (int j = 0; j < M; ++j) {
        const int e = left[j];
        const int x = right[j];
        const T& k = p.k[j];
        r *= q_poch(pow(q, T(2 * x) + T(2) * k), q * q, e) / q_poch(pow(q, T(2) * k), q * q, e) *
             pow(q, -T(e) * (T(e + 2 * x) + hm[j] + hp[j + 2] + k));
      }
      return r;
    }
    case DualityKind::D_triangular: {
      const auto hm = height_minus(left, p.k, T(0));
      const auto hp = height_plus(right, p.k, T(0));
      for (int j = 0; j < M; ++j) {
        const int e = left[j];
        const int x = right[j];
        if (e > x) return T(0);
        const T& k = p.k[j];
        r *= q_poch(pow(q, T(-2 * x)), q * q, e) / q_poch(pow(q, T(2) * k), q * q, e) *
             pow(q, -T(e) * (T(e - 2 * x) + hm[j] - hp[j + 2] - k));
      }
      return r;
    }
    case DualityKind::P_Wilson: {
      const auto hm = height_minus(left, p.k, p.need_lambda());
      const auto hp = height_plus(right, p.k, p.need_rho());
      for (int j = 0; j < M; ++j) r *= p_wilson(left[j], right[j], hm[j], hp[j + 2], p.need_v(), p.k[j]);
      return r;
    }
    default:
      throw Error(ErrorKind::kind_mismatch,
                  std::string("kind/param mismatch: ") + to_string(kind) + " takes a continuous argument");
  }
}

template <class T>
std::vector<T> energy_minus(const std::vector<T>& x) {
  std::vector<T> e(x.size() + 1, T(0));
  for (std::size_t j = 1; j <= x.size(); ++j) e[j] = e[j - 1] + x[j - 1];
  return e;
}

template <class T>
std::vector<T> energy_plus(const std::vector<T>& x) {
  const std::size_t M = x.size();
  std::vector<T> e(M + 2, T(0));
  for (std::size_t j = M; j >= 1; --j) e[j] = e[j + 1] + x[j - 1];
  return e;
}

template <class T>
T duality_value(DualityKind kind, const std::vector<T>& x, const Config& right, const ModelParams<T>& p) {
  using boost::math::tgamma;
  using std::cosh;
  using std::exp;
  using std::pow;
  const int M = p.sites();
  check_lengths(x.size(), right.size(), p.k.size());
  T r = 1;
  switch (kind) {
    case DualityKind::P_JacobiHat: {
      const auto hp = height_plus(right, p.k, p.need_rho());
      const auto E = energy_minus(x);
      for (int j = 0; j < M; ++j)
        r *= p_jacobi_hat(right[j], x[j], p.need_v() + E[j], hp[j + 2], p.k[j]);
      return r;
    }
    case DualityKind::P_Laguerre: {
      for (int j = 0; j < M; ++j)
        r *= f_series<T>({T(-right[j])}, {p.k[j]}, x[j] / p.need_v(), Termination::at(right[j]));
      return r;
    }
    case DualityKind::P_Monomial:
    case DualityKind::D_B_S: {
      for (int j = 0; j < M; ++j) r *= pow(x[j], T(right[j])) / rising(p.k[j], right[j]);
      return r;
    }
    case DualityKind::D_prime: {
      const T& s = p.need_sigma();
      const T& lam = p.need_lambda();
      const auto E = energy_minus(x);
      for (int j = 1; j <= M; ++j) {
        const T g = (cosh(s * (lam + T(2) * E[j])) - cosh(s * (lam + T(2) * E[j - 1]))) / s;
        r *= tgamma(p.k[j - 1]) / tgamma(p.k[j - 1] + T(right[j - 1])) * pow(g, T(right[j - 1]));
      }
      return r;
    }
    case DualityKind::D_AB_S: {
      const T& s = p.need_sigma();
      const auto E = energy_plus(x);
      for (int j = 1; j <= M; ++j) {
        const T g = (exp(-T(2) * s * E[j]) - exp(-T(2) * s * E[j + 1])) / (T(2) * s);
        r *= tgamma(p.k[j - 1]) / tgamma(p.k[j - 1] + T(right[j - 1])) * pow(g, T(right[j - 1]));
      }
      return r;
    }
    default:
      throw Error(ErrorKind::kind_mismatch,
                  std::string("kind/param mismatch: ") + to_string(kind) + " is not continuous-discrete");
  }
}

template <class T>
T bessel_duality(const std::vector<T>& x, const std::vector<T>& y, const ModelParams<T>& p) {
  check_lengths(x.size(), y.size(), p.k.size());
  T r = 1;
  for (std::size_t j = 0; j < x.size(); ++j)
    r *= f_series<T>({}, {p.k[j]}, -x[j] * y[j] / p.need_v(), Termination::tolerance(1e-40));
  return r;
}

template <class T>
T w_site(int n, const T& k, const T& q) {
  using std::abs;
  using std::pow;
  if (abs(q - T(1)) <= T(q1_threshold)) return rising(k, n) / rising(T(1), n);
  return pow(q, -T(n) * (k - T(1))) * q_poch(pow(q, T(2) * k), q * q, n) / q_poch(q * q, q * q, n);
}

template <class T>
T w_dyn(int z, const T& a, const T& k, const T& q, WdynBranch branch) {
  using std::pow;
  const T q2 = q * q;
  const T zz = T(z);
  const T den = T(1) - pow(q, T(2) * zz + T(2) * a + T(2) * k);
  if (detail::vanishes(den, T(1))) throw Error(ErrorKind::domain, "w_dyn: vanishing factor 1 - q^{2z+2a+2k}");
  const T pre = (T(1) - pow(q, T(4) * zz + T(2) * a + T(2) * k)) / den * q_poch(pow(q, T(2) * k), q2, z) /
                q_poch(q2, q2, z);
  if (branch == WdynBranch::upper) {
    return pre * q_poch_inf_ratio(pow(q, T(2) * zz + T(2) * a + T(2)), pow(q, T(2) * zz + T(2) * a + T(2) * k + T(2)), q2) *
           pow(q, T(2) * zz * (zz + a));
  }
  return pre * q_poch_inf_ratio(pow(q, -T(2) * zz - T(2) * a - T(2) * k), pow(q, -T(2) * zz - T(2) * a), q2) *
         pow(q, -T(2) * zz * (zz + a + k));
}

template <class T>
T w_hat_dyn(int z, const T& a, const T& k, WdynBranch branch) {
  using boost::math::tgamma;
  const T zz = T(z);
  const T pre = (T(2) * zz + a + k) / (zz + a + k) * rising(k, z) / rising(T(1), z);
  if (branch == WdynBranch::upper) return pre * tgamma(zz + a + k + T(1)) / tgamma(zz + a + T(1));
  return pre * tgamma(-zz - a) / tgamma(-zz - a - k);
}

template <class T>
WdynBranch branch_for(const T& boundary) {
  return boundary > T(-1) ? WdynBranch::upper : WdynBranch::lower;
}

template <class T>
T measure_weight(MeasureKind kind, const Config& c, const ModelParams<T>& p) {
  using std::pow;
  const int M = p.sites();
  if (static_cast<int>(c.size()) != M) throw Error(ErrorKind::kind_mismatch, "configuration length differs from k");
  T r = 1;
  switch (kind) {
    case MeasureKind::W_asip: {
      r = pow(p.q, u_factor(c, p.k));
      for (int j = 0; j < M; ++j) r *= w_site(c[j], p.k[j], p.q);
      return r;
    }
    case MeasureKind::W_L: {
      const auto h = height_minus(c, p.k, p.need_lambda());
      const auto br = branch_for(p.need_lambda());
      for (int j = 0; j < M; ++j) r *= w_dyn(c[j], h[j], p.k[j], p.q, br);
      return r;
    }
    case MeasureKind::W_R: {
      const auto h = height_plus(c, p.k, p.need_rho());
      const auto br = branch_for(p.need_rho());
      for (int j = 0; j < M; ++j) r *= w_dyn(c[j], h[j + 2], p.k[j], p.q, br);
      return r;
    }
    case MeasureKind::W_hat_L: {
      const auto h = height_minus(c, p.k, p.need_lambda());
      const auto br = branch_for(p.need_lambda());
      for (int j = 0; j < M; ++j) r *= w_hat_dyn(c[j], h[j], p.k[j], br);
      return r;
    }
    case MeasureKind::W_hat_R: {
      const auto h = height_plus(c, p.k, p.need_rho());
      const auto br = branch_for(p.need_rho());
      for (int j = 0; j < M; ++j) r *= w_hat_dyn(c[j], h[j + 2], p.k[j], br);
      return r;
    }
    default:
      throw Error(ErrorKind::kind_mismatch, "measure kind takes a continuous configuration");
  }
}

template <class T>
T measure_weight(MeasureKind kind, const std::vector<T>& x, const ModelParams<T>& p) {
  using boost::math::tgamma;
  using std::exp;
  using std::pow;
  using std::sinh;
  const int M = p.sites();
  T r = 1;
  switch (kind) {
    case MeasureKind::mu_BEP:
      for (int j = 0; j < M; ++j) r *= pow(x[j], p.k[j] - T(1)) / tgamma(p.k[j]) * exp(-x[j]);
      return r;
    case MeasureKind::mu_ABEP_L: {
      const T& s = p.need_sigma();
      const T& lam = p.need_lambda();
      const auto g = g_transform(x, s, lam);
      const auto E = energy_minus(x);
      for (int j = 1; j <= M; ++j)
        r *= sinh(s * (lam + T(2) * E[j])) * pow(g[j - 1], p.k[j - 1] - T(1)) / tgamma(p.k[j - 1]);
      return r;
    }
    default:
      throw Error(ErrorKind::kind_mismatch, "measure kind takes a discrete configuration");
  }
}

template <class T>
RegimeFlags regime_flags(const Config& config, const std::vector<T>& k, const T& boundary, bool left) {
  RegimeFlags f;
  f.restricted = !(boundary > T(-1));
  f.strict_threshold = boundary < T(-2);
  if (!f.restricted) return f;
  const int M = static_cast<int>(config.size());
  if (left) {
    const auto h = height_minus(config, k, boundary);
    for (int j = 0; j < M; ++j) f.borderline_site |= (h[j] > T(-1) && h[j] < T(0));
  } else {
    const auto h = height_plus(config, k, boundary);
    for (int j = 0; j < M; ++j) f.borderline_site |= (h[j + 2] > T(-1) && h[j + 2] < T(0));
  }
  return f;
}

template <class T>
T omega_aw(int y, int x, const T& lambda, const T& rho, const T& K, const T& v, const T& q) {
  using std::pow;
  const T q2 = q * q;
  const T a = T(2 * y) + K + lambda - rho + T(1);
  const T b = T(-2 * x) - K + lambda - rho + T(1);
  return q_poch_inf(v * pow(q, a), q2) * q_poch_inf(pow(q, a) / v, q2) /
         (q_poch_inf(v * pow(q, b), q2) * q_poch_inf(pow(q, b) / v, q2));
}

template <class T>
T omega_factor(OmegaKind kind, int n, int X, const ModelParams<T>& p) {
  using std::pow;
  const T& q = p.q;
  if (!(q > T(0) && q < T(1))) throw Error(ErrorKind::domain, "omega factors require 0 < q < 1");
  const T q2 = q * q;
  const T K = p.k_total();
  const T nn = T(n);
  const T XX = T(X);
  switch (kind) {
    case OmegaKind::AW:
      return omega_aw(n, X, p.need_lambda(), p.need_rho(), K, p.need_v(), q);
    case OmegaKind::J: {
      const T& v = p.need_v();
      const T& rho = p.need_rho();
      const T c = pow(q, K + rho + T(1)) / v;
      return pow(v, -T(2) * nn) * pow(q, nn * (T(2) * nn - T(1))) * q_poch(c, q2, X) / q_poch(c, q2, n) *
             q_poch_inf(pow(q, T(2) * nn + K - rho + T(1)) / v, q2) /
             q_poch_inf(pow(q, -T(2) * XX - K - rho + T(1)) / v, q2);
    }
    case OmegaKind::Jprime: {
      const T& v = p.need_v();
      const T& rho = p.need_rho();
      const T c = pow(q, -K - rho - T(1)) / v;
      return pow(v, -T(2) * nn) * pow(q, nn * (T(1) - T(2) * nn)) * q_poch(c, T(1) / q2, X) /
             q_poch(c, T(1) / q2, n) * q_poch_inf(pow(q, T(2) * XX + K + rho + T(1)) / v, q2) /
             q_poch_inf(pow(q, -T(2) * nn - K + rho + T(1)) / v, q2);
    }
    case OmegaKind::M: {
      const T& v = p.need_v();
      const T sign = ((n - X) % 2 == 0) ? T(1) : T(-1);
      return sign * pow(v, -nn - XX) * q_poch_inf(pow(q, T(2) * nn + K + T(1)) / v, q2) /
             q_poch_inf(pow(q, -T(2) * XX - K + T(1)) / v, q2) *
             pow(q, nn * (nn - K - T(1)) + XX * (T(1) - XX - K));
    }
  }
  throw Error(ErrorKind::kind_mismatch, "unknown omega kind");
}

template <class T>
std::vector<T> g_transform(const std::vector<T>& x, const T& sigma, const T& lambda) {
  using std::cosh;
  const auto E = energy_minus(x);
  std::vector<T> g(x.size());
  for (std::size_t j = 1; j <= x.size(); ++j)
    g[j - 1] = (cosh(sigma * (lambda + T(2) * E[j])) - cosh(sigma * (lambda + T(2) * E[j - 1]))) / sigma;
  return g;
}

template <class T>
std::vector<T> g_inverse(const std::vector<T>& y, const T& sigma, const T& lambda) {
  using std::abs;
  using std::cosh;
  using std::log;
  using std::sqrt;
  auto acosh_ = [](const T& a) { return log(a + sqrt(a * a - T(1))); };
  const T c = cosh(sigma * lambda);
  std::vector<T> x(y.size());
  T prev_sum = 0;
  T prev = acosh_(c);
  for (std::size_t j = 0; j < y.size(); ++j) {
    prev_sum += y[j];
    const T arg = c + sigma * prev_sum;
    if (arg < T(1)) throw Error(ErrorKind::domain, "g_inverse: cosh^{-1} argument below 1");
    const T cur = acosh_(arg);
    x[j] = (cur - prev) / (T(2) * abs(sigma));
    prev = cur;
  }
  return x;
}

template <class T>
T g_jacobian(const std::vector<T>& x, const T& sigma, const T& lambda) {
  using std::abs;
  using std::sinh;
  const auto E = energy_minus(x);
  T r = 1;
  for (std::size_t j = 1; j <= x.size(); ++j) r *= T(2) * sinh(sigma * (lambda + T(2) * E[j]));
  return abs(r);
}

#define DL_INSTANTIATE_DUALITY(T)                                                                          \
  template struct ModelParams<T>;                                                                          \
  template std::vector<T> height_minus(const Config&, const std::vector<T>&, const T&);                     \
  template std::vector<T> height_plus(const Config&, const std::vector<T>&, const T&);                      \
  template T height_minus_at(const Config&, const ModelParams<T>&, int);                                   \
  template T height_plus_at(const Config&, const ModelParams<T>&, int);                                    \
  template T u_factor(const Config&, const std::vector<T>&);                                               \
  template T u_gauge(const std::vector<T>&, int, const T&);                                                \
  template T p_asc(int, int, const T&, const T&, const T&);                                                \
  template T p_aw(int, int, const T&, const T&, const T&, const T&, const T&);                             \
  template T p_big_q_jacobi(int, int, const T&, const T&, const T&, const T&, const T&);                   \
  template T p_q_meixner(int, int, const T&, const T&, const T&, const T&, const T&);                      \
  template T p_big_q_laguerre(int, int, const T&, const T&, const T&, const T&, const T&);                 \
  template T p_wilson(int, int, const T&, const T&, const T&, const T&);                                   \
  template T p_jacobi_hat(int, const T&, const T&, const T&, const T&);                                    \
  template T one_site_poly(Family, int, const T&, const T&, const T&, const std::optional<T>&, const T&,   \
                           const T&);                                                                      \
  template T duality_value(DualityKind, const Config&, const Config&, const ModelParams<T>&);              \
  template T duality_value(DualityKind, const std::vector<T>&, const Config&, const ModelParams<T>&);      \
  template T bessel_duality(const std::vector<T>&, const std::vector<T>&, const ModelParams<T>&);           \
  template T w_site(int, const T&, const T&);                                                              \
  template T w_dyn(int, const T&, const T&, const T&, WdynBranch);                                         \
  template T w_hat_dyn(int, const T&, const T&, WdynBranch);                                               \
  template WdynBranch branch_for(const T&);                                                                \
  template T measure_weight(MeasureKind, const Config&, const ModelParams<T>&);                            \
  template T measure_weight(MeasureKind, const std::vector<T>&, const ModelParams<T>&);                    \
  template RegimeFlags regime_flags(const Config&, const std::vector<T>&, const T&, bool);                 \
  template T omega_aw(int, int, const T&, const T&, const T&, const T&, const T&);                         \
  template T omega_factor(OmegaKind, int, int, const ModelParams<T>&);                                     \
  template std::vector<T> energy_minus(const std::vector<T>&);                                             \
  template std::vector<T> energy_plus(const std::vector<T>&);                                              \
  template std::vector<T> g_transform(const std::vector<T>&, const T&, const T&);                          \
  template std::vector<T> g_inverse(const std::vector<T>&, const T&, const T&);                            \
  template T g_jacobian(const std::vector<T>&, const T&, const T&);

DL_INSTANTIATE_DUALITY(double)
DL_INSTANTIATE_DUALITY(hp)

}  // namespace duality_lab
