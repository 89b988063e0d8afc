#include <duality_lab/algebra.hpp>
#include <duality_lab/verify.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <sstream>
#include <thread>

namespace duality_lab {

std::string describe(const Params& p) {
  std::ostringstream os;
  os << "q=" << format_real(p.q) << " k=" << format_reals(p.k);
  if (p.lambda) os << " lambda=" << format_real(*p.lambda);
  if (p.rho) os << " rho=" << format_real(*p.rho);
  if (p.v) os << " v=" << format_real(*p.v);
  if (p.sigma) os << " sigma=" << format_real(*p.sigma);
  return os.str();
}

namespace {

template <class T>
std::string describe_point(const std::vector<T>& x) {
  std::vector<double> d;
  for (const auto& e : x) d.push_back(to_double(e));
  return format_reals(d);
}

// Relative residual without the floor; zero when both sides vanish.
template <class T>
double pure_rel(const T& a, const T& b) {
  using std::abs;
  const T s = std::max(abs(a), abs(b));
  if (s == T(0)) return 0.0;
  return to_double(abs(a - b) / s);
}

struct PairShape {
  ProcessKind left;
  ProcessKind right;
  bool inverted_q;  // right process runs at 1/q
};

std::optional<PairShape> pair_shape(DualityKind kind) {
  using P = ProcessKind;
  switch (kind) {
    case DualityKind::P_R: return PairShape{P::ASIP, P::ASIP_R, false};
    case DualityKind::P_L: return PairShape{P::ASIP, P::ASIP_L, false};
    case DualityKind::P_AW: return PairShape{P::ASIP_L, P::ASIP_R, false};
    case DualityKind::P_BigQJacobi: return PairShape{P::ASIP, P::ASIP_R, false};
    case DualityKind::P_QMeixner: return PairShape{P::ASIP, P::ASIP, false};
    case DualityKind::P_BigQLaguerre: return PairShape{P::ASIP, P::ASIP, true};
    case DualityKind::D_qqinv: return PairShape{P::ASIP, P::ASIP, true};
    case DualityKind::D_triangular: return PairShape{P::ASIP, P::ASIP, false};
    case DualityKind::P_Wilson: return PairShape{P::SIP_L, P::SIP_R, false};
    case DualityKind::P_JacobiHat: return PairShape{P::BEP, P::SIP_R, false};
    case DualityKind::P_Laguerre: return PairShape{P::BEP, P::SIP, false};
    case DualityKind::P_Monomial: return PairShape{P::BEP, P::SIP, false};
    case DualityKind::D_B_S: return PairShape{P::BEP, P::SIP, false};
    case DualityKind::D_prime: return PairShape{P::ABEP_L, P::SIP, false};
    case DualityKind::D_AB_S: return PairShape{P::ABEP, P::SIP, false};
    case DualityKind::P_Bessel: return PairShape{P::BEP, P::BEP, false};
  }
  return std::nullopt;
}

}  // namespace

template <class T>
ModelParams<T> DualityPair<T>::function_params() const {
  ModelParams<T> p = left_spec.params;
  const auto& r = right_spec.params;
  if (!p.lambda && r.lambda) p.lambda = r.lambda;
  if (!p.rho && r.rho) p.rho = r.rho;
  if (!p.sigma && r.sigma) p.sigma = r.sigma;
  if (v) p.v = v;
  return p;
}

template <class T>
DualityPair<T> make_duality_pair(DualityKind kind, const ModelParams<T>& p) {
  const auto shape = pair_shape(kind);
  if (!shape) throw Error(ErrorKind::kind_mismatch, std::string("no process pair for ") + to_string(kind));
  DualityPair<T> d;
  d.kind = kind;
  d.left_spec = {shape->left, p};
  d.right_spec = {shape->right, p};
  if (shape->inverted_q) d.right_spec.params.q = T(1) / p.q;
  d.v = p.v;
  return d;
}

template <class T>
void DualityPair<T>::validate() const {
  using std::abs;
  const auto shape = pair_shape(kind);
  if (!shape || shape->left != left_spec.kind || shape->right != right_spec.kind)
    throw Error(ErrorKind::kind_mismatch, std::string("kind/param mismatch: ") + to_string(kind) + " does not pair " +
                                              to_string(left_spec.kind) + " with " + to_string(right_spec.kind));
  left_spec.validate();
  right_spec.validate();
  if (left_spec.params.k != right_spec.params.k)
    throw Error(ErrorKind::kind_mismatch, "kind/param mismatch: the two processes use different k");
  if (is_discrete(left_spec.kind) && is_discrete(right_spec.kind) && left_spec.kind != ProcessKind::SIP_L) {
    const T& q = left_spec.params.q;
    const T want = shape->inverted_q ? T(1) / q : q;
    if (abs(right_spec.params.q - want) > T(1e-12) * abs(want))
      throw Error(ErrorKind::kind_mismatch, "kind/param mismatch: q of the right process does not fit the kind");
  }
}

template <class T>
CheckReport duality_residual(const DualityPair<T>& pair, const std::vector<Config>& left_states,
                             const std::vector<Config>& right_states, const DualityOptions& opts) {
  pair.validate();
  const auto fp = pair.function_params();
  std::map<std::pair<Config, Config>, T> memo;
  auto D = [&](const Config& a, const Config& b) -> T {
    auto key = std::make_pair(a, b);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const T val = duality_value(pair.kind, a, b, fp);
    memo.emplace(std::move(key), val);
    return val;
  };
  Residuals res;
  for (const auto& eta : left_states) {
    if (!state_space_contains(pair.left_spec, eta)) continue;
    const auto left_jumps = jump_rates(pair.left_spec, eta);
    for (const auto& xi : right_states) {
      if (!state_space_contains(pair.right_spec, xi)) continue;
      const std::string what = "left=" + format_config(eta) + " right=" + format_config(xi);
      try {
        const T d0 = D(eta, xi);
        T lhs = 0;
        for (const auto& j : left_jumps) lhs += j.rate * (D(j.target, xi) - d0);
        T rhs = 0;
        for (const auto& j : jump_rates(pair.right_spec, xi)) rhs += j.rate * (D(eta, j.target) - d0);
        res.add(lhs, rhs, what);
      } catch (const Error& e) {
        res.error(what + ": " + to_string(e.kind()) + ": " + e.what());
      }
    }
  }
  auto r = res.report(std::string("duality:") + to_string(pair.kind), describe(fp), opts.tolerance);
  return r;
}

template <class T>
CheckReport duality_residual(const DualityPair<T>& pair, const std::vector<std::vector<T>>& left_points,
                             const std::vector<Config>& right_states, const DualityOptions& opts) {
  pair.validate();
  if (is_discrete(pair.left_spec.kind) || !is_discrete(pair.right_spec.kind))
    throw Error(ErrorKind::kind_mismatch, "kind/param mismatch: expected a diffusion on the left");
  const auto fp = pair.function_params();
  Residuals res;
  for (const auto& x : left_points) {
    if (!state_space_contains(pair.left_spec, x)) {
      res.error("point " + describe_point(x) + " outside the state space");
      continue;
    }
    for (const auto& xi : right_states) {
      if (!state_space_contains(pair.right_spec, xi)) continue;
      const std::string what = "x=" + describe_point(x) + " right=" + format_config(xi);
      try {
        const T lhs = apply_diffusion_generator<T>(
            pair.left_spec, [&](const std::vector<T>& y) { return duality_value(pair.kind, y, xi, fp); }, x,
            opts.stencil);
        const T rhs = apply_discrete_generator<T>(
            pair.right_spec, [&](const Config& c) { return duality_value(pair.kind, x, c, fp); }, xi);
        res.add(lhs, rhs, what);
      } catch (const Error& e) {
        res.error(what + ": " + to_string(e.kind()) + ": " + e.what());
      }
    }
  }
  return res.report(std::string("duality:") + to_string(pair.kind), describe(fp), opts.tolerance);
}

template <class T>
CheckReport bessel_duality_residual(const ModelParams<T>& p, const std::vector<std::vector<T>>& xs,
                                    const std::vector<std::vector<T>>& ys, const DualityOptions& opts) {
  const ProcessSpec<T> bep{ProcessKind::BEP, p};
  Residuals res;
  for (const auto& x : xs) {
    for (const auto& y : ys) {
      const std::string what = "x=" + describe_point(x) + " y=" + describe_point(y);
      try {
        const T lhs = apply_diffusion_generator<T>(
            bep, [&](const std::vector<T>& z) { return bessel_duality(z, y, p); }, x, opts.stencil);
        const T rhs = apply_diffusion_generator<T>(
            bep, [&](const std::vector<T>& z) { return bessel_duality(x, z, p); }, y, opts.stencil);
        res.add(lhs, rhs, what);
      } catch (const Error& e) {
        res.error(what + ": " + to_string(e.kind()) + ": " + e.what());
      }
    }
  }
  return res.report("duality:P_Bessel", describe(p), opts.tolerance);
}

template <class T>
CheckReport g_intertwining_residual(const ModelParams<T>& p, const std::vector<std::vector<T>>& xs,
                                    const DualityOptions& opts) {
  const T& s = p.need_sigma();
  const T& lam = p.need_lambda();
  ProcessSpec<T> bep{ProcessKind::BEP, p};
  bep.params.lambda.reset();
  bep.params.sigma.reset();
  const ProcessSpec<T> abep{ProcessKind::ABEP_L, p};
  const int M = p.sites();
  // Monomials 1, y_i and y_i y_j.
  std::vector<std::vector<int>> monomials = {{}};
  for (int i = 0; i < M; ++i) monomials.push_back({i});
  for (int i = 0; i < M; ++i)
    for (int j = i; j < M; ++j) monomials.push_back({i, j});
  Residuals res;
  for (const auto& x : xs) {
    const auto gx = g_transform(x, s, lam);
    for (const auto& mono : monomials) {
      auto f = [&](const std::vector<T>& y) {
        T r = 1;
        for (int i : mono) r *= y[i];
        return r;
      };
      std::string name = "1";
      if (!mono.empty()) {
        name.clear();
        for (int i : mono) name += "y" + std::to_string(i + 1);
      }
      const std::string what = "x=" + describe_point(x) + " f=" + name;
      try {
        const T lhs = apply_diffusion_generator<T>(bep, f, gx, opts.stencil);
        const T rhs = apply_diffusion_generator<T>(
            abep, [&](const std::vector<T>& y) { return f(g_transform(y, s, lam)); }, x, opts.stencil);
        res.add(lhs, rhs, what);
      } catch (const Error& e) {
        res.error(what + ": " + to_string(e.kind()) + ": " + e.what());
      }
    }
  }
  return res.report("g-intertwining", describe(p), opts.tolerance);
}

template <class T>
CheckReport detailed_balance_residual(const ProcessSpec<T>& spec, MeasureKind measure,
                                      const std::vector<Config>& states, double tolerance) {
  spec.validate();
  auto fits = [&] {
    switch (measure) {
      case MeasureKind::W_asip: return spec.kind == ProcessKind::ASIP || spec.kind == ProcessKind::SIP;
      case MeasureKind::W_L: return spec.kind == ProcessKind::ASIP_L;
      case MeasureKind::W_R: return spec.kind == ProcessKind::ASIP_R;
      case MeasureKind::W_hat_L: return spec.kind == ProcessKind::SIP_L;
      case MeasureKind::W_hat_R: return spec.kind == ProcessKind::SIP_R;
      default: return false;
    }
  };
  if (!fits())
    throw Error(ErrorKind::kind_mismatch, std::string("kind/param mismatch: measure ") + to_string(measure) +
                                              " does not belong to " + to_string(spec.kind));
  Residuals res;
  for (const auto& a : states) {
    if (!state_space_contains(spec, a)) continue;
    try {
      const T mu_a = measure_weight(measure, a, spec.params);
      for (const auto& j : jump_rates(spec, a)) {
        const std::string what = format_config(a) + "->" + format_config(j.target);
        T back = 0;
        for (const auto& r : jump_rates(spec, j.target))
          if (r.target == a) back += r.rate;
        const T lhs = mu_a * j.rate;
        const T rhs = measure_weight(measure, j.target, spec.params) * back;
        using std::abs;
        res.record(to_double(abs(lhs - rhs)), pure_rel(lhs, rhs), what);
      }
    } catch (const Error& e) {
      res.error(format_config(a) + ": " + to_string(e.kind()) + ": " + e.what());
    }
  }
  auto r = res.report(std::string("detailed-balance:") + to_string(spec.kind) + "/" + to_string(measure),
                      describe(spec.params), tolerance);
  r.notes.push_back("relative residual normalized by max(|lhs|, |rhs|) without a floor");
  return r;
}

template <class T>
CheckReport mu_l_pushforward_residual(const ModelParams<T>& p, const std::vector<std::vector<T>>& xs,
                                      double tolerance) {
  using std::exp;
  using std::pow;
  const T& s = p.need_sigma();
  const T& lam = p.need_lambda();
  const int M = p.sites();
  Residuals res;
  for (const auto& x : xs) {
    const std::string what = "x=" + describe_point(x);
    try {
      const auto g = g_transform(x, s, lam);
      const T lhs = measure_weight(MeasureKind::mu_BEP, g, p) * g_jacobian(x, s, lam) * exp(total(g));
      const T rhs = pow(T(2), T(M)) * measure_weight(MeasureKind::mu_ABEP_L, x, p);
      using std::abs;
      res.record(to_double(abs(lhs - rhs)), pure_rel(lhs, rhs), what);
      // Closed-form Jacobian against a central-difference determinant.
      Matrix<T> J(M, M);
      const T h = T(std::is_same_v<T, double> ? 1e-5 : 1e-9);
      for (int c = 0; c < M; ++c) {
        auto xp = x, xm = x;
        xp[c] += h;
        xm[c] -= h;
        const auto gp = g_transform(xp, s, lam), gm = g_transform(xm, s, lam);
        for (int r = 0; r < M; ++r) J(r, c) = (gp[r] - gm[r]) / (T(2) * h);
      }
      const T det = abs(T(J.determinant()));
      const T jac = g_jacobian(x, s, lam);
      const double fd_tol = std::is_same_v<T, double> ? 1e-8 : 1e-15;
      const double rel = pure_rel(det, jac);
      if (rel > fd_tol) res.error(what + ": |J_g| differs from the numerical determinant by " + format_real(rel));
    } catch (const Error& e) {
      res.error(what + ": " + to_string(e.kind()) + ": " + e.what());
    }
  }
  auto r = res.report("mu-l-pushforward", describe(p), tolerance);
  r.notes.push_back("mu_BEP(g(x)) |J_g(x)| e^{sum g(x)} = 2^M mu_L(x); sum g depends on |x| only");
  return r;
}

template <class T>
CheckReport mu_l_symmetry_residual(const ModelParams<T>& p, const std::vector<std::vector<T>>& xs,
                                   const DualityOptions& opts) {
  const ProcessSpec<T> spec{ProcessKind::ABEP_L, p};
  Residuals res;
  for (const auto& x : xs) {
    for (int j = 0; j + 1 < p.sites(); ++j) {
      const std::string what = "x=" + describe_point(x) + " bond=" + std::to_string(j + 1);
      try {
        auto f = [&](const std::vector<T>& y) {
          return diffusion_coefficients(spec, y).A[j] * measure_weight(MeasureKind::mu_ABEP_L, y, p);
        };
        const T lhs = directional_derivatives<T>(f, x, j, opts.stencil).first;
        const T rhs = diffusion_coefficients(spec, x).B[j] * measure_weight(MeasureKind::mu_ABEP_L, x, p);
        res.add(lhs, rhs, what);
      } catch (const Error& e) {
        res.error(what + ": " + to_string(e.kind()) + ": " + e.what());
      }
    }
  }
  return res.report("mu-l-symmetry", describe(p), opts.tolerance);
}

template <class T>
CheckReport generator_symmetry_residual(const ModelParams<T>& p, int max_total, double tolerance) {
  const ProcessSpec<T> asip{ProcessKind::ASIP, p};
  const int M = p.sites();
  const T& lam = p.need_lambda();
  const T& rho = p.need_rho();
  if (!(lam > T(-1))) throw Error(ErrorKind::regime_violation, "regime violation: generator symmetry needs lambda > -1");
  struct Fn {
    std::string name;
    std::function<T(const Config&)> f;
  };
  std::vector<Fn> fns;
  const ProcessSpec<T> right{ProcessKind::ASIP_R, p};
  for (const auto& c : enumerate_states(M, 2)) {
    fns.push_back({"P_L(.," + format_config(c) + ")",
                   [c, &p](const Config& e) { return duality_value(DualityKind::P_L, e, c, p); }});
    if (state_space_contains(right, c))
      fns.push_back({"P_R(.," + format_config(c) + ")",
                     [c, &p](const Config& e) { return duality_value(DualityKind::P_R, e, c, p); }});
  }
  (void)rho;
  Residuals res;
  for (int n = 0; n <= max_total; ++n) {
    const auto slice = enumerate_slice(M, n);
    std::vector<T> W;
    std::vector<std::vector<T>> val(fns.size()), gen(fns.size());
    for (const auto& e : slice) W.push_back(measure_weight(MeasureKind::W_asip, e, p));
    for (std::size_t a = 0; a < fns.size(); ++a)
      for (const auto& e : slice) {
        val[a].push_back(fns[a].f(e));
        gen[a].push_back(apply_discrete_generator<T>(asip, fns[a].f, e));
      }
    for (std::size_t a = 0; a < fns.size(); ++a)
      for (std::size_t b = a + 1; b < fns.size(); ++b) {
        T lhs = 0, rhs = 0;
        for (std::size_t i = 0; i < slice.size(); ++i) {
          lhs += gen[a][i] * val[b][i] * W[i];
          rhs += val[a][i] * gen[b][i] * W[i];
        }
        res.add(lhs, rhs, "|eta|=" + std::to_string(n) + " f=" + fns[a].name + " g=" + fns[b].name);
      }
  }
  return res.report("generator-symmetry", describe(p), tolerance);
}

const char* to_string(Relation r) {
  switch (r) {
    case Relation::orth_asc_qinv: return "orthASC_qinv";
    case Relation::dualorth_asc_qinv: return "dualorthASC_qinv";
    case Relation::dualorth_asc_q: return "dualorthASC_q";
    case Relation::P_L_both: return "P_L_both";
    case Relation::P_R: return "P_R";
    case Relation::AW_bi_L: return "AW_bi_L";
    case Relation::AW_bi_R: return "AW_bi_R";
    case Relation::bigqjacobi: return "bigqjacobi";
    case Relation::bigqinvjacobi: return "bigqinvjacobi";
    case Relation::qmeixner: return "qmeixner";
  }
  return "?";
}

std::optional<Relation> relation_from_string(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(Relation::qmeixner); ++i) {
    const auto r = static_cast<Relation>(i);
    if (s == to_string(r)) return r;
  }
  return std::nullopt;
}

namespace {

template <class T>
struct SumResult {
  T value = 0;
  double tail_bound = 0;
  long terms = 0;
  int slices = 0;
  bool converged = false;
};

// Sums term(s) over configurations s on M sites, slice by slice in |s|. Stops after
// `quiet_slices` consecutive slices whose absolute mass is below tail_tol max(|sum|, 1)
// and bounds the remainder by a geometric series with the largest observed slice ratio.
template <class T>
SumResult<T> slice_sum(int M, const std::function<bool(int)>& admissible,
                       const std::function<T(const Config&)>& term, const OrthogonalityOptions& o) {
  using std::abs;
  SumResult<T> r;
  std::vector<double> mass;
  int quiet = 0;
  for (int n = 0;; ++n) {
    if (!admissible(n)) {
      r.converged = true;
      r.tail_bound = 0;
      return r;
    }
    T slice = 0, m = 0;
    for (const auto& s : enumerate_slice(M, n)) {
      const T t = term(s);
      slice += t;
      m += abs(t);
      ++r.terms;
    }
    r.value += slice;
    ++r.slices;
    mass.push_back(to_double(m));
    const double scale = std::max(1.0, std::abs(to_double(r.value)));
    quiet = mass.back() <= o.tail_tol * scale ? quiet + 1 : 0;
    if (quiet >= o.quiet_slices) {
      double ratio = 0;
      for (std::size_t i = mass.size() - o.quiet_slices; i < mass.size(); ++i) {
        if (mass[i] == 0) continue;
        ratio = mass[i - 1] == 0 ? INFINITY : std::max(ratio, mass[i] / mass[i - 1]);
      }
      r.tail_bound = ratio < 1 ? mass.back() * ratio / (1 - ratio) : INFINITY;
      r.converged = true;
      return r;
    }
    if (r.terms > o.max_terms) {
      r.tail_bound = INFINITY;
      return r;
    }
  }
}

template <class T>
ModelParams<T> inverted(ModelParams<T> p) {
  p.q = T(1) / p.q;
  return p;
}

// Index in the restricted space X_{d,a}: 2|c| + |k| + a < 0.
template <class T>
bool restricted_ok(const Config& c, const ModelParams<T>& p, const T& a) {
  return T(2 * total(c)) + p.k_total() + a < T(0);
}

}  // namespace

template <class T>
CheckReport orthogonality_residual(Relation relation, const ModelParams<T>& p,
                                   const std::vector<std::pair<Config, Config>>& index_pairs,
                                   const OrthogonalityOptions& opts) {
  using std::abs;
  using std::sqrt;
  if (!(p.q > T(0) && p.q < T(1))) throw Error(ErrorKind::domain, "orthogonality sums require 0 < q < 1");
  const int M = p.sites();
  const T& q = p.q;
  const T K = p.k_total();
  auto violation = [&](const std::string& why) {
    throw Error(ErrorKind::regime_violation, std::string("regime violation: ") + to_string(relation) + ": " + why);
  };
  auto always = [](int) { return true; };
  const bool one_site = relation == Relation::orth_asc_qinv || relation == Relation::dualorth_asc_qinv ||
                        relation == Relation::dualorth_asc_q;
  if (one_site && M != 1) violation("one-site relation needs a single k");

  // One sum: the summand without normalization and the normalizer N(i) with sum = delta / N(i).
  struct Part {
    std::string name;
    std::function<T(const Config&, const Config&, const Config&)> summand;  // (s, i, i')
    std::function<T(const Config&)> norm;
  };
  std::vector<Part> parts;
  const auto pinv = inverted(p);
  auto W = [&](const Config& c) { return measure_weight(MeasureKind::W_asip, c, p); };
  auto WL = [&](const Config& c) { return measure_weight(MeasureKind::W_L, c, p); };
  auto WR = [&](const Config& c) { return measure_weight(MeasureKind::W_R, c, p); };
  auto DV = [](DualityKind k, const Config& a, const Config& b, const ModelParams<T>& pp) {
    return duality_value(k, a, b, pp);
  };

  switch (relation) {
    case Relation::orth_asc_qinv: {
      const T lam = p.need_lambda();
      if (!(lam > T(-1))) violation("needs lambda > -1");
      const T k = p.k[0];
      parts.push_back({"sum_y", [=](const Config& s, const Config& i, const Config& j) {
                         return p_asc(i[0], s[0], lam, k, T(1) / q) * p_asc(j[0], s[0], lam, k, T(1) / q) *
                                w_dyn(s[0], lam, k, q, WdynBranch::upper);
                       },
                       [=](const Config& i) { return w_site(i[0], k, q); }});
      break;
    }
    case Relation::dualorth_asc_qinv: {
      const T lam = p.need_lambda();
      if (!(lam > T(-1))) violation("needs lambda > -1");
      const T k = p.k[0];
      parts.push_back({"sum_n", [=](const Config& s, const Config& i, const Config& j) {
                         return p_asc(s[0], i[0], lam, k, T(1) / q) * p_asc(s[0], j[0], lam, k, T(1) / q) *
                                w_site(s[0], k, q);
                       },
                       [=](const Config& i) { return w_dyn(i[0], lam, k, q, WdynBranch::upper); }});
      break;
    }
    case Relation::dualorth_asc_q: {
      const T rho = p.need_rho();
      if (rho > T(-1)) violation("needs rho <= -1");
      const T k = p.k[0];
      for (const auto& [a, b] : index_pairs)
        if (!(T(a[0] + b[0]) + rho + k < T(0))) violation("needs x + x' + rho + k < 0 for convergence");
      parts.push_back({"sum_n", [=](const Config& s, const Config& i, const Config& j) {
                         return p_asc(s[0], i[0], rho, k, q) * p_asc(s[0], j[0], rho, k, q) * w_site(s[0], k, q);
                       },
                       [=](const Config& i) { return w_dyn(i[0], rho, k, q, WdynBranch::lower); }});
      break;
    }
    case Relation::P_L_both: {
      if (!(p.need_lambda() > T(-1))) violation("needs lambda > -1");
      parts.push_back({"sum_eta", [&](const Config& s, const Config& i, const Config& j) {
                         return DV(DualityKind::P_L, s, i, p) * DV(DualityKind::P_L, s, j, p) * W(s);
                       },
                       WL});
      parts.push_back({"sum_zeta", [&](const Config& s, const Config& i, const Config& j) {
                         return DV(DualityKind::P_L, i, s, p) * DV(DualityKind::P_L, j, s, p) * WL(s);
                       },
                       W});
      break;
    }
    case Relation::P_R: {
      const T rho = p.need_rho();
      if (rho > T(-1)) violation("needs rho <= -1");
      for (const auto& [a, b] : index_pairs)
        if (!restricted_ok(a, p, rho) || !restricted_ok(b, p, rho)) violation("indices outside X_{d,rho}");
      parts.push_back({"sum_eta", [&](const Config& s, const Config& i, const Config& j) {
                         return DV(DualityKind::P_R, s, i, p) * DV(DualityKind::P_R, s, j, p) * W(s);
                       },
                       WR});
      break;
    }
    case Relation::AW_bi_L: {
      const T lam = p.need_lambda(), rho = p.need_rho(), v = p.need_v();
      if (!(lam > T(-1)) || rho > T(-1)) violation("needs lambda > -1 and rho <= -1");
      for (const auto& [a, b] : index_pairs)
        if (!restricted_ok(a, p, rho) || !restricted_ok(b, p, rho)) violation("indices outside X_{d,rho}");
      auto pv = p;
      pv.v = T(1) / v;
      parts.push_back({"sum_zeta", [=, &p](const Config& s, const Config& i, const Config& j) {
                         return duality_value(DualityKind::P_AW, s, i, p) * duality_value(DualityKind::P_AW, s, j, pv) *
                                measure_weight(MeasureKind::W_L, s, p) *
                                omega_aw(total(s), total(i), lam, rho, K, v, q);
                       },
                       WR});
      break;
    }
    case Relation::AW_bi_R: {
      const T lam = p.need_lambda(), rho = p.need_rho(), v = p.need_v();
      if (lam > T(-1) || !(rho > T(-1))) violation("needs lambda <= -1 and rho > -1");
      for (const auto& [a, b] : index_pairs)
        if (!restricted_ok(a, p, lam) || !restricted_ok(b, p, lam)) violation("indices outside X_{d,lambda}");
      auto pv = pinv;
      pv.v = T(1) / v;
      // First index carries v^{-1}, second v.
      parts.push_back({"sum_xi", [=, &p](const Config& s, const Config& i, const Config& j) {
                         return duality_value(DualityKind::P_AW, j, s, pinv) * duality_value(DualityKind::P_AW, i, s, pv) *
                                measure_weight(MeasureKind::W_R, s, p) *
                                omega_aw(total(s), total(i), rho, lam, K, v, q);
                       },
                       WL});
      break;
    }
    case Relation::bigqjacobi: {
      const T rho = p.need_rho();
      p.need_v();
      if (rho > T(-1)) violation("needs rho <= -1");
      for (const auto& [a, b] : index_pairs)
        if (!restricted_ok(a, p, rho) || !restricted_ok(b, p, rho)) violation("indices outside X_{d,rho}");
      parts.push_back({"sum_eta", [&](const Config& s, const Config& i, const Config& j) {
                         return DV(DualityKind::P_BigQJacobi, s, i, p) * DV(DualityKind::P_BigQJacobi, s, j, p) * W(s) *
                                omega_factor(OmegaKind::J, total(s), total(i), p);
                       },
                       WR});
      break;
    }
    case Relation::bigqinvjacobi: {
      const T rho = p.need_rho();
      p.need_v();
      if (!(rho > T(-1))) violation("needs rho > -1");
      parts.push_back({"sum_xi", [&, pinv](const Config& s, const Config& i, const Config& j) {
                         return DV(DualityKind::P_BigQJacobi, i, s, pinv) * DV(DualityKind::P_BigQJacobi, j, s, pinv) *
                                WR(s) * omega_factor(OmegaKind::Jprime, total(i), total(s), p);
                       },
                       [pinv](const Config& i) { return measure_weight(MeasureKind::W_asip, i, pinv); }});
      break;
    }
    case Relation::qmeixner: {
      p.need_v();
      parts.push_back({"sum_eta", [&](const Config& s, const Config& i, const Config& j) {
                         return DV(DualityKind::P_QMeixner, s, i, p) * DV(DualityKind::P_QMeixner, s, j, p) * W(s) *
                                omega_factor(OmegaKind::M, total(s), total(i), p);
                       },
                       W});
      break;
    }
  }

  Residuals res;
  double tail = 0;
  long terms = 0;
  std::vector<std::string> flags;
  for (const auto& part : parts) {
    for (const auto& [a, b] : index_pairs) {
      const std::string what = part.name + " i=" + format_config(a) + " i'=" + format_config(b);
      try {
        const T na = part.norm(a), nb = part.norm(b);
        const T scale = sqrt(abs(na * nb));
        const auto sum = slice_sum<T>(M, always,
                                      [&](const Config& s) { return part.summand(s, a, b) * scale; }, opts);
        terms += sum.terms;
        tail = std::max(tail, sum.tail_bound);
        if (!sum.converged) res.error(what + ": truncation cap reached");
        if (a == b) {
          const T val = na < T(0) ? -sum.value : sum.value;
          res.record(to_double(abs(val - T(1))), to_double(abs(val - T(1))), what);
        } else {
          res.record(to_double(abs(sum.value)), to_double(abs(sum.value)), what);
        }
      } catch (const Error& e) {
        res.error(what + ": " + to_string(e.kind()) + ": " + e.what());
      }
    }
  }
  auto r = res.report(std::string("orthogonality:") + to_string(relation), describe(p), opts.tolerance);
  r.tail_bound = tail;
  r.pass = r.pass && tail < opts.tail_bound_tol;
  r.notes.push_back("diagonal: |sum N(i) - 1|; off-diagonal: |sum sqrt(|N(i) N(i')|)|; " + std::to_string(terms) +
                    " terms");
  return r;
}

template <class T>
T aw_scalar_product_v_bound(const ModelParams<T>& p, const Config& zeta, const Config& xi) {
  using std::pow;
  const auto hm = height_minus(zeta, p.k, p.need_lambda());
  const auto hp_ = height_plus(xi, p.k, p.need_rho());
  T bound = std::numeric_limits<T>::infinity();
  for (int j = 0; j < p.sites(); ++j)
    bound = std::min(bound, pow(p.q, T(2 * xi[j]) + p.k[j] + hp_[j + 2] - hm[j] - T(1)));
  return bound;
}

template <class T>
CheckReport aw_scalar_product_residual(const ModelParams<T>& p, const std::vector<std::pair<Config, Config>>& pairs,
                                       const OrthogonalityOptions& opts) {
  using std::abs;
  using std::pow;
  const T& v = p.need_v();
  if (!(p.need_lambda() > T(-1))) throw Error(ErrorKind::regime_violation, "regime violation: needs lambda > -1");
  const int M = p.sites();
  Residuals res;
  double tail = 0;
  for (const auto& [zeta, xi] : pairs) {
    const std::string what = "zeta=" + format_config(zeta) + " xi=" + format_config(xi);
    if (!(aw_scalar_product_v_bound(p, zeta, xi) > abs(v)))
      throw Error(ErrorKind::regime_violation, "regime violation: the eta-sum diverges for " + what);
    try {
      const auto sum = slice_sum<T>(
          M, [](int) { return true; },
          [&](const Config& eta) {
            return pow(v, T(total(eta))) * duality_value(DualityKind::P_L, eta, zeta, p) *
                   duality_value(DualityKind::P_R, eta, xi, p) * measure_weight(MeasureKind::W_asip, eta, p);
          },
          opts);
      tail = std::max(tail, sum.tail_bound);
      if (!sum.converged) res.error(what + ": truncation cap reached");
      T ksum = 0;
      for (const auto& kj : p.k) ksum += kj;
      const T shift = p.need_lambda() - p.need_rho() + T(1);
      const T pre = q_poch_inf_ratio(v * pow(p.q, T(-2 * total(xi)) - ksum + shift),
                                     v * pow(p.q, T(2 * total(zeta)) + ksum + shift), p.q * p.q);
      res.add(pre * sum.value, duality_value(DualityKind::P_AW, zeta, xi, p), what);
    } catch (const Error& e) {
      res.error(what + ": " + to_string(e.kind()) + ": " + e.what());
    }
  }
  auto r = res.report("aw-scalar-product", describe(p), opts.tolerance);
  r.tail_bound = tail;
  r.pass = r.pass && tail < opts.tail_bound_tol;
  return r;
}

std::vector<Params> GridSpec::points() const {
  std::vector<Params> out;
  auto opt = [](const std::vector<double>& v) {
    std::vector<std::optional<double>> r;
    if (v.empty()) r.push_back(std::nullopt);
    for (double x : v) r.push_back(x);
    return r;
  };
  const auto L = opt(lambda), R = opt(rho), V = opt(v), S = opt(sigma);
  for (double qq : q)
    for (const auto& kk : k)
      for (const auto& l : L)
        for (const auto& r : R)
          for (const auto& vv : V)
            for (const auto& s : S) {
              Params p;
              p.q = qq;
              p.k = kk;
              p.lambda = l;
              p.rho = r;
              p.v = vv;
              p.sigma = s;
              out.push_back(p);
            }
  return out;
}

namespace {

// Per-identity maxima collected into one report.
class IdentityTable {
 public:
  void add(const std::string& identity, double rel, double abs_res, const std::string& where) {
    res_.record(abs_res, rel, identity + " " + where);
    auto& m = max_[identity];
    m = std::max(m, rel);
  }
  void error(const std::string& s) { res_.error(s); }
  CheckReport report(const std::string& suite, const std::string& params, double tol) const {
    auto r = res_.report(suite, params, tol);
    for (const auto& [k, v] : max_) r.notes.push_back(k + ": " + format_real(v));
    return r;
  }

 private:
  Residuals res_;
  std::map<std::string, double> max_;
};

template <class T>
double floor_rel(const T& a, const T& b) {
  using std::abs;
  return to_double(abs(a - b) / std::max({abs(a), abs(b), T(1)}));
}

std::map<Config, hp> rate_map(const JumpList<hp>& jumps) {
  std::map<Config, hp> m;
  for (const auto& j : jumps) m[j.target] += j.rate;
  return m;
}

}  // namespace

CheckReport symmetry_checks(const std::vector<Params>& grid, int max_total) {
  using std::pow;
  IdentityTable tab;
  for (const auto& pd : grid) {
    const auto p = pd.as<hp>();
    const int M = p.sites();
    const auto states = enumerate_states(M, max_total);
    const std::string where = describe(pd);
    try {
      // q -> 1/q invariance of the dynamic rates and the bracket form.
      for (auto kind : {ProcessKind::ASIP_L, ProcessKind::ASIP_R}) {
        if (kind == ProcessKind::ASIP_L && !p.lambda) continue;
        if (kind == ProcessKind::ASIP_R && !p.rho) continue;
        const ProcessSpec<hp> a{kind, p}, b{kind, inverted(p)};
        for (const auto& s : states) {
          if (!state_space_contains(a, s)) continue;
          const auto ra = rate_map(jump_rates(a, s)), rb = rate_map(jump_rates(b, s)),
                     rc = rate_map(jump_rates_bracket(a, s));
          for (const auto& [t, r] : ra) {
            tab.add(std::string("q-inversion ") + to_string(kind), floor_rel(r, rb.at(t)), 0, where);
            tab.add(std::string("bracket-form ") + to_string(kind), floor_rel(r, rc.at(t)), 0, where);
          }
        }
      }
      // Site reversal: ASIP(q, k) <-> ASIP(1/q, reversed k); ASIP_L(lambda) <-> ASIP_R(rho = lambda).
      {
        auto prev = inverted(p);
        prev.k = reversed(p.k);
        const ProcessSpec<hp> a{ProcessKind::ASIP, p}, b{ProcessKind::ASIP, prev};
        for (const auto& s : states) {
          const auto rb = rate_map(jump_rates(b, reversed(s)));
          for (const auto& j : jump_rates(a, s))
            tab.add("site-reversal ASIP", floor_rel(j.rate, rb.at(reversed(j.target))), 0, where);
        }
        if (p.lambda) {
          auto pr = p;
          pr.k = reversed(p.k);
          pr.rho = p.lambda;
          pr.lambda.reset();
          const ProcessSpec<hp> l{ProcessKind::ASIP_L, p}, r{ProcessKind::ASIP_R, pr};
          for (const auto& s : states) {
            if (!state_space_contains(l, s)) continue;
            const auto rr = rate_map(jump_rates(r, reversed(s)));
            for (const auto& j : jump_rates(l, s))
              tab.add("site-reversal ASIP_L/ASIP_R", floor_rel(j.rate, rr.at(reversed(j.target))), 0, where);
          }
        }
      }
      // Particle-hole: c_j^+(q, -eta - k) = c_{j+1}^-(1/q, eta) and the mirrored relation.
      for (const auto& s : states) {
        std::vector<hp> e, h;
        for (int j = 0; j < M; ++j) {
          e.push_back(hp(s[j]));
          h.push_back(-hp(s[j]) - p.k[j]);
        }
        for (int j = 0; j + 1 < M; ++j) {
          tab.add("particle-hole",
                  floor_rel(asip_rate_plus(h, p.k, p.q, j), asip_rate_minus(e, p.k, hp(1) / p.q, j + 1)), 0, where);
          tab.add("particle-hole",
                  floor_rel(asip_rate_minus(h, p.k, p.q, j + 1), asip_rate_plus(e, p.k, hp(1) / p.q, j)), 0, where);
        }
      }
      // P_AW: v -> 1/v changes it by a factor of the totals only; (q, v) -> (1/q, 1/v).
      if (p.lambda && p.rho && p.v) {
        const hp lam = *p.lambda, rho = *p.rho, v = *p.v, K = p.k_total();
        auto pv = p;
        pv.v = hp(1) / v;
        auto pqv = inverted(pv);
        const ProcessSpec<hp> L{ProcessKind::ASIP_L, p}, R{ProcessKind::ASIP_R, p};
        std::map<std::pair<int, int>, hp> ratio;
        for (const auto& z : states) {
          if (!state_space_contains(L, z)) continue;
          for (const auto& x : states) {
            if (!state_space_contains(R, x)) continue;
            const hp a = duality_value(DualityKind::P_AW, z, x, p);
            const hp b = duality_value(DualityKind::P_AW, z, x, pv);
            const int Z = total(z), X = total(x);
            const auto key = std::make_pair(Z, X);
            if (a != hp(0)) {
              auto it = ratio.find(key);
              if (it == ratio.end())
                ratio.emplace(key, b / a);
              else
                tab.add("P_AW v-inversion factor", pure_rel(b / a, it->second), 0, where);
            }
            const hp c = duality_value(DualityKind::P_AW, z, x, pqv);
            const hp pre = pow(-hp(1) / v, hp(Z + X)) *
                           pow(p.q, hp(Z) * (hp(Z) + K + lam + rho) - hp(X) * (hp(X) + K + lam + rho));
            tab.add("P_AW (q,v)-inversion", floor_rel(c, pre * a), 0, where);
          }
        }
      }
      // Dynamic ABEP: sigma -> -sigma invariance and sinh versus exponential forms.
      if (p.lambda && p.sigma && *p.lambda > hp(0)) {
        const hp s = *p.sigma, lam = *p.lambda;
        auto pm = p;
        pm.sigma = -s;
        const ProcessSpec<hp> a{ProcessKind::ABEP_L, p}, b{ProcessKind::ABEP_L, pm};
        for (const auto& x : std::vector<std::vector<double>>{{0.4, 1.1, 0.7}, {1.3, 0.2, 0.9}, {0.6, 0.6, 1.7}}) {
          std::vector<hp> xx;
          for (int j = 0; j < M; ++j) xx.push_back(hp(x[j % 3]));
          const auto ca = diffusion_coefficients(a, xx), cb = diffusion_coefficients(b, xx);
          const auto ce = abep_l_coefficients_exp(xx, p.k, s, lam);
          for (int j = 0; j + 1 < M; ++j) {
            tab.add("sigma-inversion A", floor_rel(ca.A[j], cb.A[j]), 0, where);
            tab.add("sigma-inversion B", floor_rel(ca.B[j], cb.B[j]), 0, where);
            tab.add("sinh-exp A", floor_rel(ca.A[j], ce.A[j]), 0, where);
            tab.add("sinh-exp B", floor_rel(ca.B[j], ce.B[j]), 0, where);
          }
        }
      }
    } catch (const Error& e) {
      tab.error(where + ": " + to_string(e.kind()) + ": " + e.what());
    } catch (const std::out_of_range&) {
      tab.error(where + ": a jump present on one side is missing on the other");
    }
  }
  return tab.report("symmetry", std::to_string(grid.size()) + " grid points", 1e-12);
}

std::vector<double> empirical_orders(const std::vector<double>& steps, const std::vector<double>& errors) {
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < steps.size() && i + 1 < errors.size(); ++i)
    out.push_back(std::log(errors[i] / errors[i + 1]) / std::log(steps[i] / steps[i + 1]));
  return out;
}

std::vector<ScalingErrors> eps_scaling_errors(const std::vector<hp>& x, const std::vector<hp>& k, const hp& sigma,
                                              const hp& lambda, const std::vector<double>& eps_values) {
  using boost::multiprecision::abs;
  using boost::multiprecision::floor;
  ModelParams<hp> pc;
  pc.k = k;
  pc.sigma = sigma;
  pc.lambda = lambda;
  const auto c = diffusion_coefficients(ProcessSpec<hp>{ProcessKind::ABEP_L, pc}, x);
  std::vector<ScalingErrors> out;
  for (double ed : eps_values) {
    const hp e = hp(ed);
    // floor(x/eps); the slack absorbs binary representation of x and eps, which would
    // otherwise drop a lattice site when x/eps is an integer.
    Config z;
    for (const auto& xi : x) z.push_back(static_cast<int>(floor(xi / e + hp(1e-9))));
    ModelParams<hp> pd;
    pd.k = k;
    pd.q = hp(1) - e * sigma;
    pd.lambda = lambda / e;
    const auto rates = rate_map(jump_rates(ProcessSpec<hp>{ProcessKind::ASIP_L, pd}, z));
    ScalingErrors row;
    row.eps = ed;
    for (std::size_t j = 0; j + 1 < x.size(); ++j) {
      const hp cp = rates.at(moved(z, static_cast<int>(j), static_cast<int>(j + 1)));
      const hp cm = rates.at(moved(z, static_cast<int>(j + 1), static_cast<int>(j)));
      row.plus = std::max(row.plus, to_double(abs(e * e * cp - c.A[j])));
      row.minus = std::max(row.minus, to_double(abs(e * e * cm - c.A[j])));
      row.drift = std::max(row.drift, to_double(abs(e * (cm - cp) - c.B[j])));
    }
    out.push_back(row);
  }
  return out;
}

namespace {

// One limit: errors at successive surrogate values, the final error bound and the
// minimal acceptable shrink factor between consecutive surrogates.
CheckReport limit_report(const std::string& name, const std::string& params, const std::vector<double>& errors,
                         double final_tol, double min_shrink, double floor_err = 1e-26) {
  CheckReport r;
  r.suite = "limit:" + name;
  r.params = params;
  r.n_cases = static_cast<long>(errors.size());
  r.max_abs = errors.empty() ? INFINITY : errors.back();
  r.max_rel = r.max_abs;
  r.tolerance = final_tol;
  bool ok = !errors.empty() && errors.back() < final_tol;
  std::string trail;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    if (!std::isfinite(errors[i])) ok = false;
    trail += (i ? " -> " : "") + format_real(errors[i]);
    if (i > 0 && errors[i] > floor_err && !(errors[i] * min_shrink <= errors[i - 1])) ok = false;
  }
  r.worst_case = trail;
  r.pass = ok;
  r.notes.push_back("errors " + trail + "; required shrink factor " + format_real(min_shrink));
  return r;
}

}  // namespace

CheckReport limit_checks(const std::vector<Params>& grid, unsigned groups) {
  auto on = [groups](LimitGroup g) { return (groups & static_cast<unsigned>(g)) != 0; };
  using std::pow;
  std::vector<CheckReport> parts;
  for (const auto& pd : grid) {
    const auto p = pd.as<hp>();
    const std::string where = describe(pd);
    const int M = p.sites();
    const hp q = p.q;
    const hp K = p.k_total();
    const auto states = enumerate_states(M, 3);
    try {
      // Dynamic rates against ASIP(q^{+-1}) as the boundary runs off to +-infinity.
      const ProcessSpec<hp> asip_q{ProcessKind::ASIP, p}, asip_qi{ProcessKind::ASIP, inverted(p)};
      struct Dir {
        ProcessKind kind;
        double sign;
        const ProcessSpec<hp>* target;
        const char* name;
      };
      const Dir dirs[] = {{ProcessKind::ASIP_L, 1, &asip_q, "ASIP_L lambda->+inf"},
                          {ProcessKind::ASIP_L, -1, &asip_qi, "ASIP_L lambda->-inf"},
                          {ProcessKind::ASIP_R, 1, &asip_qi, "ASIP_R rho->+inf"},
                          {ProcessKind::ASIP_R, -1, &asip_q, "ASIP_R rho->-inf"}};
      for (const auto& d : dirs) {
        if (!on(LimitGroup::boundary_rates)) break;
        std::vector<double> errs;
        for (double a : {10.0, 20.0}) {
          auto pp = p;
          const hp b = hp(d.sign * a) - (d.sign < 0 ? K : hp(0));
          if (d.kind == ProcessKind::ASIP_L) pp.lambda = b;
          else pp.rho = b;
          const ProcessSpec<hp> dyn{d.kind, pp};
          double e = 0;
          for (const auto& s : states) {
            if (!state_space_contains(dyn, s)) continue;
            const auto rt = rate_map(jump_rates(*d.target, s));
            for (const auto& j : jump_rates(dyn, s)) e = std::max(e, floor_rel(j.rate, rt.at(j.target)));
          }
          errs.push_back(e);
        }
        // Claimed O(q^{2a}) for a boundary a; demand at least half the exponent.
        parts.push_back(limit_report(std::string("rates ") + d.name, where, errs, 1e-6, to_double(pow(q, -hp(10)))));
      }
      // q^{-2 lambda |eta|} W_L(eta) -> q^{|eta|(2|eta| - 1)} W(eta).
      if (on(LimitGroup::measure)) {
        std::vector<double> errs;
        for (double lam : {20.0, 40.0}) {
          auto pp = p;
          pp.lambda = hp(lam);
          double e = 0;
          for (const auto& s : states) {
            const hp n = hp(total(s));
            const hp a = pow(q, -hp(2) * hp(lam) * n) * measure_weight(MeasureKind::W_L, s, pp);
            const hp b = pow(q, n * (hp(2) * n - hp(1))) * measure_weight(MeasureKind::W_asip, s, pp);
            e = std::max(e, pure_rel(a, b));
          }
          errs.push_back(e);
        }
        parts.push_back(limit_report("measure W_L lambda->inf", where, errs, 1e-6, to_double(pow(q, -hp(20)))));
      }
      // w_dyn / (1 - q^2)^k -> w_hat_dyn as q -> 1, both branches.
      for (double a : {0.3, -4.5}) {
        if (!on(LimitGroup::q_to_one)) break;
        std::vector<double> errs;
        const hp k = p.k[0];
        for (double qq : {0.999, 0.9999}) {
          const auto br = branch_for(hp(a));
          double e = 0;
          for (int z = 0; z <= 3; ++z) {
            if (a <= -1 && !(hp(2 * z) + k + hp(a) < hp(0))) continue;
            const hp lhs = w_dyn(z, hp(a), k, hp(qq), br) / pow(hp(1) - hp(qq) * hp(qq), k);
            e = std::max(e, pure_rel(lhs, w_hat_dyn(z, hp(a), k, br)));
          }
          errs.push_back(e);
        }
        parts.push_back(limit_report("w_dyn q->1 a=" + format_real(a), where, errs, 1e-2, 5.0));
      }
      // P_AW -> P_BigQJacobi and P_BigQJacobi -> P_QMeixner.
      if (on(LimitGroup::degenerations) && p.rho && p.v) {
        std::vector<double> errs;
        for (double lam : {20.0, 40.0}) {
          auto pa = p;
          pa.lambda = hp(lam);
          pa.v = *p.v * pow(q, hp(lam));
          double e = 0;
          const ProcessSpec<hp> R{ProcessKind::ASIP_R, p};
          for (const auto& z : enumerate_states(M, 2))
            for (const auto& x : enumerate_states(M, 2)) {
              if (!state_space_contains(R, x)) continue;
              e = std::max(e, floor_rel(duality_value(DualityKind::P_AW, z, x, pa),
                                        duality_value(DualityKind::P_BigQJacobi, z, x, p)));
            }
          errs.push_back(e);
        }
        parts.push_back(limit_report("P_AW->P_BigQJacobi", where, errs, 1e-6, 10.0));
      }
      if (on(LimitGroup::degenerations) && p.v) {
        std::vector<double> errs;
        for (double rho : {-20.0, -40.0}) {
          auto pj = p;
          pj.rho = hp(rho);
          pj.v = *p.v * pow(q, -hp(rho));
          double e = 0;
          for (const auto& z : enumerate_states(M, 2))
            for (const auto& x : enumerate_states(M, 2))
              e = std::max(e, floor_rel(duality_value(DualityKind::P_BigQJacobi, z, x, pj),
                                        duality_value(DualityKind::P_QMeixner, z, x, p)));
          errs.push_back(e);
        }
        parts.push_back(limit_report("P_BigQJacobi->P_QMeixner", where, errs, 1e-6, 10.0));
      }
      if (p.sigma && p.lambda && *p.lambda > hp(0) && M >= 2) {
        const hp s = *p.sigma, lam = *p.lambda;
        std::vector<hp> x;
        for (int j = 0; j < M; ++j) x.push_back(hp(0.4 + 0.35 * j));
        // Epsilon scaling of the dynamic ASIP_L rates, first order.
        const std::vector<double> eps = {1e-2, 5e-3, 2.5e-3};
        const auto rows = on(LimitGroup::eps_scaling) ? eps_scaling_errors(x, p.k, s, lam, eps)
                                                      : std::vector<ScalingErrors>{};
        std::vector<double> ep, em, ed;
        for (const auto& r : rows) {
          ep.push_back(r.plus);
          em.push_back(r.minus);
          ed.push_back(r.drift);
        }
        for (const auto& [nm, errs] : {std::pair{"eps-scaling C+", ep}, {"eps-scaling C-", em}, {"eps-scaling drift", ed}}) {
          if (rows.empty()) break;
          auto r = limit_report(nm, where, errs, 1.0, 1.5);
          for (double o : empirical_orders(eps, errs))
            if (!(std::abs(o - 1.0) <= 0.4)) r.pass = false;
          parts.push_back(r);
        }
        // Scaled P_L -> D'.
        if (on(LimitGroup::pl_to_dprime)) {
          std::vector<double> errs;
          ModelParams<hp> pdp = p;
          for (double e : {1e-2, 1e-3}) {
            ModelParams<hp> pl;
            pl.k = p.k;
            pl.q = hp(1) - hp(e) * s;
            pl.lambda = lam / hp(e);
            Config z;
            std::vector<hp> xs;
            for (const auto& xi : x) {
              z.push_back(static_cast<int>(boost::multiprecision::floor(xi / hp(e))));
              xs.push_back(hp(z.back()) * hp(e));
            }
            const hp pre = (hp(1) - pow(hp(1) - hp(e) * s, -hp(2))) / (hp(2) * s);
            double err = 0;
            for (const auto& eta : enumerate_states(M, 2)) {
              const hp a = pow(pre, hp(total(eta))) * duality_value(DualityKind::P_L, eta, z, pl);
              const hp b = duality_value(DualityKind::D_prime, xs, eta, pdp);
              err = std::max(err, pure_rel(a, b));
            }
            errs.push_back(err);
          }
          parts.push_back(limit_report("P_L->D'", where, errs, 1e-2, 5.0));
        }
        // Dynamic ABEP coefficients against ABEP(+-sigma) as lambda -> +-infinity.
        for (double sg : {1.0, -1.0}) {
          if (!on(LimitGroup::abep)) break;
          std::vector<double> errs;
          for (double l : {5.0, 10.0}) {
            auto pa = p;
            pa.lambda = hp(sg * l) - (sg < 0 ? hp(10) : hp(0));
            auto pb = p;
            pb.sigma = hp(sg) * s;
            const ProcessSpec<hp> dyn{ProcessKind::ABEP_L, pa}, lim{ProcessKind::ABEP, pb};
            if (!state_space_contains(dyn, x)) continue;
            const auto a = diffusion_coefficients(dyn, x), b = diffusion_coefficients(lim, x);
            double e = 0;
            for (int j = 0; j + 1 < M; ++j)
              e = std::max({e, floor_rel(a.A[j], b.A[j]), floor_rel(a.B[j], b.B[j])});
            errs.push_back(e);
          }
          parts.push_back(limit_report(std::string("ABEP_L lambda->") + (sg > 0 ? "+inf" : "-inf"), where, errs, 1e-3,
                                       to_double(boost::multiprecision::exp(s * hp(5)))));
        }
        // sigma -> 0 gives the dynamic BEP.
        if (on(LimitGroup::abep)) {
          std::vector<double> errs;
          for (double sv : {1e-2, 5e-3}) {
            auto pa = p;
            pa.sigma = hp(sv);
            const ProcessSpec<hp> dyn{ProcessKind::ABEP_L, pa}, lim{ProcessKind::BEP_L, p};
            const auto a = diffusion_coefficients(dyn, x), b = diffusion_coefficients(lim, x);
            double e = 0;
            for (int j = 0; j + 1 < M; ++j)
              e = std::max({e, floor_rel(a.A[j], b.A[j]), floor_rel(a.B[j], b.B[j])});
            errs.push_back(e);
          }
          parts.push_back(limit_report("ABEP_L sigma->0", where, errs, 1e-3, 3.0));
        }
      }
    } catch (const Error& e) {
      CheckReport r;
      r.suite = "limit";
      r.params = where;
      r.errors.push_back(std::string(to_string(e.kind())) + ": " + e.what());
      parts.push_back(r);
    } catch (const std::out_of_range&) {
      CheckReport r;
      r.suite = "limit";
      r.params = where;
      r.errors.push_back("a jump present on one side is missing on the other");
      parts.push_back(r);
    }
  }
  auto merged = merge_reports("limits", parts);
  for (const auto& p : parts)
    merged.notes.push_back(p.suite + " [" + p.params + "] " + (p.pass ? "ok " : "FAIL ") + p.worst_case);
  return merged;
}

CheckReport merge_reports(const std::string& suite, const std::vector<CheckReport>& parts) {
  CheckReport r;
  r.suite = suite;
  r.pass = !parts.empty();
  double worst = -1;
  for (const auto& p : parts) {
    r.n_cases += p.n_cases;
    r.max_abs = std::max(r.max_abs, p.max_abs);
    const double scaled = p.tolerance > 0 ? p.max_rel / p.tolerance : p.max_rel;
    if (scaled > worst) {
      worst = scaled;
      r.max_rel = p.max_rel;
      r.tolerance = p.tolerance;
      if (p.worst_case.empty()) r.worst_case = p.params;
      else if (p.worst_case.rfind(p.params, 0) == 0) r.worst_case = p.worst_case;  // already prefixed
      else r.worst_case = p.params + ": " + p.worst_case;
    }
    if (p.tail_bound) r.tail_bound = std::max(r.tail_bound.value_or(0.0), *p.tail_bound);
    r.pass = r.pass && p.pass;
    for (const auto& e : p.errors) r.errors.push_back(p.suite + ": " + e);
    for (const auto& f : p.flags)
      if (std::find(r.flags.begin(), r.flags.end(), f) == r.flags.end()) r.flags.push_back(f);
    if (!p.pass && p.errors.empty()) r.notes.push_back("failed: " + p.suite + " [" + p.params + "]");
  }
  if (parts.size() == 1) {
    r.params = parts.front().params;
  } else {
    r.params = std::to_string(parts.size()) + " parts";
  }
  return r;
}

std::vector<CheckReport> run_parallel(const std::vector<std::function<CheckReport()>>& tasks, int jobs) {
  std::vector<CheckReport> out(tasks.size());
  auto run_one = [&](std::size_t i) {
    try {
      out[i] = tasks[i]();
    } catch (const Error& e) {
      out[i].errors.push_back(std::string(to_string(e.kind())) + ": " + e.what());
      out[i].pass = false;
    } catch (const std::exception& e) {
      out[i].errors.push_back(e.what());
      out[i].pass = false;
    }
  };
  jobs = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) run_one(i);
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < tasks.size(); i = next++) run_one(i);
    });
  for (auto& th : pool) th.join();
  return out;
}

#define DL_INSTANTIATE_VERIFY(T)                                                                                   \
  template struct DualityPair<T>;                                                                                  \
  template DualityPair<T> make_duality_pair(DualityKind, const ModelParams<T>&);                                   \
  template CheckReport duality_residual(const DualityPair<T>&, const std::vector<Config>&,                         \
                                        const std::vector<Config>&, const DualityOptions&);                        \
  template CheckReport duality_residual(const DualityPair<T>&, const std::vector<std::vector<T>>&,                 \
                                        const std::vector<Config>&, const DualityOptions&);                        \
  template CheckReport bessel_duality_residual(const ModelParams<T>&, const std::vector<std::vector<T>>&,          \
                                               const std::vector<std::vector<T>>&, const DualityOptions&);         \
  template CheckReport g_intertwining_residual(const ModelParams<T>&, const std::vector<std::vector<T>>&,          \
                                               const DualityOptions&);                                             \
  template CheckReport detailed_balance_residual(const ProcessSpec<T>&, MeasureKind, const std::vector<Config>&,   \
                                                 double);                                                          \
  template CheckReport mu_l_pushforward_residual(const ModelParams<T>&, const std::vector<std::vector<T>>&,        \
                                                 double);                                                          \
  template CheckReport mu_l_symmetry_residual(const ModelParams<T>&, const std::vector<std::vector<T>>&,           \
                                              const DualityOptions&);                                              \
  template CheckReport generator_symmetry_residual(const ModelParams<T>&, int, double);                            \
  template CheckReport orthogonality_residual(Relation, const ModelParams<T>&,                                     \
                                              const std::vector<std::pair<Config, Config>>&,                       \
                                              const OrthogonalityOptions&);                                        \
  template T aw_scalar_product_v_bound(const ModelParams<T>&, const Config&, const Config&);                      \
  template CheckReport aw_scalar_product_residual(const ModelParams<T>&,                                           \
                                                  const std::vector<std::pair<Config, Config>>&,                   \
                                                  const OrthogonalityOptions&);

DL_INSTANTIATE_VERIFY(double)
DL_INSTANTIATE_VERIFY(hp)

}  // namespace duality_lab
