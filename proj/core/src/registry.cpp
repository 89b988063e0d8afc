#include <duality_lab/algebra.hpp>
#include <duality_lab/registry.hpp>
#include <duality_lab/simulate.hpp>

#include <algorithm>
#include <cmath>
#include <optional>

namespace duality_lab {

double Suite::tolerance_for(const SuiteOptions& opts) const {
  const auto it = opts.tolerances.find(name);
  if (it != opts.tolerances.end()) return it->second;
  if (opts.richardson && richardson_tolerance > 0) return richardson_tolerance;
  return tolerance;
}

CheckReport skipped_report(const std::string& suite, const Params& p, const std::string& reason) {
  CheckReport r;
  r.suite = suite;
  r.params = describe(p);
  r.pass = true;
  r.flags.push_back("skipped");
  r.notes.push_back(reason);
  return r;
}

bool is_skipped(const CheckReport& r) {
  return r.n_cases == 0 && std::find(r.flags.begin(), r.flags.end(), "skipped") != r.flags.end();
}

std::vector<std::vector<double>> sample_points(int M, int count, double lo, double hi) {
  // Generalized golden-ratio sequence: alpha_j = phi_M^{-(j+1)} with phi_M^{M+1} = phi_M + 1.
  double phi = 2.0;
  for (int it = 0; it < 60; ++it) phi = std::pow(1.0 + phi, 1.0 / (M + 1));
  std::vector<std::vector<double>> out;
  for (int n = 1; n <= count; ++n) {
    std::vector<double> x;
    for (int j = 0; j < M; ++j) {
      const double a = std::pow(1.0 / phi, j + 1);
      const double u = std::fmod(0.5 + a * n, 1.0);
      x.push_back(lo + (hi - lo) * u);
    }
    out.push_back(x);
  }
  return out;
}

namespace {

[[noreturn]] void regime(const std::string& why) { throw Error(ErrorKind::regime_violation, why); }

const double& need(const std::optional<double>& x, const char* name) {
  if (!x) regime(std::string("needs ") + name);
  return *x;
}

Params first_sites(Params p, int n) {
  if (static_cast<int>(p.k.size()) < n) regime("needs " + std::to_string(n) + " sites");
  p.k.resize(n);
  return p;
}

// Collects the parts of a suite; parts outside their regime are noted and left out.
class Parts {
 public:
  template <class F>
  void add(const std::string& what, F&& f) {
    try {
      done_.push_back(f());
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::regime_violation) throw;
      skipped_.push_back(what + ": " + e.what());
    }
  }
  void push(CheckReport r) { done_.push_back(std::move(r)); }

  CheckReport finish(const std::string& suite, const Params& p) const {
    if (done_.empty()) {
      std::string why;
      for (const auto& s : skipped_) why += (why.empty() ? "" : "; ") + s;
      regime(why.empty() ? "nothing to check at this point" : why);
    }
    auto r = merge_reports(suite, done_);
    r.params = describe(p);
    for (const auto& s : skipped_) r.notes.push_back("skipped " + s);
    for (const auto& d : done_)
      for (const auto& n : d.notes) r.notes.push_back(d.suite + ": " + n);
    return r;
  }

 private:
  std::vector<CheckReport> done_;
  std::vector<std::string> skipped_;
};

template <class F>
CheckReport in_precision(Precision pr, F&& f) {
  if (pr == Precision::high) return f(hp{});
  return f(double{});
}

using IndexPairs = std::vector<std::pair<Config, Config>>;

IndexPairs index_pairs(int M, int max_index, const std::function<bool(const Config&)>& keep) {
  std::vector<Config> s;
  for (const auto& c : enumerate_states(M, max_index))
    if (keep(c)) s.push_back(c);
  IndexPairs out;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i; j < s.size(); ++j) out.emplace_back(s[i], s[j]);
  return out;
}

bool in_restricted(const Config& c, const Params& p, double boundary) {
  return boundary > -1 || 2.0 * total(c) + total(p.k) + boundary < 0;
}

DualityOptions fd_options(const SuiteOptions& o, double tol) {
  DualityOptions d;
  d.tolerance = tol;
  d.stencil.richardson = o.richardson;
  return d;
}

// ---- discrete dualities ----

CheckReport discrete_duality(DualityKind kind, const Params& pd, const SuiteOptions& o, double tol) {
  return in_precision(o.precision, [&](auto tag) {
    using T = decltype(tag);
    const auto pair = make_duality_pair(kind, pd.as<T>());
    DualityOptions d;
    d.tolerance = tol;
    const auto S = enumerate_states(pd.k.size(), o.max_total);
    auto r = duality_residual(pair, S, S, d);
    r.suite = std::string("duality:") + to_string(kind);
    return r;
  });
}

CheckReport suite_asc_duality(const Params& p, const SuiteOptions& o, double tol) {
  need(p.rho, "rho");
  return discrete_duality(DualityKind::P_R, p, o, tol);
}

CheckReport suite_asip_l_duality(const Params& p, const SuiteOptions& o, double tol) {
  need(p.lambda, "lambda");
  return discrete_duality(DualityKind::P_L, p, o, tol);
}

CheckReport suite_aw_duality(const Params& p, const SuiteOptions& o, double tol) {
  need(p.lambda, "lambda");
  need(p.rho, "rho");
  need(p.v, "v");
  return discrete_duality(DualityKind::P_AW, p, o, tol);
}

CheckReport suite_wilson_duality(const Params& p, const SuiteOptions& o, double tol) {
  need(p.lambda, "lambda");
  need(p.rho, "rho");
  need(p.v, "v");
  return discrete_duality(DualityKind::P_Wilson, p, o, tol);
}

CheckReport suite_degenerate_duality(const Params& p, const SuiteOptions& o, double tol) {
  need(p.v, "v");
  Parts parts;
  parts.add("P_BigQJacobi", [&] {
    need(p.rho, "rho");
    return discrete_duality(DualityKind::P_BigQJacobi, p, o, tol);
  });
  parts.add("P_QMeixner", [&] { return discrete_duality(DualityKind::P_QMeixner, p, o, tol); });
  parts.add("P_BigQLaguerre", [&] { return discrete_duality(DualityKind::P_BigQLaguerre, p, o, tol); });
  return parts.finish("degenerate-duality", p);
}

CheckReport suite_triangular_duality(const Params& p, const SuiteOptions& o, double tol) {
  Parts parts;
  parts.add("D_triangular", [&] { return discrete_duality(DualityKind::D_triangular, p, o, tol); });
  parts.add("D_qqinv", [&] { return discrete_duality(DualityKind::D_qqinv, p, o, tol); });
  return parts.finish("triangular-duality", p);
}

CheckReport suite_generator_symmetry(const Params& p, const SuiteOptions& o, double tol) {
  need(p.lambda, "lambda");
  need(p.rho, "rho");
  return in_precision(o.precision, [&](auto tag) {
    using T = decltype(tag);
    return generator_symmetry_residual(p.as<T>(), o.max_total + 1, tol);
  });
}

// ---- reversibility ----

CheckReport suite_reversibility_asip(const Params& p, const SuiteOptions& o, double tol) {
  Parts parts;
  const auto S = enumerate_states(p.k.size(), o.max_total + 1);
  auto run = [&](ProcessKind kind, MeasureKind m) {
    return in_precision(o.precision, [&](auto tag) {
      using T = decltype(tag);
      auto r = detailed_balance_residual(ProcessSpec<T>{kind, p.as<T>()}, m, S, tol);
      r.suite = std::string("detailed-balance:") + to_string(kind) + "/" + to_string(m);
      return r;
    });
  };
  parts.add("ASIP/W", [&] { return run(ProcessKind::ASIP, MeasureKind::W_asip); });
  parts.add("ASIP_L/W_L", [&] {
    need(p.lambda, "lambda");
    return run(ProcessKind::ASIP_L, MeasureKind::W_L);
  });
  parts.add("ASIP_R/W_R", [&] {
    need(p.rho, "rho");
    return run(ProcessKind::ASIP_R, MeasureKind::W_R);
  });
  return parts.finish("reversibility-asip", p);
}

CheckReport suite_reversibility_sip(const Params& p, const SuiteOptions& o, double tol) {
  Parts parts;
  const auto S = enumerate_states(p.k.size(), o.max_total + 1);
  auto run = [&](ProcessKind kind, MeasureKind m) {
    return in_precision(o.precision, [&](auto tag) {
      using T = decltype(tag);
      auto r = detailed_balance_residual(ProcessSpec<T>{kind, p.as<T>()}, m, S, tol);
      r.suite = std::string("detailed-balance:") + to_string(kind) + "/" + to_string(m);
      return r;
    });
  };
  parts.add("SIP_L/W_hat_L", [&] {
    need(p.lambda, "lambda");
    return run(ProcessKind::SIP_L, MeasureKind::W_hat_L);
  });
  parts.add("SIP_R/W_hat_R", [&] {
    need(p.rho, "rho");
    return run(ProcessKind::SIP_R, MeasureKind::W_hat_R);
  });
  // The SIP weights are the q -> 1 limit of the ASIP weights.
  parts.push(limit_checks({p}, static_cast<unsigned>(LimitGroup::q_to_one)));
  return parts.finish("reversibility-sip", p);
}

CheckReport suite_mul_reversibility(const Params& p, const SuiteOptions& o, double tol) {
  need(p.lambda, "lambda");
  need(p.sigma, "sigma");
  const int M = static_cast<int>(p.k.size());
  const ProcessSpec<double> spec{ProcessKind::ABEP_L, p};
  std::vector<std::vector<double>> xs;
  for (const auto& x : sample_points(M, o.n_points))
    if (state_space_contains(spec, x)) xs.push_back(x);
  if (xs.empty()) regime("no sample point inside the state space");
  Parts parts;
  parts.push(mu_l_pushforward_residual(p, xs, 1e-10));
  parts.push(mu_l_symmetry_residual(p, xs, fd_options(o, tol)));
  return parts.finish("mul-reversibility", p);
}

// ---- orthogonality ----

CheckReport orth(Relation rel, const Params& p, const IndexPairs& pairs, const SuiteOptions& o, double tol) {
  if (pairs.empty()) regime("no admissible index pair");
  OrthogonalityOptions oo;
  oo.tolerance = tol;
  return in_precision(o.precision, [&](auto tag) {
    using T = decltype(tag);
    return orthogonality_residual(rel, p.as<T>(), pairs, oo);
  });
}

CheckReport suite_orth_asc_onesite(const Params& pt, const SuiteOptions& o, double tol) {
  const Params p = first_sites(pt, 1);
  const double k = p.k[0];
  const int top = 2 * o.max_index;
  IndexPairs all;
  for (int a = 0; a <= top; ++a)
    for (int b = a; b <= top; ++b) all.push_back({{a}, {b}});
  Parts parts;
  parts.add("orthASC_qinv", [&] {
    if (!(need(p.lambda, "lambda") > -1)) regime("needs lambda > -1");
    return orth(Relation::orth_asc_qinv, p, all, o, tol);
  });
  parts.add("dualorthASC_qinv", [&] {
    if (!(need(p.lambda, "lambda") > -1)) regime("needs lambda > -1");
    return orth(Relation::dualorth_asc_qinv, p, all, o, tol);
  });
  parts.add("dualorthASC_q", [&] {
    const double rho = need(p.rho, "rho");
    if (rho > -1) regime("needs rho <= -1");
    IndexPairs ok;
    for (const auto& [a, b] : all)
      if (a[0] + b[0] + rho + k < 0) ok.push_back({a, b});
    return orth(Relation::dualorth_asc_q, p, ok, o, tol);
  });
  return parts.finish("orth-asc-onesite", pt);
}

CheckReport suite_orth_asc(const Params& p, const SuiteOptions& o, double tol) {
  const int M = static_cast<int>(p.k.size());
  Parts parts;
  parts.add("P_L", [&] {
    if (!(need(p.lambda, "lambda") > -1)) regime("needs lambda > -1");
    return orth(Relation::P_L_both, p, index_pairs(M, o.max_index, [](const Config&) { return true; }), o, tol);
  });
  parts.add("P_R", [&] {
    const double rho = need(p.rho, "rho");
    if (rho > -1) regime("needs rho <= -1");
    return orth(Relation::P_R, p,
                index_pairs(M, o.max_index, [&](const Config& c) { return in_restricted(c, p, rho); }), o, tol);
  });
  return parts.finish("orth-asc", p);
}

CheckReport suite_aw_biorthogonality(const Params& p, const SuiteOptions& o, double tol) {
  const int M = static_cast<int>(p.k.size());
  const double lam = need(p.lambda, "lambda"), rho = need(p.rho, "rho");
  need(p.v, "v");
  Parts parts;
  parts.add("AW_bi_L", [&] {
    if (!(lam > -1) || rho > -1) regime("needs lambda > -1 and rho <= -1");
    return orth(Relation::AW_bi_L, p,
                index_pairs(M, o.max_index, [&](const Config& c) { return in_restricted(c, p, rho); }), o, tol);
  });
  parts.add("AW_bi_R", [&] {
    if (lam > -1 || !(rho > -1)) regime("needs lambda <= -1 and rho > -1");
    return orth(Relation::AW_bi_R, p,
                index_pairs(M, o.max_index, [&](const Config& c) { return in_restricted(c, p, lam); }), o, tol);
  });
  return parts.finish("aw-biorthogonality", p);
}

CheckReport suite_orth_bigqjacobi(const Params& p, const SuiteOptions& o, double tol) {
  const double rho = need(p.rho, "rho");
  need(p.v, "v");
  if (rho > -1) regime("needs rho <= -1");
  return orth(Relation::bigqjacobi, p,
              index_pairs(p.k.size(), o.max_index, [&](const Config& c) { return in_restricted(c, p, rho); }), o,
              tol);
}

CheckReport suite_orth_bigqinvjacobi(const Params& p, const SuiteOptions& o, double tol) {
  const double rho = need(p.rho, "rho");
  need(p.v, "v");
  if (!(rho > -1)) regime("needs rho > -1");
  return orth(Relation::bigqinvjacobi, p, index_pairs(p.k.size(), o.max_index, [](const Config&) { return true; }),
              o, tol);
}

CheckReport suite_orth_qmeixner(const Params& p, const SuiteOptions& o, double tol) {
  need(p.v, "v");
  return orth(Relation::qmeixner, p, index_pairs(p.k.size(), o.max_index, [](const Config&) { return true; }), o,
              tol);
}

CheckReport suite_aw_scalar_product(const Params& p, const SuiteOptions& o, double tol) {
  if (!(need(p.lambda, "lambda") > -1)) regime("needs lambda > -1");
  need(p.rho, "rho");
  const double v = need(p.v, "v");
  const int M = static_cast<int>(p.k.size());
  const auto pairs = index_pairs(M, std::min(o.max_index, 2), [](const Config&) { return true; });
  return in_precision(o.precision, [&](auto tag) {
    using T = decltype(tag);
    auto pt = p.as<T>();
    // The eta-sum converges only for small |v|; shrink v into that disc if needed.
    T bound = std::numeric_limits<T>::infinity();
    for (const auto& [z, x] : pairs) bound = std::min(bound, aw_scalar_product_v_bound(pt, z, x));
    std::optional<double> used;
    using std::abs;
    if (!(abs(*pt.v) < bound / T(2))) {
      pt.v = (v < 0 ? -bound : bound) / T(4);
      used = to_double(*pt.v);
    }
    OrthogonalityOptions oo;
    oo.tolerance = tol;
    auto r = aw_scalar_product_residual(pt, pairs, oo);
    if (used) {
      r.flags.push_back("v-rescaled");
      r.notes.push_back("v=" + format_real(v) + " outside the convergence disc; used v=" + format_real(*used));
    }
    return r;
  });
}

// ---- diffusions ----

std::vector<std::vector<double>> diffusion_points(const ProcessSpec<double>& spec, const SuiteOptions& o) {
  std::vector<std::vector<double>> xs;
  for (const auto& x : sample_points(spec.params.sites(), o.n_points))
    if (state_space_contains(spec, x)) xs.push_back(x);
  if (xs.empty()) regime("no sample point inside the state space");
  return xs;
}

CheckReport diffusion_duality(DualityKind kind, const Params& p, const SuiteOptions& o, double tol) {
  const auto pair = make_duality_pair(kind, p);
  const auto xs = diffusion_points(pair.left_spec, o);
  auto r = duality_residual(pair, xs, enumerate_states(p.k.size(), o.max_total), fd_options(o, tol));
  r.suite = std::string("duality:") + to_string(kind);
  return r;
}

CheckReport suite_dynabep_duality(const Params& p, const SuiteOptions& o, double tol) {
  need(p.lambda, "lambda");
  need(p.sigma, "sigma");
  return diffusion_duality(DualityKind::D_prime, p, o, tol);
}

CheckReport suite_bep_dualities(const Params& p, const SuiteOptions& o, double tol) {
  Parts parts;
  parts.add("P_JacobiHat", [&] {
    need(p.rho, "rho");
    need(p.v, "v");
    return diffusion_duality(DualityKind::P_JacobiHat, p, o, tol);
  });
  parts.add("P_Laguerre", [&] {
    need(p.v, "v");
    return diffusion_duality(DualityKind::P_Laguerre, p, o, tol);
  });
  parts.add("P_Monomial", [&] { return diffusion_duality(DualityKind::P_Monomial, p, o, tol); });
  parts.add("D_B_S", [&] { return diffusion_duality(DualityKind::D_B_S, p, o, tol); });
  parts.add("D_AB_S", [&] {
    need(p.sigma, "sigma");
    return diffusion_duality(DualityKind::D_AB_S, p, o, tol);
  });
  parts.add("P_Bessel", [&] {
    need(p.v, "v");
    const ProcessSpec<double> bep{ProcessKind::BEP, p};
    const auto xs = diffusion_points(bep, o);
    const auto ys = sample_points(p.k.size(), 2, 0.2, 1.7);
    return bessel_duality_residual(p, xs, ys, fd_options(o, tol));
  });
  return parts.finish("bep-dualities", p);
}

CheckReport suite_g_intertwining(const Params& p, const SuiteOptions& o, double tol) {
  need(p.lambda, "lambda");
  need(p.sigma, "sigma");
  const ProcessSpec<double> spec{ProcessKind::ABEP_L, p};
  return g_intertwining_residual(p, diffusion_points(spec, o), fd_options(o, tol));
}

CheckReport suite_g_inverse(const Params& p, const SuiteOptions& o, double tol) {
  const double lam = need(p.lambda, "lambda"), s = need(p.sigma, "sigma");
  const ProcessSpec<double> spec{ProcessKind::ABEP_L, p};
  const auto xs = diffusion_points(spec, o);
  Residuals res;
  const hp hs(s), hl(lam);
  for (const auto& xd : xs) {
    const auto x = convert<hp>(xd);
    const auto y = g_transform(x, hs, hl);
    const auto back = g_inverse(y, hs, hl);
    for (std::size_t j = 0; j < x.size(); ++j) res.add(back[j], x[j], "g^-1(g(x)) x=" + format_reals(xd));
    const auto again = g_transform(back, hs, hl);
    for (std::size_t j = 0; j < x.size(); ++j) res.add(again[j], y[j], "g(g^-1(y)) x=" + format_reals(xd));
  }
  return res.report("g-inverse", describe(p), tol);
}

// ---- algebra ----

template <class T>
TruncatedRep<T> site_rep(const Params& p, int site, int n_trunc) {
  TruncatedRep<T> rep;
  rep.n_trunc = n_trunc;
  rep.site = site;
  rep.params = p.as<T>();
  return rep;
}

template <class F>
CheckReport per_site(const std::string& name, const Params& p, const SuiteOptions& o, F&& f) {
  Parts parts;
  for (int j = 0; j < static_cast<int>(p.k.size()); ++j) {
    parts.add("site " + std::to_string(j + 1), [&] {
      return in_precision(o.precision, [&](auto tag) {
        using T = decltype(tag);
        return f(site_rep<T>(p, j, o.n_trunc));
      });
    });
  }
  return parts.finish(name, p);
}

template <class F>
CheckReport on_pair(const Params& pt, const SuiteOptions& o, F&& f) {
  const Params p = first_sites(pt, 2);
  return in_precision(o.precision, [&](auto tag) {
    using T = decltype(tag);
    return f(make_pair_rep(p.as<T>(), o.n_trunc));
  });
}

CheckReport with_tol(CheckReport r, double tol) {
  if (r.tolerance != tol) {
    r.tolerance = tol;
    r.pass = r.errors.empty() && r.n_cases > 0 && r.max_rel < tol;
  }
  return r;
}

CheckReport suite_relations(const Params& p, const SuiteOptions& o, double tol) {
  return per_site("relations", p, o, [&](const auto& rep) { return with_tol(check_relations(rep), tol); });
}

CheckReport suite_star(const Params& p, const SuiteOptions& o, double tol) {
  return per_site("star", p, o, [&](const auto& rep) { return with_tol(check_star_structure(rep), tol); });
}

CheckReport suite_coideal(const Params& p, const SuiteOptions& o, double tol) {
  const double rho = need(p.rho, "rho");
  return on_pair(p, o, [&](const auto& rep) {
    using T = typename std::decay_t<decltype(rep.left)>::value_type;
    return with_tol(check_coideal(rep, T(rho)), tol);
  });
}

CheckReport suite_casimir_generator(const Params& p, const SuiteOptions& o, double tol) {
  Parts parts;
  parts.push(on_pair(p, o, [&](const auto& rep) { return with_tol(check_generator_equals_casimir(rep), tol); }));
  parts.push(on_pair(p, o, [&](const auto& rep) { return with_tol(check_coproduct_casimir(rep), tol); }));
  parts.push(per_site("casimir-self-adjoint", p, o,
                      [&](const auto& rep) { return with_tol(check_casimir_self_adjoint(rep), tol); }));
  return parts.finish("casimir-generator", p);
}

CheckReport suite_eigen(const Params& p, const SuiteOptions& o, double tol) {
  const double rho = need(p.rho, "rho");
  Parts parts;
  parts.push(per_site("eigen", p, o, [&](const auto& rep) {
    using T = typename std::decay_t<decltype(rep)>::value_type;
    std::vector<CheckReport> r;
    for (int x = 0; x <= 3; ++x) r.push_back(with_tol(check_asc_eigen(rep, x, T(rho)), tol));
    return merge_reports("eigen", r);
  }));
  parts.add("two-site", [&] {
    return on_pair(p, o, [&](const auto& rep) {
      using T = typename std::decay_t<decltype(rep.left)>::value_type;
      std::vector<CheckReport> r;
      for (const Config& xi : {Config{0, 0}, Config{1, 0}, Config{0, 1}, Config{1, 1}, Config{2, 1}}) {
        auto pr = rep.left.params;
        pr.rho = T(rho);
        if (!state_space_contains(ProcessSpec<T>{ProcessKind::ASIP_R, pr}, xi)) continue;
        r.push_back(with_tol(check_asc_eigen_pair(rep, xi, T(rho)), tol));
      }
      return merge_reports("eigen-pair", r);
    });
  });
  return parts.finish("eigen", p);
}

CheckReport suite_casimir_decomposition(const Params& p, const SuiteOptions& o, double tol) {
  const double rho = need(p.rho, "rho");
  Parts parts;
  parts.push(per_site("casimir-decomposition", p, o, [&](const auto& rep) {
    using T = typename std::decay_t<decltype(rep)>::value_type;
    return with_tol(check_casimir_decomposition(rep, T(rho), T(rho + 0.7)), tol);
  }));
  parts.add("two-site", [&] {
    return on_pair(p, o, [&](const auto& rep) {
      using T = typename std::decay_t<decltype(rep.left)>::value_type;
      return with_tol(check_casimir_decomposition_pair(rep, T(rho)), tol);
    });
  });
  return parts.finish("casimir-decomposition", p);
}

const std::vector<Config> nine_term_xi = {{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 1}};

CheckReport suite_nine_term(const Params& pt, const SuiteOptions& o, double tol) {
  const Params p = first_sites(pt, 2);
  const double rho = need(p.rho, "rho");
  Parts parts;
  for (const auto& xi : nine_term_xi) {
    if (!in_restricted(xi, p, rho)) continue;
    parts.push(in_precision(o.precision, [&](auto tag) {
      using T = decltype(tag);
      return with_tol(check_nine_term(p.as<T>(), xi), tol);
    }));
  }
  return parts.finish("nine-term", pt);
}

CheckReport suite_casimir_transfer(const Params& pt, const SuiteOptions& o, double tol) {
  const Params p = first_sites(pt, 2);
  const double rho = need(p.rho, "rho");
  return on_pair(p, o, [&](const auto& rep) {
    std::vector<CheckReport> r;
    for (const auto& xi : nine_term_xi)
      if (in_restricted(xi, p, rho)) r.push_back(with_tol(check_casimir_transfer(rep, xi), tol));
    if (r.empty()) regime("no xi inside X_{d,rho}");
    return merge_reports("casimir-transfer", r);
  });
}

CheckReport suite_aw_summation(const Params& p, const SuiteOptions& o, double tol) {
  const double lam = need(p.lambda, "lambda"), rho = need(p.rho, "rho"), v = need(p.v, "v");
  if (!(p.q > 0 && p.q < 1)) regime("needs 0 < q < 1");
  Parts parts;
  for (int j = 0; j < static_cast<int>(p.k.size()); ++j) {
    const double k = p.k[j];
    for (int y = 0; y <= 2; ++y)
      for (int x = 0; x <= 2; ++x) {
        // |vq| < q^{2x+k+rho-lambda}; shrink v into the disc when the grid value is too large.
        const double bound = std::pow(p.q, 2 * x + k + rho - lam) / p.q;
        double vv = v;
        bool rescaled = false;
        if (!(std::abs(vv) < bound / 2)) {
          vv = (v < 0 ? -bound : bound) / 4;
          rescaled = true;
        }
        parts.push(in_precision(o.precision, [&](auto tag) {
          using T = decltype(tag);
          auto r = check_aw_summation(y, x, T(lam), T(rho), T(vv), T(k), T(p.q), tol);
          if (rescaled) r.flags.push_back("v-rescaled");
          return r;
        }));
      }
  }
  return parts.finish("aw-summation", p);
}

// ---- bundles and limits ----

CheckReport suite_symmetry(const Params& p, const SuiteOptions& o, double) {
  return symmetry_checks({p}, o.max_total);
}

CheckReport suite_limits(const Params& p, const SuiteOptions&, double) { return limit_checks({p}); }

CheckReport limit_group(const char* name, LimitGroup g, const Params& p) {
  auto r = limit_checks({p}, static_cast<unsigned>(g));
  if (r.n_cases == 0 && r.errors.empty()) regime(std::string(name) + " has nothing to check at this point");
  r.suite = name;
  return r;
}

CheckReport suite_degeneration_limits(const Params& p, const SuiteOptions&, double) {
  need(p.rho, "rho");
  need(p.v, "v");
  return limit_group("degeneration-limits", LimitGroup::degenerations, p);
}

CheckReport suite_eps_scaling(const Params& p, const SuiteOptions&, double) {
  if (!(need(p.lambda, "lambda") > 0)) regime("needs lambda > 0");
  need(p.sigma, "sigma");
  if (p.k.size() < 2) regime("needs two sites");
  return limit_group("eps-scaling", LimitGroup::eps_scaling, p);
}

CheckReport suite_pl_to_dprime(const Params& p, const SuiteOptions&, double) {
  if (!(need(p.lambda, "lambda") > 0)) regime("needs lambda > 0");
  need(p.sigma, "sigma");
  if (p.k.size() < 2) regime("needs two sites");
  return limit_group("pl-to-dprime-limit", LimitGroup::pl_to_dprime, p);
}

// ---- simulation ----

CheckReport mc_report(const std::string& name, const Params& p, const MCDualityResult& r, const Config& eta0,
                      const Config& xi0) {
  Residuals res;
  const double z = r.z_ratio();
  res.record(std::abs(r.left.mean - r.right.mean), z,
             "eta0=" + format_config(eta0) + " xi0=" + format_config(xi0) + " left=" + format_real(r.left.mean) +
                 "+-" + format_real(r.left.stderr_) + " right=" + format_real(r.right.mean) + "+-" +
                 format_real(r.right.stderr_));
  auto rep = res.report(name, describe(p), 1.0);
  rep.notes.push_back("max_rel is |difference| / (3 (stderr_left + stderr_right)); pass below 1");
  return rep;
}

CheckReport suite_mc_duality(const Params& pt, const SuiteOptions& o, double) {
  const Params p = first_sites(pt, 2);
  const Config eta0{2, 1}, xi0{1, 1};
  Parts parts;
  parts.add("P_R", [&] {
    need(p.rho, "rho");
    const auto pair = make_duality_pair(DualityKind::P_R, p);
    if (!state_space_contains(pair.right_spec, xi0)) regime("xi0 outside X_{d,rho}");
    return mc_report("mc-duality:P_R", p, mc_duality_check(pair, eta0, xi0, o.mc_time, o.mc_samples, o.seed), eta0,
                     xi0);
  });
  parts.add("P_QMeixner", [&] {
    need(p.v, "v");
    const auto pair = make_duality_pair(DualityKind::P_QMeixner, p);
    return mc_report("mc-duality:P_QMeixner", p,
                     mc_duality_check(pair, eta0, xi0, o.mc_time, o.mc_samples, o.seed + 1), eta0, xi0);
  });
  return parts.finish("mc-duality", pt);
}

CheckReport suite_stationarity(const Params& p, const SuiteOptions& o, double tol) {
  StationarityOptions so;
  so.n_samples = o.stationarity_samples;
  so.p_min = 1.0 - tol;
  Parts parts;
  parts.push(stationarity_check({ProcessKind::ASIP, p}, MeasureKind::W_asip, 3, so, o.seed));
  parts.add("ASIP_L", [&] {
    const double lam = need(p.lambda, "lambda");
    // A restricted slice must fit inside X_{d,lambda}.
    const int n = lam > -1 ? 3 : 1;
    return stationarity_check({ProcessKind::ASIP_L, p}, MeasureKind::W_L, n, so, o.seed + 1);
  });
  return parts.finish("stationarity", p);
}

CheckReport suite_g_pushforward(const Params& p, const SuiteOptions& o, double tol) {
  const double lam = need(p.lambda, "lambda"), s = need(p.sigma, "sigma");
  if (!(lam >= 0)) regime("needs lambda >= 0");
  PushforwardOptions po;
  po.n_samples = o.pushforward_samples;
  auto r = g_pushforward_check(RealConfig(p.k.size(), 1.0), s, lam, p.k, po, o.seed);
  return with_tol(r, tol);
}

// ---- default grids ----

GridSpec grid(std::vector<double> q, std::vector<std::vector<double>> k, std::vector<double> lambda = {},
              std::vector<double> rho = {}, std::vector<double> v = {}, std::vector<double> sigma = {}) {
  GridSpec g;
  g.q = std::move(q);
  g.k = std::move(k);
  g.lambda = std::move(lambda);
  g.rho = std::move(rho);
  g.v = std::move(v);
  g.sigma = std::move(sigma);
  return g;
}

const std::vector<std::vector<double>> k_discrete = {{0.7, 1.3}, {0.45, 1.1, 0.8}};
const std::vector<std::vector<double>> k_two = {{0.8, 1.2}};
const std::vector<std::vector<double>> k_algebra = {{0.3, 1.0}, {1.0, 2.5}, {2.5, 0.3}};
const std::vector<std::vector<double>> k_diffusion = {{0.8, 1.3}, {0.8, 1.3, 0.6}};

std::vector<Suite> build() {
  std::vector<Suite> s;
  auto add = [&](std::string name, std::string group, std::string desc, double tol, GridSpec g, SuiteRun run,
                 double richardson_tol = 0) {
    Suite x;
    x.name = std::move(name);
    x.group = std::move(group);
    x.description = std::move(desc);
    x.tolerance = tol;
    x.richardson_tolerance = richardson_tol;
    x.default_grid = std::move(g);
    x.run = std::move(run);
    s.push_back(std::move(x));
  };
  const std::vector<double> both = {0.5, -8.5};

  add("asc-duality", "duality", "ASIP <-> ASIP_R with nested Al-Salam-Chihara functions P_R", 1e-9,
      grid({0.4, 0.7}, k_discrete, {}, both), suite_asc_duality);
  add("asip-l-duality", "duality", "ASIP <-> ASIP_L with the q^{-1} Al-Salam-Chihara functions P_L", 1e-8,
      grid({0.4, 0.7}, k_discrete, both), suite_asip_l_duality);
  add("aw-duality", "duality", "ASIP_L <-> ASIP_R with nested Askey-Wilson functions P_AW", 1e-8,
      grid({0.4, 0.7}, k_discrete, both, both, {0.3, 2.0}), suite_aw_duality);
  add("wilson-duality", "duality", "SIP_L <-> SIP_R with nested Wilson functions", 1e-9,
      grid({0.5}, k_discrete, both, both, {0.3}), suite_wilson_duality);
  add("degenerate-duality", "duality", "Big q-Jacobi, q-Meixner and Big q-Laguerre dualities", 1e-9,
      grid({0.4, 0.7}, k_discrete, {}, both, {0.3, 2.0}), suite_degenerate_duality);
  add("triangular-duality", "duality", "triangular ASIP self-duality and the ASIP(q) <-> ASIP(1/q) function", 1e-9,
      grid({0.4, 0.7}, k_discrete), suite_triangular_duality);
  add("generator-symmetry", "duality", "ASIP generator symmetric in l^2(W) on P_L and P_R", 1e-9,
      grid({0.5}, k_two, {0.5}, {-9.0}), suite_generator_symmetry);

  add("reversibility-asip", "reversibility", "detailed balance of ASIP/W, ASIP_L/W_L, ASIP_R/W_R", 1e-9,
      grid({0.4, 0.7}, k_discrete, {0.5, -12.0}, {0.5, -12.0}), suite_reversibility_asip);
  add("reversibility-sip", "reversibility", "detailed balance of SIP_L/W_hat_L, SIP_R/W_hat_R; W_hat as q -> 1",
      1e-9, grid({0.5}, k_discrete, {0.5, -12.0}, {0.5, -12.0}), suite_reversibility_sip);
  add("mul-reversibility", "reversibility",
      "mu_L = mu_BEP(g) |J_g| up to e^{sum g}, and the bond-wise symmetry condition for ABEP_L", 1e-5,
      grid({0.5}, k_diffusion, {0.5, 1.5}, {}, {}, {0.7}), suite_mul_reversibility, 1e-7);

  add("orth-asc-onesite", "orthogonality", "one-site Al-Salam-Chihara orthogonality and dual orthogonality", 1e-6,
      grid({0.5, 0.7}, {{0.8}, {1.7}}, {0.3}, {-4.3, -6.1}), suite_orth_asc_onesite);
  add("orth-asc", "orthogonality", "orthogonality of P_L (both directions) and P_R", 1e-6,
      grid({0.5}, k_two, {0.3}, {-8.5}), suite_orth_asc);
  add("aw-biorthogonality", "orthogonality", "biorthogonality of P_AW^v and P_AW^{1/v}, both regimes", 1e-6,
      grid({0.5}, k_two, {0.3, -8.5}, {0.3, -8.5}, {0.3}), suite_aw_biorthogonality);
  add("orth-bigqjacobi", "orthogonality", "Big q-Jacobi orthogonality with omega_J", 1e-6,
      grid({0.5}, k_two, {}, {-8.5}, {0.3}), suite_orth_bigqjacobi);
  add("orth-bigqinvjacobi", "orthogonality", "Big q^{-1}-Jacobi orthogonality with omega_J'", 1e-6,
      grid({0.5}, k_two, {}, {0.5}, {0.3}), suite_orth_bigqinvjacobi);
  add("orth-qmeixner", "orthogonality", "q-Meixner orthogonality with omega_M", 1e-6,
      grid({0.5}, k_two, {}, {}, {0.3}), suite_orth_qmeixner);
  add("aw-scalar-product", "orthogonality", "P_AW^v as the v-weighted scalar product of P_L and P_R", 1e-9,
      grid({0.5}, k_two, {0.5}, {0.3, -8.5}, {0.01}), suite_aw_scalar_product);

  add("dynabep-duality", "duality", "ABEP_L <-> SIP with D'", 1e-5,
      grid({0.5}, k_diffusion, {0.5, 1.5}, {}, {}, {0.7}), suite_dynabep_duality, 1e-7);
  add("bep-dualities", "duality", "BEP dualities: Jacobi (SIP_R), Laguerre, monomial, Bessel; ABEP <-> SIP", 1e-5,
      grid({0.5}, k_diffusion, {}, {0.9}, {0.6}, {0.7}), suite_bep_dualities, 1e-7);
  add("g-intertwining", "duality", "L_BEP f(g(x)) = L_ABEP_L (f o g)(x) for monomials of degree <= 2", 1e-5,
      grid({0.5}, k_diffusion, {0.5}, {}, {}, {0.7}), suite_g_intertwining, 1e-7);
  add("g-inverse", "duality", "g^{-1}(g(x)) = x and g(g^{-1}(y)) = y", 1e-25,
      grid({0.5}, k_diffusion, {0.5, 2.0}, {}, {}, {0.7, -0.4}), suite_g_inverse);

  add("relations", "algebra", "U_q(su(1,1)) relations and centrality of the Casimir", 1e-10,
      grid({0.4, 0.6, 0.8}, k_algebra), suite_relations);
  add("star", "algebra", "*-structure E* = -F, K* = K in the weighted inner product", 1e-10,
      grid({0.4, 0.6, 0.8}, k_algebra), suite_star);
  add("coideal", "algebra", "Delta(Y_rho) = K^2 (x) Y_rho + Y_rho (x) 1", 1e-14,
      grid({0.4, 0.6, 0.8}, k_algebra, {}, {0.3, -2.5}), suite_coideal);
  add("casimir-generator", "algebra",
      "-pi(Delta Omega) is the two-site ASIP generator up to a constant; Omega self-adjoint", 1e-10,
      grid({0.4, 0.6, 0.8, 2.0}, k_algebra), suite_casimir_generator);
  add("eigen", "algebra", "Al-Salam-Chihara functions as eigenvectors of Y_rho and Delta(Y_rho)", 1e-10,
      grid({0.4, 0.6, 0.8}, k_algebra, {}, {0.3, -6.0}), suite_eigen);
  add("casimir-decomposition", "algebra", "Omega written in Y_rho and K^{-2}, independent of rho", 1e-10,
      grid({0.4, 0.6, 0.8}, k_algebra, {}, {0.3}), suite_casimir_decomposition);
  add("nine-term", "algebra", "nine-term expansion of Delta(K^{-2}) on P_R and its two named coefficients", 1e-10,
      grid({0.4, 0.6, 0.8}, k_algebra, {}, {0.3, -6.0}), suite_nine_term);
  add("casimir-transfer", "algebra", "-pi(Delta Omega) on P_R equals the ASIP_R generator in xi", 1e-10,
      grid({0.4, 0.6, 0.8}, k_algebra, {}, {0.3, -6.0}), suite_casimir_transfer);
  add("aw-summation", "algebra", "Al-Salam-Chihara summation to Askey-Wilson", 1e-9,
      grid({0.4, 0.6, 0.8}, {{0.3}, {1.0}, {2.5}}, {0.5}, {0.2}, {0.1}), suite_aw_summation);

  add("symmetry", "symmetry", "rate and duality-function symmetries", 1e-10,
      grid({0.5, 0.7}, {{0.8, 1.3, 0.6}}, {0.5, -9.0}, {0.3, -9.0}, {0.3}, {0.7}), suite_symmetry);
  add("limits", "limits", "all limit surrogates", 1.0, grid({0.5}, {{0.8, 1.3, 0.6}}, {0.5}, {0.3}, {0.3}, {0.7}),
      suite_limits);
  add("degeneration-limits", "limits", "P_AW -> P_BigQJacobi -> P_QMeixner", 1e-6,
      grid({0.5}, k_discrete, {}, {0.3, -8.5}, {0.3}), suite_degeneration_limits);
  add("eps-scaling", "limits", "eps-scaled ASIP_L rates -> ABEP_L coefficients at first order", 1.0,
      grid({0.5}, k_diffusion, {0.5}, {}, {}, {0.7}), suite_eps_scaling);
  add("pl-to-dprime-limit", "limits", "scaled P_L -> D'", 1e-2, grid({0.5}, k_diffusion, {0.5}, {}, {}, {0.7}),
      suite_pl_to_dprime);

  add("mc-duality", "simulation", "Monte-Carlo duality in expectation for P_R and P_QMeixner", 1.0,
      grid({0.5}, {{0.8, 1.2}}, {}, {0.5, -8.0}, {0.3}), suite_mc_duality);
  add("stationarity", "simulation", "chi-square stationarity of the reversible measure on a slice", 1.0 - 1e-3,
      grid({0.5}, {{0.8, 1.2}}, {0.5}), suite_stationarity);
  add("g-pushforward", "simulation", "moments of g(ABEP_L) against BEP from g(x0)", 1.0,
      grid({0.5}, {{1.0, 1.0}}, {0.5}, {}, {}, {0.5}), suite_g_pushforward);
  return s;
}

}  // namespace

const std::vector<Suite>& suites() {
  static const std::vector<Suite> all = build();
  return all;
}

const Suite* find_suite(const std::string& name) {
  for (const auto& s : suites())
    if (s.name == name) return &s;
  return nullptr;
}

const std::vector<std::string>& identity_manifest() {
  static const std::vector<std::string> m = {
      "asc-duality",        "asip-l-duality",     "aw-duality",          "orth-asc-onesite",   "orth-asc",
      "generator-symmetry", "reversibility-asip", "aw-biorthogonality",  "wilson-duality",     "reversibility-sip",
      "degenerate-duality", "triangular-duality", "orth-bigqjacobi",     "degeneration-limits", "orth-bigqinvjacobi",
      "orth-qmeixner",      "eps-scaling",        "pl-to-dprime-limit",  "dynabep-duality",    "g-intertwining",
      "g-inverse",          "mul-reversibility",  "bep-dualities",       "nine-term",          "casimir-transfer",
      "aw-scalar-product",  "aw-summation",       "relations",           "star",               "coideal",
      "casimir-generator",  "eigen",              "casimir-decomposition", "symmetry",         "limits",
      "mc-duality",         "stationarity",       "g-pushforward",
  };
  return m;
}

CheckReport run_suite(const Suite& suite, const Params& point, const SuiteOptions& opts) {
  try {
    point.validate();
    auto r = suite.run(point, opts, suite.tolerance_for(opts));
    r.suite = suite.name;
    r.params = describe(point);
    return r;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::regime_violation) return skipped_report(suite.name, point, e.what());
    CheckReport r;
    r.suite = suite.name;
    r.params = describe(point);
    r.tolerance = suite.tolerance_for(opts);
    r.errors.push_back(std::string(to_string(e.kind())) + ": " + e.what());
    return r;
  } catch (const std::exception& e) {
    CheckReport r;
    r.suite = suite.name;
    r.params = describe(point);
    r.tolerance = suite.tolerance_for(opts);
    r.errors.push_back(e.what());
    return r;
  }
}

std::vector<CheckReport> grid_sweep(const std::vector<std::string>& suite_names, const GridSpec& grid,
                                    const SuiteOptions& opts, int jobs) {
  std::vector<std::function<CheckReport()>> tasks;
  for (const auto& name : suite_names) {
    const Suite* s = find_suite(name);
    if (!s) throw Error(ErrorKind::config, "unknown suite: " + name);
    for (const auto& p : grid.points()) tasks.push_back([s, p, &opts] { return run_suite(*s, p, opts); });
  }
  return run_parallel(tasks, jobs);
}

std::vector<CheckReport> default_sweep(const std::vector<std::string>& suite_names, const SuiteOptions& opts,
                                       int jobs) {
  std::vector<std::function<CheckReport()>> tasks;
  for (const auto& name : suite_names) {
    const Suite* s = find_suite(name);
    if (!s) throw Error(ErrorKind::config, "unknown suite: " + name);
    for (const auto& p : s->default_grid.points()) tasks.push_back([s, p, &opts] { return run_suite(*s, p, opts); });
  }
  return run_parallel(tasks, jobs);
}

std::vector<CheckReport> summarize(const std::vector<CheckReport>& reports) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<CheckReport>> by;
  for (const auto& r : reports) {
    if (!by.count(r.suite)) order.push_back(r.suite);
    by[r.suite].push_back(r);
  }
  std::vector<CheckReport> out;
  for (const auto& name : order) {
    const auto& parts = by[name];
    std::vector<CheckReport> ran;
    long skipped = 0;
    for (const auto& r : parts) {
      if (is_skipped(r)) ++skipped;
      else ran.push_back(r);
    }
    CheckReport m;
    if (ran.empty()) {
      m.suite = name;
      m.pass = true;
      m.flags.push_back("skipped");
      m.params = std::to_string(parts.size()) + " points";
    } else {
      m = merge_reports(name, ran);
      m.params = std::to_string(parts.size()) + " points";
    }
    if (skipped > 0) m.notes.push_back(std::to_string(skipped) + " of " + std::to_string(parts.size()) +
                                       " points outside the suite's regime");
    out.push_back(m);
  }
  return out;
}

}  // namespace duality_lab
