#include <duality_lab/algebra.hpp>
#include <duality_lab/process.hpp>

#include <cmath>
#include <sstream>

namespace duality_lab {

// ---- formal elements ----

template <class T>
AlgebraElement<T> AlgebraElement<T>::scalar(const T& c, int factors) {
  AlgebraElement x;
  x.factors = factors;
  if (c != T(0)) x.terms[{Word{}, Word{}}] = c;
  return x;
}

template <class T>
AlgebraElement<T> AlgebraElement<T>::generator(Gen g) {
  AlgebraElement x;
  x.terms[{Word{g}, Word{}}] = T(1);
  return x;
}

template <class T>
AlgebraElement<T> AlgebraElement<T>::tensor(const Word& left, const Word& right, const T& c) {
  AlgebraElement x;
  x.factors = 2;
  x.terms[{left, right}] = c;
  return x;
}

template <class T>
AlgebraElement<T>& AlgebraElement<T>::operator+=(const AlgebraElement& other) {
  if (terms.empty()) factors = other.factors;
  if (!other.terms.empty() && factors != other.factors)
    throw Error(ErrorKind::kind_mismatch, "adding elements with different tensor orders");
  for (const auto& [key, c] : other.terms) {
    auto& slot = terms[key];
    slot += c;
    if (slot == T(0)) terms.erase(key);
  }
  return *this;
}

template <class T>
AlgebraElement<T> AlgebraElement<T>::operator+(const AlgebraElement& other) const {
  AlgebraElement r = *this;
  r += other;
  return r;
}

template <class T>
AlgebraElement<T> AlgebraElement<T>::operator-(const AlgebraElement& other) const {
  return *this + other * T(-1);
}

template <class T>
AlgebraElement<T> AlgebraElement<T>::operator*(const T& c) const {
  AlgebraElement r;
  r.factors = factors;
  if (c == T(0)) return r;
  for (const auto& [key, v] : terms) r.terms[key] = v * c;
  return r;
}

template <class T>
AlgebraElement<T> AlgebraElement<T>::operator*(const AlgebraElement& other) const {
  AlgebraElement r;
  r.factors = std::max(factors, other.factors);
  if (!terms.empty() && !other.terms.empty() && factors != other.factors) {
    // A scalar multiple of the unit is allowed on either side.
    const bool lhs_unit = terms.size() == 1 && terms.begin()->first.first.empty() && terms.begin()->first.second.empty();
    const bool rhs_unit = other.terms.size() == 1 && other.terms.begin()->first.first.empty() &&
                          other.terms.begin()->first.second.empty();
    if (lhs_unit) return other * terms.begin()->second;
    if (rhs_unit) return *this * other.terms.begin()->second;
    throw Error(ErrorKind::kind_mismatch, "multiplying elements with different tensor orders");
  }
  for (const auto& [ka, ca] : terms) {
    for (const auto& [kb, cb] : other.terms) {
      Word l = ka.first;
      l.insert(l.end(), kb.first.begin(), kb.first.end());
      Word rr = ka.second;
      rr.insert(rr.end(), kb.second.begin(), kb.second.end());
      auto& slot = r.terms[{l, rr}];
      slot += ca * cb;
    }
  }
  for (auto it = r.terms.begin(); it != r.terms.end();) it = it->second == T(0) ? r.terms.erase(it) : std::next(it);
  return r;
}

template <class T>
AlgebraElement<T> casimir(const T& q) {
  using G = AlgebraElement<T>;
  const T d = (T(1) / q - q) * (T(1) / q - q);
  const auto K2 = G::generator(Gen::K) * G::generator(Gen::K);
  const auto Km2 = G::generator(Gen::Kinv) * G::generator(Gen::Kinv);
  return (K2 * (T(1) / q) + Km2 * q - G::scalar(T(2))) * (T(1) / d) + G::generator(Gen::E) * G::generator(Gen::F);
}

template <class T>
AlgebraElement<T> y_rho(const T& rho, const T& q) {
  using G = AlgebraElement<T>;
  using std::sqrt;
  const auto K = G::generator(Gen::K);
  return G::generator(Gen::E) * K * sqrt(q) - G::generator(Gen::F) * K * (T(1) / sqrt(q)) +
         (K * K - G::scalar(T(1))) * mu_rho(rho, q);
}

template <class T>
AlgebraElement<T> coproduct(const AlgebraElement<T>& x) {
  using G = AlgebraElement<T>;
  if (x.factors != 1) throw Error(ErrorKind::kind_mismatch, "coproduct of a tensor element");
  auto image = [](Gen g) {
    switch (g) {
      case Gen::K: return G::tensor({Gen::K}, {Gen::K});
      case Gen::Kinv: return G::tensor({Gen::Kinv}, {Gen::Kinv});
      case Gen::E: return G::tensor({Gen::K}, {Gen::E}) + G::tensor({Gen::E}, {Gen::Kinv});
      case Gen::F: return G::tensor({Gen::K}, {Gen::F}) + G::tensor({Gen::F}, {Gen::Kinv});
    }
    return G::scalar(T(0), 2);
  };
  G r = G::scalar(T(0), 2);
  for (const auto& [key, c] : x.terms) {
    G t = G::tensor({}, {}, c);
    for (Gen g : key.first) t = t * image(g);
    r += t;
  }
  return r;
}

template <class T>
AlgebraElement<T> coproduct_casimir_display(const T& q) {
  using G = AlgebraElement<T>;
  const Gen K = Gen::K, k = Gen::Kinv, E = Gen::E, F = Gen::F;
  const T d = (T(1) / q - q) * (T(1) / q - q);
  return (G::tensor({K, K}, {K, K}, q) + G::tensor({k, k}, {k, k}, T(1) / q) - G::tensor({}, {}, T(2))) *
             (T(1) / d) +
         G::tensor({K, K}, {F, E}) + G::tensor({K, E}, {F, k}) + G::tensor({F, K}, {k, E}) + G::tensor({F, E}, {k, k});
}

template <class T>
AlgebraElement<T> aw_f(const AlgebraElement<T>& A, const AlgebraElement<T>& B, const T& q) {
  return A * B * A * (q * q + T(1) / (q * q)) - A * A * B - B * A * A;
}

template <class T>
AlgebraElement<T> casimir_decomposition(const T& rho, const T& q, bool coproduct_form) {
  using G = AlgebraElement<T>;
  const int order = coproduct_form ? 2 : 1;
  const T mu = mu_rho(rho, q);
  const T s = q + T(1) / q;
  const T d = (q - T(1) / q) * (q - T(1) / q);
  G Y = y_rho(rho, q);
  G Km2 = G::generator(Gen::Kinv) * G::generator(Gen::Kinv);
  if (coproduct_form) {
    // Delta(Y) through the co-ideal form K^2 (x) Y + Y (x) 1.
    G lifted = G::scalar(T(0), 2);
    for (const auto& [key, c] : Y.terms) {
      lifted += G::tensor({Gen::K, Gen::K}, key.first, c);
      lifted += G::tensor(key.first, {}, c);
    }
    Y = lifted;
    Km2 = coproduct(Km2);
  }
  const G A = Y + G::scalar(mu, order);
  return aw_f(A, Km2, q) * (T(-1) / (s * d)) + Km2 * (s / d) + A * (mu / s) - G::scalar(T(2) / d, order);
}

// ---- representation ----

template <class T>
T TruncatedRep<T>::u() const {
  return u_gauge(params.k, site, params.q);
}

template <class T>
RepPair<T> make_pair_rep(const ModelParams<T>& p, int n_trunc) {
  if (p.k.size() != 2) throw Error(ErrorKind::kind_mismatch, "pair representations need exactly two sites");
  RepPair<T> r;
  r.left = {n_trunc, 0, p};
  r.right = {n_trunc, 1, p};
  return r;
}

template <class T>
Matrix<T> generator_matrix(const TruncatedRep<T>& rep, Gen g) {
  using std::pow;
  const int d = rep.dim();
  const T& q = rep.params.q;
  const T k = rep.k();
  const T u = rep.u();
  Matrix<T> m = Matrix<T>::Zero(d, d);
  switch (g) {
    case Gen::K:
      for (int n = 0; n < d; ++n) m(n, n) = pow(q, T(n) + k / T(2));
      break;
    case Gen::Kinv:
      for (int n = 0; n < d; ++n) m(n, n) = pow(q, -T(n) - k / T(2));
      break;
    case Gen::E:
      for (int n = 1; n < d; ++n) m(n, n - 1) = u * q_bracket(T(n), q);
      break;
    case Gen::F:
      for (int n = 0; n + 1 < d; ++n) m(n, n + 1) = -q_bracket(T(n) + k, q) / u;
      break;
  }
  return m;
}

template <class T>
Matrix<T> word_matrix(const TruncatedRep<T>& rep, const Word& w) {
  Matrix<T> m = Matrix<T>::Identity(rep.dim(), rep.dim());
  for (Gen g : w) m = m * generator_matrix(rep, g);
  return m;
}

template <class T>
Matrix<T> rep_matrix(const TruncatedRep<T>& rep, const AlgebraElement<T>& x) {
  if (x.factors != 1) throw Error(ErrorKind::kind_mismatch, "tensor element on a single-site representation");
  Matrix<T> m = Matrix<T>::Zero(rep.dim(), rep.dim());
  for (const auto& [key, c] : x.terms) m += c * word_matrix(rep, key.first);
  return m;
}

template <class T>
Matrix<T> rep_matrix(const RepPair<T>& rep, const AlgebraElement<T>& x) {
  const int d1 = rep.left.dim(), d2 = rep.right.dim();
  Matrix<T> m = Matrix<T>::Zero(d1 * d2, d1 * d2);
  if (x.factors != 2) {
    // Single-site element acting as x (x) 1 is not implied; only scalars are lifted.
    for (const auto& [key, c] : x.terms) {
      if (!key.first.empty()) throw Error(ErrorKind::kind_mismatch, "single-site element on a pair representation");
      m += c * Matrix<T>::Identity(d1 * d2, d1 * d2);
    }
    return m;
  }
  std::map<Word, Matrix<T>> left_cache, right_cache;
  for (const auto& [key, c] : x.terms) {
    auto li = left_cache.find(key.first);
    if (li == left_cache.end()) li = left_cache.emplace(key.first, word_matrix(rep.left, key.first)).first;
    auto ri = right_cache.find(key.second);
    if (ri == right_cache.end()) ri = right_cache.emplace(key.second, word_matrix(rep.right, key.second)).first;
    const Matrix<T>& L = li->second;
    const Matrix<T>& R = ri->second;
    for (int a = 0; a < d1; ++a)
      for (int b = 0; b < d1; ++b) {
        if (L(a, b) == T(0)) continue;
        m.block(a * d2, b * d2, d2, d2) += (c * L(a, b)) * R;
      }
  }
  return m;
}

template <class T>
Vector<T> site_weights(const TruncatedRep<T>& rep) {
  using std::pow;
  Vector<T> w(rep.dim());
  const T u = rep.u();
  for (int n = 0; n < rep.dim(); ++n) w(n) = w_site(n, rep.k(), rep.params.q) * pow(u, T(-2 * n));
  return w;
}

namespace {

std::string rep_label(double q, double k, int n) {
  std::ostringstream os;
  os << "q=" << format_real(q) << " k=" << format_real(k) << " n_trunc=" << n;
  return os.str();
}

template <class T>
std::string pair_label(const RepPair<T>& rep) {
  std::ostringstream os;
  os << "q=" << format_real(to_double(rep.left.params.q)) << " k=("
     << format_real(to_double(rep.left.k())) << "," << format_real(to_double(rep.right.k()))
     << ") n_trunc=" << rep.left.n_trunc;
  return os.str();
}

// Row-wise comparison on rows accepted by `keep`, normalized by the row scale.
template <class T, class Keep>
void compare_rows(const Matrix<T>& X, const Matrix<T>& Y, Keep keep, Residuals& res, const std::string& what) {
  using std::abs;
  for (int i = 0; i < X.rows(); ++i) {
    if (!keep(i)) continue;
    T scale = 1;
    T diff = 0;
    for (int j = 0; j < X.cols(); ++j) {
      scale = std::max({scale, abs(X(i, j)), abs(Y(i, j))});
      diff = std::max(diff, abs(X(i, j) - Y(i, j)));
    }
    res.record(to_double(diff), to_double(diff / scale), what + " row " + std::to_string(i));
  }
}

}  // namespace

template <class T>
CheckReport check_relations(const TruncatedRep<T>& rep) {
  const T& q = rep.params.q;
  const int n = rep.n_trunc;
  const auto K = generator_matrix(rep, Gen::K);
  const auto Ki = generator_matrix(rep, Gen::Kinv);
  const auto E = generator_matrix(rep, Gen::E);
  const auto F = generator_matrix(rep, Gen::F);
  const Matrix<T> I = Matrix<T>::Identity(rep.dim(), rep.dim());
  Residuals res;
  auto interior = [&](int i) { return i <= n - 1; };
  compare_rows<T>(K * Ki, I, interior, res, "KK^-1");
  compare_rows<T>(Ki * K, I, interior, res, "K^-1K");
  compare_rows<T>(K * E, q * E * K, interior, res, "KE-qEK");
  compare_rows<T>(K * F, (T(1) / q) * F * K, interior, res, "KF-q^-1FK");
  compare_rows<T>(E * F - F * E, (K * K - Ki * Ki) / (q - T(1) / q), interior, res, "EF-FE");
  // EF - FE is diagonal with entries [2n+k]_q.
  Matrix<T> D = Matrix<T>::Zero(rep.dim(), rep.dim());
  for (int m = 0; m < rep.dim(); ++m) D(m, m) = q_bracket(T(2 * m) + rep.k(), q);
  compare_rows<T>(E * F - F * E, D, interior, res, "[2n+k]");
  // Casimir is central.
  const auto Om = rep_matrix(rep, casimir(q));
  auto interior2 = [&](int i) { return i <= n - 2; };
  compare_rows<T>(Om * E, E * Om, interior2, res, "Omega E");
  compare_rows<T>(Om * F, F * Om, interior2, res, "Omega F");
  compare_rows<T>(Om * K, K * Om, interior2, res, "Omega K");
  return res.report("relations", rep_label(to_double(q), to_double(rep.k()), n), 1e-10);
}

template <class T>
CheckReport check_star_structure(const TruncatedRep<T>& rep) {
  const int n = rep.n_trunc;
  const auto w = site_weights(rep);
  const Matrix<T> G = w.asDiagonal();
  const auto E = generator_matrix(rep, Gen::E);
  const auto F = generator_matrix(rep, Gen::F);
  const auto K = generator_matrix(rep, Gen::K);
  Residuals res;
  // <X f, g> = <f, X* g>  <=>  X^T G = G X*.
  auto interior = [&](int i) { return i <= n - 1; };
  compare_rows<T>(Matrix<T>(E.transpose() * G), Matrix<T>(G * (-F)), interior, res, "E*=-F");
  compare_rows<T>(Matrix<T>(F.transpose() * G), Matrix<T>(G * (-E)), interior, res, "F*=-E");
  compare_rows<T>(Matrix<T>(K.transpose() * G), Matrix<T>(G * K), interior, res, "K*=K");
  return res.report("star", rep_label(to_double(rep.params.q), to_double(rep.k()), n), 1e-10);
}

template <class T>
CheckReport check_casimir_self_adjoint(const TruncatedRep<T>& rep) {
  const int n = rep.n_trunc;
  const Matrix<T> G = site_weights(rep).asDiagonal();
  const auto Om = rep_matrix(rep, casimir(rep.params.q));
  Residuals res;
  compare_rows<T>(Matrix<T>(Om.transpose() * G), Matrix<T>(G * Om), [&](int i) { return i <= n - 2; }, res,
                  "Omega*=Omega");
  return res.report("casimir-self-adjoint", rep_label(to_double(rep.params.q), to_double(rep.k()), n), 1e-10);
}

template <class T>
CheckReport check_coideal(const RepPair<T>& rep, const T& rho) {
  using G = AlgebraElement<T>;
  const T& q = rep.left.params.q;
  const auto Y = y_rho(rho, q);
  const auto hom = rep_matrix(rep, coproduct(Y));
  G lifted = G::scalar(T(0), 2);
  for (const auto& [key, c] : Y.terms) {
    lifted += G::tensor({Gen::K, Gen::K}, key.first, c);
    lifted += G::tensor(key.first, {}, c);
  }
  const auto form = rep_matrix(rep, lifted);
  // Also assemble Delta(Y) from the represented Delta(E), Delta(F), Delta(K) matrices.
  const auto DK = rep_matrix(rep, coproduct(G::generator(Gen::K)));
  const auto DE = rep_matrix(rep, coproduct(G::generator(Gen::E)));
  const auto DF = rep_matrix(rep, coproduct(G::generator(Gen::F)));
  using std::sqrt;
  const Matrix<T> I = Matrix<T>::Identity(rep.dim(), rep.dim());
  const Matrix<T> assembled =
      sqrt(q) * DE * DK - (T(1) / sqrt(q)) * DF * DK + mu_rho(rho, q) * (DK * DK - I);
  const int n = rep.left.n_trunc;
  Residuals res;
  auto interior = [&](int i) { return i / rep.right.dim() <= n - 1 && i % rep.right.dim() <= n - 1; };
  compare_rows<T>(hom, form, interior, res, "Delta(Y) vs K^2(x)Y+Y(x)1");
  compare_rows<T>(assembled, form, interior, res, "matrix Delta(Y) vs K^2(x)Y+Y(x)1");
  auto r = res.report("coideal", pair_label(rep) + " rho=" + format_real(to_double(rho)), 1e-14);
  return r;
}

template <class T>
CheckReport check_coproduct_casimir(const RepPair<T>& rep) {
  const T& q = rep.left.params.q;
  const auto hom = rep_matrix(rep, coproduct(casimir(q)));
  const auto disp = rep_matrix(rep, coproduct_casimir_display(q));
  const int n = rep.left.n_trunc;
  Residuals res;
  auto interior = [&](int i) { return i / rep.right.dim() <= n - 1 && i % rep.right.dim() <= n - 1; };
  compare_rows<T>(hom, disp, interior, res, "Delta(Omega)");
  return res.report("coproduct-casimir", pair_label(rep), 1e-10);
}

template <class T>
CheckReport check_generator_equals_casimir(const RepPair<T>& rep) {
  const auto& p = rep.left.params;
  const T& q = p.q;
  const int n = rep.left.n_trunc;
  const auto DOm = rep_matrix(rep, coproduct(casimir(q)));
  const T cst = q_bracket((p.k[0] + p.k[1] - T(1)) / T(2), q);
  ProcessSpec<T> spec{ProcessKind::ASIP, p};
  Residuals res;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int row = rep.index(a, b);
      Vector<T> L = Vector<T>::Zero(rep.dim());
      T out = 0;
      for (const auto& j : jump_rates(spec, Config{a, b})) {
        L(rep.index(j.target[0], j.target[1])) += j.rate;
        out += j.rate;
      }
      L(row) -= out + cst * cst;
      Vector<T> lhs = -DOm.row(row).transpose();
      using std::abs;
      T scale = std::max(T(1), L.cwiseAbs().maxCoeff());
      T diff = (lhs - L).cwiseAbs().maxCoeff();
      res.record(to_double(diff), to_double(diff / scale), "eta=" + format_config({a, b}));
    }
  return res.report("casimir-generator", pair_label(rep), 1e-10);
}

template <class T>
CheckReport check_asc_eigen(const TruncatedRep<T>& rep, int x, const T& rho) {
  using std::pow;
  const T& q = rep.params.q;
  const T k = rep.k();
  const int n = rep.n_trunc;
  const auto Y = rep_matrix(rep, y_rho(rho, q));
  Vector<T> v(rep.dim());
  const T u = rep.u();
  for (int m = 0; m < rep.dim(); ++m) v(m) = pow(u, T(m)) * p_asc(m, x, rho, k, q);
  const T ev = mu_rho(T(2 * x) + k + rho, q) - mu_rho(rho, q);
  const Vector<T> r = Y * v - ev * v;
  using std::abs;
  T vmax = 0;
  for (int m = 0; m < n; ++m) vmax = std::max(vmax, abs(v(m)));
  Residuals res;
  for (int m = 0; m < n; ++m) {
    res.record(to_double(abs(r(m))), to_double(abs(r(m)) / std::max(vmax, T(1e-300))), "n=" + std::to_string(m));
  }
  return res.report("eigen", rep_label(to_double(q), to_double(k), n) + " x=" + std::to_string(x) +
                                 " rho=" + format_real(to_double(rho)),
                    1e-10);
}

template <class T>
CheckReport check_asc_eigen_pair(const RepPair<T>& rep, const Config& xi, const T& rho) {
  auto p = rep.left.params;
  p.rho = rho;
  const T& q = p.q;
  const int n = rep.left.n_trunc;
  const auto DY = rep_matrix(rep, coproduct(y_rho(rho, q)));
  Vector<T> v(rep.dim());
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b <= n; ++b) v(rep.index(a, b)) = duality_value(DualityKind::P_R, Config{a, b}, xi, p);
  const auto h = height_plus(xi, p.k, rho);
  const T ev = mu_rho(h[1], q) - mu_rho(rho, q);
  const Vector<T> r = DY * v - ev * v;
  using std::abs;
  T vmax = 0;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) vmax = std::max(vmax, abs(v(rep.index(a, b))));
  Residuals res;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const T e = abs(r(rep.index(a, b)));
      res.record(to_double(e), to_double(e / vmax), "eta=" + format_config({a, b}));
    }
  return res.report("eigen-pair", pair_label(rep) + " xi=" + format_config(xi) + " rho=" + format_real(to_double(rho)),
                    1e-10);
}

template <class T>
CheckReport check_casimir_decomposition(const TruncatedRep<T>& rep, const T& rho, const T& rho_alt) {
  const T& q = rep.params.q;
  const int n = rep.n_trunc;
  const auto Om = rep_matrix(rep, casimir(q));
  const auto D1 = rep_matrix(rep, casimir_decomposition(rho, q, false));
  const auto D2 = rep_matrix(rep, casimir_decomposition(rho_alt, q, false));
  Residuals res;
  auto interior = [&](int i) { return i <= n - 3; };
  compare_rows<T>(D1, Om, interior, res, "rho");
  compare_rows<T>(D2, Om, interior, res, "rho_alt");
  compare_rows<T>(D1, D2, interior, res, "rho-independence");
  return res.report("casimir-decomposition", rep_label(to_double(q), to_double(rep.k()), n) + " rho=" +
                                                 format_real(to_double(rho)) + "," + format_real(to_double(rho_alt)),
                    1e-10);
}

template <class T>
CheckReport check_casimir_decomposition_pair(const RepPair<T>& rep, const T& rho) {
  const T& q = rep.left.params.q;
  const int n = rep.left.n_trunc;
  const auto DOm = rep_matrix(rep, coproduct(casimir(q)));
  const auto D = rep_matrix(rep, casimir_decomposition(rho, q, true));
  Residuals res;
  auto interior = [&](int i) { return i / rep.right.dim() <= n - 3 && i % rep.right.dim() <= n - 3; };
  compare_rows<T>(D, DOm, interior, res, "Delta");
  return res.report("casimir-decomposition-pair", pair_label(rep) + " rho=" + format_real(to_double(rho)), 1e-10);
}

template <class T>
T alpha_q(const T& rho, const T& q) {
  using std::pow;
  const T d = q - T(1) / q;
  return -q * q * (q + T(1) / q) * d * d / ((T(1) - pow(q, T(2) - T(2) * rho)) * (T(1) - pow(q, T(2) * rho + T(2))));
}

template <class T>
NineTermFit<T> extract_nine_term_coefficients(const ModelParams<T>& p, const Config& xi,
                                              const std::vector<Config>& probe_states) {
  using std::abs;
  using std::pow;
  if (p.k.size() != 2 || xi.size() != 2) throw Error(ErrorKind::kind_mismatch, "nine-term fit is two-site");
  // Shifts with total change nu = i1 + i2 in {-1,0,1} and i2 in {-1,0,1}.
  std::vector<std::pair<int, int>> keys;
  NineTermFit<T> fit;
  for (int nu = -1; nu <= 1; ++nu)
    for (int i2 = -1; i2 <= 1; ++i2) {
      const int i1 = nu - i2;
      if (xi[0] + i1 >= 0 && xi[1] + i2 >= 0)
        keys.emplace_back(i1, i2);
      else
        fit.coefficients[{i1, i2}] = T(0);
    }
  const int rows = static_cast<int>(probe_states.size());
  const int cols = static_cast<int>(keys.size());
  if (rows < cols) throw Error(ErrorKind::rank_deficient, "rank-deficient probe set: fewer probes than unknowns");
  Matrix<T> A(rows, cols);
  Vector<T> b(rows);
  const T K = p.k_total();
  for (int r = 0; r < rows; ++r) {
    const auto& eta = probe_states[r];
    for (int c = 0; c < cols; ++c) {
      const Config t{xi[0] + keys[c].first, xi[1] + keys[c].second};
      A(r, c) = duality_value(DualityKind::P_R, eta, t, p);
    }
    b(r) = pow(p.q, -T(2 * total(eta)) - K) * duality_value(DualityKind::P_R, eta, xi, p);
  }
  // P_R values span many orders of magnitude across probes; equilibrate rows and
  // columns so the rank decision is about directions, not scale.
  Vector<T> rs(rows), cs(cols);
  for (int r = 0; r < rows; ++r) {
    T m = abs(b(r));
    for (int c = 0; c < cols; ++c) m = std::max(m, T(abs(A(r, c))));
    rs(r) = m > T(0) ? T(1) / m : T(1);
  }
  const Matrix<T> Ar = rs.asDiagonal() * A;
  for (int c = 0; c < cols; ++c) {
    const T m = Ar.col(c).cwiseAbs().maxCoeff();
    cs(c) = m > T(0) ? T(1) / m : T(1);
  }
  const Matrix<T> As = Ar * cs.asDiagonal();
  const Vector<T> bs = rs.asDiagonal() * b;
  Eigen::ColPivHouseholderQR<Matrix<T>> qr(As);
  qr.setThreshold(T(1e-20));
  fit.rank = static_cast<int>(qr.rank());
  if (fit.rank < cols) throw Error(ErrorKind::rank_deficient, "rank-deficient probe set");
  const Vector<T> sol = cs.asDiagonal() * qr.solve(bs);
  fit.residual = to_double((rs.asDiagonal() * (A * sol - b)).norm() / bs.norm());
  for (int c = 0; c < cols; ++c) fit.coefficients[keys[c]] = sol(c);
  return fit;
}

template <class T>
CheckReport check_nine_term(const ModelParams<T>& p, const Config& xi) {
  std::vector<Config> probes;
  for (int a = 0; a <= 5; ++a)
    for (int b = 0; b <= 5; ++b) probes.push_back({a, b});
  Residuals res;
  const std::string label = "q=" + format_real(to_double(p.q)) + " k=(" + format_real(to_double(p.k[0])) + "," +
                            format_real(to_double(p.k[1])) + ") rho=" + format_real(to_double(p.need_rho())) +
                            " xi=" + format_config(xi);
  NineTermFit<T> fit;
  try {
    fit = extract_nine_term_coefficients(p, xi, probes);
  } catch (const Error& e) {
    res.error(e.what());
    return res.report("nine-term", label, 1e-10);
  }
  res.record(fit.residual, fit.residual, "least-squares residual");
  const auto h = height_plus(xi, p.k, p.need_rho());
  const T al = alpha_q(h[1], p.q);
  ProcessSpec<T> spec{ProcessKind::ASIP_R, p};
  T cplus = 0, cminus = 0;
  for (const auto& j : jump_rates(spec, xi)) (j.from == 0 ? cplus : cminus) = j.rate;
  res.add(fit.coefficients.at({-1, 1}), al * cplus, "C(-1,1)");
  res.add(fit.coefficients.at({1, -1}), al * cminus, "C(1,-1)");
  auto r = res.report("nine-term", label, 1e-10);
  std::ostringstream os;
  os << "rank=" << fit.rank << " C(-1,1)=" << format_real(to_double(fit.coefficients.at({-1, 1})))
     << " C(1,-1)=" << format_real(to_double(fit.coefficients.at({1, -1})));
  r.notes.push_back(os.str());
  return r;
}

template <class T>
CheckReport check_casimir_transfer(const RepPair<T>& rep, const Config& xi) {
  const auto& p = rep.left.params;
  const T& q = p.q;
  const int n = rep.left.n_trunc;
  const auto DOm = rep_matrix(rep, coproduct(casimir(q)));
  auto column = [&](const Config& s) {
    Vector<T> v(rep.dim());
    for (int a = 0; a <= n; ++a)
      for (int b = 0; b <= n; ++b) v(rep.index(a, b)) = duality_value(DualityKind::P_R, Config{a, b}, s, p);
    return v;
  };
  const Vector<T> v = column(xi);
  const Vector<T> lhs = -(DOm * v);
  const T cst = q_bracket((p.k[0] + p.k[1] - T(1)) / T(2), q);
  Vector<T> rhs = -(cst * cst) * v;
  ProcessSpec<T> spec{ProcessKind::ASIP_R, p};
  for (const auto& j : jump_rates(spec, xi)) rhs += j.rate * (column(j.target) - v);
  Residuals res;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int i = rep.index(a, b);
      res.add(lhs(i), rhs(i), "eta=" + format_config({a, b}));
    }
  return res.report("casimir-transfer",
                    pair_label(rep) + " rho=" + format_real(to_double(p.need_rho())) + " xi=" + format_config(xi),
                    1e-10);
}

template <class T>
CheckReport check_aw_summation(int y, int x, const T& lambda, const T& rho, const T& v, const T& k, const T& q,
                               double tol) {
  using std::abs;
  using std::pow;
  std::ostringstream label;
  label << "y=" << y << " x=" << x << " lambda=" << format_real(to_double(lambda))
        << " rho=" << format_real(to_double(rho)) << " v=" << format_real(to_double(v))
        << " k=" << format_real(to_double(k)) << " q=" << format_real(to_double(q));
  if (!(q > T(0) && q < T(1))) throw Error(ErrorKind::domain, "aw summation requires 0 < q < 1");
  if (!(abs(v * q) < pow(q, T(2 * x) + k + rho - lambda)))
    throw Error(ErrorKind::regime_violation, "condition violated: |vq| >= q^{2x+k+rho-lambda}");
  const T q2 = q * q;
  const T lhs = q_poch_inf(v * pow(q, T(2 * y) + lambda - rho + k + T(1)), q2) /
                q_poch_inf(v * pow(q, T(-2 * x) + lambda - rho - k + T(1)), q2) *
                p_aw(y, x, lambda, rho, v, k, q);
  T sum = 0;
  T last = 0, prev = 0;
  int small = 0;
  const T stop = T(tol) * T(1e-4);
  int n = 0;
  for (; n < 100000; ++n) {
    const T t = pow(v, T(n)) * p_asc(n, y, lambda, k, T(1) / q) * p_asc(n, x, rho, k, q) * w_site(n, k, q);
    sum += t;
    prev = last;
    last = t;
    if (abs(t) < stop * abs(sum)) {
      if (++small >= 5) break;
    } else {
      small = 0;
    }
  }
  if (n >= 100000) throw Error(ErrorKind::non_convergent, "aw summation: no decay within 1e5 terms");
  Residuals res;
  res.add(sum, lhs, label.str());
  auto r = res.report("aw-summation", label.str(), tol);
  const T ratio = prev != T(0) ? abs(last / prev) : T(0);
  r.tail_bound = ratio < T(1) ? to_double(abs(last) * ratio / (T(1) - ratio) / std::max(abs(sum), T(1))) : INFINITY;
  r.n_cases = 1;
  return r;
}

#define DL_INSTANTIATE_ALGEBRA(T)                                                                              \
  template struct AlgebraElement<T>;                                                                           \
  template struct TruncatedRep<T>;                                                                             \
  template AlgebraElement<T> casimir(const T&);                                                                \
  template AlgebraElement<T> y_rho(const T&, const T&);                                                        \
  template AlgebraElement<T> coproduct(const AlgebraElement<T>&);                                              \
  template AlgebraElement<T> coproduct_casimir_display(const T&);                                              \
  template AlgebraElement<T> aw_f(const AlgebraElement<T>&, const AlgebraElement<T>&, const T&);               \
  template AlgebraElement<T> casimir_decomposition(const T&, const T&, bool);                                  \
  template RepPair<T> make_pair_rep(const ModelParams<T>&, int);                                               \
  template Matrix<T> generator_matrix(const TruncatedRep<T>&, Gen);                                            \
  template Matrix<T> word_matrix(const TruncatedRep<T>&, const Word&);                                         \
  template Matrix<T> rep_matrix(const TruncatedRep<T>&, const AlgebraElement<T>&);                             \
  template Matrix<T> rep_matrix(const RepPair<T>&, const AlgebraElement<T>&);                                  \
  template Vector<T> site_weights(const TruncatedRep<T>&);                                                     \
  template CheckReport check_relations(const TruncatedRep<T>&);                                                \
  template CheckReport check_star_structure(const TruncatedRep<T>&);                                           \
  template CheckReport check_coideal(const RepPair<T>&, const T&);                                             \
  template CheckReport check_coproduct_casimir(const RepPair<T>&);                                             \
  template CheckReport check_casimir_self_adjoint(const TruncatedRep<T>&);                                     \
  template CheckReport check_generator_equals_casimir(const RepPair<T>&);                                      \
  template CheckReport check_asc_eigen(const TruncatedRep<T>&, int, const T&);                                 \
  template CheckReport check_asc_eigen_pair(const RepPair<T>&, const Config&, const T&);                       \
  template CheckReport check_casimir_decomposition(const TruncatedRep<T>&, const T&, const T&);                \
  template CheckReport check_casimir_decomposition_pair(const RepPair<T>&, const T&);                          \
  template T alpha_q(const T&, const T&);                                                                      \
  template NineTermFit<T> extract_nine_term_coefficients(const ModelParams<T>&, const Config&,                 \
                                                         const std::vector<Config>&);                          \
  template CheckReport check_nine_term(const ModelParams<T>&, const Config&);                                  \
  template CheckReport check_casimir_transfer(const RepPair<T>&, const Config&);                               \
  template CheckReport check_aw_summation(int, int, const T&, const T&, const T&, const T&, const T&, double);

DL_INSTANTIATE_ALGEBRA(double)
DL_INSTANTIATE_ALGEBRA(hp)

}  // namespace duality_lab
