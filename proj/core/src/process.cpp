#include <duality_lab/process.hpp>

#include <algorithm>
#include <cmath>

namespace duality_lab {

const char* to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::ASIP: return "ASIP";
    case ProcessKind::ASIP_L: return "ASIP_L";
    case ProcessKind::ASIP_R: return "ASIP_R";
    case ProcessKind::SIP: return "SIP";
    case ProcessKind::SIP_L: return "SIP_L";
    case ProcessKind::SIP_R: return "SIP_R";
    case ProcessKind::ABEP: return "ABEP";
    case ProcessKind::ABEP_L: return "ABEP_L";
    case ProcessKind::ABEP_R: return "ABEP_R";
    case ProcessKind::BEP: return "BEP";
    case ProcessKind::BEP_L: return "BEP_L";
  }
  return "?";
}

bool is_discrete(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::ASIP:
    case ProcessKind::ASIP_L:
    case ProcessKind::ASIP_R:
    case ProcessKind::SIP:
    case ProcessKind::SIP_L:
    case ProcessKind::SIP_R:
      return true;
    default:
      return false;
  }
}

template <class T>
void ProcessSpec<T>::validate() const {
  params.validate();
  switch (kind) {
    case ProcessKind::ASIP_L:
    case ProcessKind::SIP_L:
    case ProcessKind::BEP_L:
      params.need_lambda();
      break;
    case ProcessKind::ASIP_R:
    case ProcessKind::SIP_R:
      params.need_rho();
      break;
    case ProcessKind::ABEP_L:
      params.need_lambda();
      params.need_sigma();
      break;
    case ProcessKind::ABEP_R:
      params.need_rho();
      params.need_sigma();
      break;
    case ProcessKind::ABEP:
      params.need_sigma();
      break;
    default:
      break;
  }
}

template <class T>
bool state_space_contains(const ProcessSpec<T>& spec, const Config& eta) {
  if (!is_discrete(spec.kind)) return false;
  if (eta.size() != spec.params.k.size()) return false;
  for (int e : eta)
    if (e < 0) return false;
  std::optional<T> a;
  if (spec.kind == ProcessKind::ASIP_L || spec.kind == ProcessKind::SIP_L) a = spec.params.need_lambda();
  if (spec.kind == ProcessKind::ASIP_R || spec.kind == ProcessKind::SIP_R) a = spec.params.need_rho();
  if (a && !(*a > T(-1))) return T(2 * total(eta)) + spec.params.k_total() + *a < T(0);
  return true;
}

template <class T>
bool state_space_contains(const ProcessSpec<T>& spec, const std::vector<T>& x) {
  if (is_discrete(spec.kind)) return false;
  if (x.size() != spec.params.k.size()) return false;
  for (const auto& e : x)
    if (e < T(0)) return false;
  std::optional<T> a;
  if (spec.kind == ProcessKind::ABEP_L || spec.kind == ProcessKind::BEP_L) a = spec.params.need_lambda();
  if (spec.kind == ProcessKind::ABEP_R) a = spec.params.need_rho();
  if (a && !(*a > T(0))) return *a + T(2) * total(x) < T(0);
  return true;
}

template <class T>
T asip_rate_plus(const std::vector<T>& eta, const std::vector<T>& k, const T& q, int j) {
  using std::pow;
  return pow(q, eta[j] + k[j] - eta[j + 1] - T(1)) * q_bracket(eta[j], q) * q_bracket(eta[j + 1] + k[j + 1], q);
}

template <class T>
T asip_rate_minus(const std::vector<T>& eta, const std::vector<T>& k, const T& q, int j) {
  using std::pow;
  return pow(q, -(eta[j] + k[j] - eta[j - 1] - T(1))) * q_bracket(eta[j], q) *
         q_bracket(eta[j - 1] + k[j - 1], q);
}

namespace {

template <class T>
std::vector<T> as_real(const Config& eta) {
  std::vector<T> r;
  r.reserve(eta.size());
  for (int e : eta) r.push_back(T(e));
  return r;
}

template <class T>
void push(JumpList<T>& out, const Config& eta, int from, int to, const T& rate) {
  out.push_back({moved(eta, from, to), rate, from, to});
}

}  // namespace

template <class T>
JumpList<T> jump_rates(const ProcessSpec<T>& spec, const Config& eta) {
  using std::pow;
  if (!state_space_contains(spec, eta))
    throw Error(ErrorKind::invalid_state, std::string("invalid state ") + format_config(eta) + " for " +
                                              to_string(spec.kind));
  const auto& p = spec.params;
  const auto& k = p.k;
  const T& q = p.q;
  const int M = static_cast<int>(eta.size());
  const auto e = as_real<T>(eta);
  JumpList<T> out;
  switch (spec.kind) {
    case ProcessKind::ASIP:
      for (int j = 0; j + 1 < M; ++j) {
        if (eta[j] > 0) push(out, eta, j, j + 1, asip_rate_plus(e, k, q, j));
        if (eta[j + 1] > 0) push(out, eta, j + 1, j, asip_rate_minus(e, k, q, j + 1));
      }
      return out;
    case ProcessKind::ASIP_R: {
      const auto h = height_plus(eta, k, p.need_rho());
      for (int j = 0; j + 1 < M; ++j) {
        const int s = j + 1;
        if (eta[j] > 0) {
          const T c = asip_rate_plus(e, k, q, j) * (T(1) - pow(q, T(2) * e[j] - T(2) * h[s])) *
                      (T(1) - pow(q, T(2) * e[j + 1] - T(2) * h[s + 1])) /
                      ((T(1) - pow(q, -T(2) * h[s + 1])) * (T(1) - pow(q, -T(2) * h[s + 1] - T(2))));
          push(out, eta, j, j + 1, c);
        }
        if (eta[j + 1] > 0) {
          const int s2 = s + 1;
          const T c = asip_rate_minus(e, k, q, j + 1) * (T(1) - pow(q, -T(2) * e[j] - T(2) * h[s2])) *
                      (T(1) - pow(q, -T(2) * e[j + 1] - T(2) * h[s2 + 1])) /
                      ((T(1) - pow(q, -T(2) * h[s2])) * (T(1) - pow(q, -T(2) * h[s2] + T(2))));
          push(out, eta, j + 1, j, c);
        }
      }
      return out;
    }
    case ProcessKind::ASIP_L: {
      const auto h = height_minus(eta, k, p.need_lambda());
      for (int j = 0; j + 1 < M; ++j) {
        const int s = j + 1;
        if (eta[j] > 0) {
          const T c = asip_rate_plus(e, k, q, j) * (T(1) - pow(q, T(2) * h[s - 1] + T(2) * e[j])) *
                      (T(1) - pow(q, T(2) * h[s] + T(2) * e[j + 1])) /
                      ((T(1) - pow(q, T(2) * h[s])) * (T(1) - pow(q, T(2) * h[s] - T(2))));
          push(out, eta, j, j + 1, c);
        }
        if (eta[j + 1] > 0) {
          const int s2 = s + 1;
          const T c = asip_rate_minus(e, k, q, j + 1) * (T(1) - pow(q, T(2) * h[s2 - 1] - T(2) * e[j])) *
                      (T(1) - pow(q, T(2) * h[s2] - T(2) * e[j + 1])) /
                      ((T(1) - pow(q, T(2) * h[s2 - 1])) * (T(1) - pow(q, T(2) * h[s2 - 1] + T(2))));
          push(out, eta, j + 1, j, c);
        }
      }
      return out;
    }
    case ProcessKind::SIP:
      for (int j = 0; j + 1 < M; ++j) {
        if (eta[j] > 0) push(out, eta, j, j + 1, e[j] * (e[j + 1] + k[j + 1]));
        if (eta[j + 1] > 0) push(out, eta, j + 1, j, e[j + 1] * (e[j] + k[j]));
      }
      return out;
    case ProcessKind::SIP_L: {
      const auto h = height_minus(eta, k, p.need_lambda());
      for (int j = 0; j + 1 < M; ++j) {
        const int s = j + 1;
        if (eta[j] > 0)
          push(out, eta, j, j + 1,
               e[j] * (e[j + 1] + k[j + 1]) * (h[s - 1] + e[j]) * (h[s] + e[j + 1]) / (h[s] * (h[s] - T(1))));
        if (eta[j + 1] > 0) {
          const int s2 = s + 1;
          push(out, eta, j + 1, j,
               e[j + 1] * (e[j] + k[j]) * (h[s2 - 1] - e[j]) * (h[s2] - e[j + 1]) /
                   (h[s2 - 1] * (h[s2 - 1] + T(1))));
        }
      }
      return out;
    }
    case ProcessKind::SIP_R: {
      const auto h = height_plus(eta, k, p.need_rho());
      for (int j = 0; j + 1 < M; ++j) {
        const int s = j + 1;
        if (eta[j] > 0)
          push(out, eta, j, j + 1,
               e[j] * (e[j + 1] + k[j + 1]) * (h[s] - e[j]) * (h[s + 1] - e[j + 1]) /
                   (h[s + 1] * (h[s + 1] + T(1))));
        if (eta[j + 1] > 0) {
          const int s2 = s + 1;
          push(out, eta, j + 1, j,
               e[j + 1] * (e[j] + k[j]) * (h[s2] + e[j]) * (h[s2 + 1] + e[j + 1]) / (h[s2] * (h[s2] - T(1))));
        }
      }
      return out;
    }
    default:
      throw Error(ErrorKind::kind_mismatch, "jump_rates: continuous process kind");
  }
}

template <class T>
JumpList<T> jump_rates_bracket(const ProcessSpec<T>& spec, const Config& eta) {
  if (!state_space_contains(spec, eta))
    throw Error(ErrorKind::invalid_state, std::string("invalid state ") + format_config(eta));
  const auto& p = spec.params;
  const auto& k = p.k;
  const T& q = p.q;
  const int M = static_cast<int>(eta.size());
  const auto e = as_real<T>(eta);
  auto b = [&](const T& a) { return q_bracket(a, q); };
  JumpList<T> out;
  if (spec.kind == ProcessKind::ASIP_L) {
    const auto h = height_minus(eta, k, p.need_lambda());
    for (int j = 0; j + 1 < M; ++j) {
      // h[j] = h^-_{s-1}, h[j+1] = h^-_s, h[j+2] = h^-_{s+1} for the bond (s, s+1), s = j + 1.
      if (eta[j] > 0)
        push(out, eta, j, j + 1,
             b(e[j]) * b(e[j + 1] + k[j + 1]) * b(h[j] + e[j]) * b(h[j + 1] + e[j + 1]) /
                 (b(h[j + 1]) * b(h[j + 1] - T(1))));
      if (eta[j + 1] > 0)
        push(out, eta, j + 1, j,
             b(e[j + 1]) * b(e[j] + k[j]) * b(h[j + 1] - e[j]) * b(h[j + 2] - e[j + 1]) /
                 (b(h[j + 1]) * b(h[j + 1] + T(1))));
    }
    return out;
  }
  if (spec.kind == ProcessKind::ASIP_R) {
    const auto h = height_plus(eta, k, p.need_rho());
    for (int j = 0; j + 1 < M; ++j) {
      // h[j+1] = h^+_s, h[j+2] = h^+_{s+1}, h[j+3] = h^+_{s+2}.
      if (eta[j] > 0)
        push(out, eta, j, j + 1,
             b(e[j]) * b(e[j + 1] + k[j + 1]) * b(h[j + 1] - e[j]) * b(h[j + 2] - e[j + 1]) /
                 (b(h[j + 2]) * b(h[j + 2] + T(1))));
      if (eta[j + 1] > 0)
        push(out, eta, j + 1, j,
             b(e[j + 1]) * b(e[j] + k[j]) * b(h[j + 2] + e[j]) * b(h[j + 3] + e[j + 1]) /
                 (b(h[j + 2]) * b(h[j + 2] - T(1))));
    }
    return out;
  }
  throw Error(ErrorKind::kind_mismatch, "jump_rates_bracket: dynamic ASIP kinds only");
}

template <class T>
T apply_discrete_generator(const ProcessSpec<T>& spec, const std::function<T(const Config&)>& f,
                           const Config& eta) {
  const auto jumps = jump_rates(spec, eta);
  const T f0 = f(eta);
  T s = 0;
  for (const auto& jmp : jumps) s += jmp.rate * (f(jmp.target) - f0);
  return s;
}

namespace {

template <class T>
DiffusionCoefficients<T> abep_l(const std::vector<T>& x, const std::vector<T>& k, const T& s, const T& lam) {
  using std::cosh;
  using std::sinh;
  const int M = static_cast<int>(x.size());
  const auto E = energy_minus(x);
  auto sh = [&](const T& t) { return sinh(s * t); };
  DiffusionCoefficients<T> c;
  for (int j = 1; j < M; ++j) {
    const T S = lam + T(2) * E[j];
    const T a = x[j - 1];
    const T b = x[j];
    const T shS = sh(S);
    const T core = sh(a) * sh(b) * sh(S - a) * sh(S + b);
    c.A.push_back(core / (shS * shS) / (s * s));
    c.B.push_back((k[j - 1] * sh(b) * sh(S + b) / shS - k[j] * sh(a) * sh(S - a) / shS -
                   T(2) * core * cosh(s * S) / (shS * shS * shS)) /
                  s);
  }
  return c;
}

template <class T>
DiffusionCoefficients<T> bep_l(const std::vector<T>& x, const std::vector<T>& k, const T& lam) {
  const int M = static_cast<int>(x.size());
  const auto E = energy_minus(x);
  DiffusionCoefficients<T> c;
  for (int j = 1; j < M; ++j) {
    const T S = lam + T(2) * E[j];
    const T a = x[j - 1];
    const T b = x[j];
    const T core = a * b * (S - a) * (S + b);
    c.A.push_back(core / (S * S));
    c.B.push_back(k[j - 1] * b * (S + b) / S - k[j] * a * (S - a) / S - T(2) * core / (S * S * S));
  }
  return c;
}

}  // namespace

template <class T>
DiffusionCoefficients<T> abep_l_coefficients_exp(const std::vector<T>& x, const std::vector<T>& k,
                                                 const T& s, const T& lam) {
  using std::exp;
  const int M = static_cast<int>(x.size());
  const auto E = energy_minus(x);
  DiffusionCoefficients<T> c;
  for (int j = 1; j < M; ++j) {
    const T S = lam + T(2) * E[j];
    const T a = x[j - 1];
    const T b = x[j];
    const T ea = T(1) - exp(T(2) * s * a);
    const T eb = exp(-T(2) * s * b) - T(1);
    const T eSa = T(1) - exp(T(2) * s * (S - a));
    const T eSb = T(1) - exp(T(2) * s * (S + b));
    const T eS = T(1) - exp(T(2) * s * S);
    c.A.push_back(ea * eb * eSa * eSb / (eS * eS) / (T(4) * s * s));
    c.B.push_back((k[j - 1] * (T(1) - exp(-T(2) * s * b)) * eSb / eS + k[j] * ea * eSa / eS +
                   ea * eb * (T(1) + exp(T(2) * s * S)) * eSa * eSb / (eS * eS * eS)) /
                  (T(2) * s));
  }
  return c;
}

template <class T>
DiffusionCoefficients<T> diffusion_coefficients(const ProcessSpec<T>& spec, const std::vector<T>& x) {
  using std::exp;
  if (!state_space_contains(spec, x))
    throw Error(ErrorKind::invalid_state, std::string("invalid state for ") + to_string(spec.kind));
  const auto& p = spec.params;
  const auto& k = p.k;
  const int M = static_cast<int>(x.size());
  switch (spec.kind) {
    case ProcessKind::ABEP_L:
      return abep_l(x, k, p.need_sigma(), p.need_lambda());
    case ProcessKind::ABEP_R: {
      const auto rev = abep_l(reversed(x), reversed(k), p.need_sigma(), p.need_rho());
      DiffusionCoefficients<T> c;
      for (int j = 0; j + 1 < M; ++j) {
        c.A.push_back(rev.A[M - 2 - j]);
        c.B.push_back(-rev.B[M - 2 - j]);
      }
      return c;
    }
    case ProcessKind::ABEP: {
      const T& s = p.need_sigma();
      DiffusionCoefficients<T> c;
      for (int j = 0; j + 1 < M; ++j) {
        const T em = exp(-T(2) * s * x[j]) - T(1);
        const T ep = exp(T(2) * s * x[j + 1]) - T(1);
        c.A.push_back(-em * ep / (T(4) * s * s));
        c.B.push_back((k[j] * ep + k[j + 1] * em + em * ep) / (T(2) * s));
      }
      return c;
    }
    case ProcessKind::BEP_L:
      return bep_l(x, k, p.need_lambda());
    case ProcessKind::BEP: {
      DiffusionCoefficients<T> c;
      for (int j = 0; j + 1 < M; ++j) {
        c.A.push_back(x[j] * x[j + 1]);
        c.B.push_back(k[j] * x[j + 1] - k[j + 1] * x[j]);
      }
      return c;
    }
    default:
      throw Error(ErrorKind::kind_mismatch, "diffusion_coefficients: discrete process kind");
  }
}

template <class T>
std::pair<T, T> directional_derivatives(const std::function<T(const std::vector<T>&)>& f,
                                        const std::vector<T>& x, int j, const StencilOptions& opts) {
  T xmax = 0;
  for (const auto& v : x) xmax = std::max(xmax, v);
  const double base = std::is_same_v<T, double> ? 1e-3 : 1e-6;
  const T h = opts.step > 0 ? T(opts.step) : T(base) * (T(1) + xmax);
  if (x[j] - T(2) * h < T(0) || x[j + 1] - T(2) * h < T(0))
    throw Error(ErrorKind::domain, "stencil-out-of-domain: x too close to the boundary for the step");
  auto shifted = [&](const T& t) {
    auto y = x;
    y[j] += t;
    y[j + 1] -= t;
    return f(y);
  };
  auto stencil = [&](const T& hh) {
    const T f0 = shifted(T(0));
    const T fp1 = shifted(hh), fm1 = shifted(-hh), fp2 = shifted(T(2) * hh), fm2 = shifted(-T(2) * hh);
    const T d1 = (-fp2 + T(8) * fp1 - T(8) * fm1 + fm2) / (T(12) * hh);
    const T d2 = (-fp2 + T(16) * fp1 - T(30) * f0 + T(16) * fm1 - fm2) / (T(12) * hh * hh);
    return std::pair<T, T>(d1, d2);
  };
  auto coarse = stencil(h);
  if (!opts.richardson) return coarse;
  auto fine = stencil(h / T(2));
  return {(T(16) * fine.first - coarse.first) / T(15), (T(16) * fine.second - coarse.second) / T(15)};
}

template <class T>
T apply_diffusion_generator(const ProcessSpec<T>& spec, const std::function<T(const std::vector<T>&)>& f,
                            const std::vector<T>& x, const StencilOptions& opts,
                            const DerivativeProvider<T>& derivatives) {
  const auto c = diffusion_coefficients(spec, x);
  T s = 0;
  for (std::size_t j = 0; j + 1 < x.size(); ++j) {
    const auto d = derivatives ? derivatives(x, static_cast<int>(j))
                               : directional_derivatives(f, x, static_cast<int>(j), opts);
    s += c.A[j] * d.second + c.B[j] * d.first;
  }
  return s;
}

#define DL_INSTANTIATE_PROCESS(T)                                                                          \
  template struct ProcessSpec<T>;                                                                          \
  template bool state_space_contains(const ProcessSpec<T>&, const Config&);                                \
  template bool state_space_contains(const ProcessSpec<T>&, const std::vector<T>&);                        \
  template T asip_rate_plus(const std::vector<T>&, const std::vector<T>&, const T&, int);                  \
  template T asip_rate_minus(const std::vector<T>&, const std::vector<T>&, const T&, int);                 \
  template JumpList<T> jump_rates(const ProcessSpec<T>&, const Config&);                                   \
  template JumpList<T> jump_rates_bracket(const ProcessSpec<T>&, const Config&);                           \
  template T apply_discrete_generator(const ProcessSpec<T>&, const std::function<T(const Config&)>&,       \
                                      const Config&);                                                      \
  template DiffusionCoefficients<T> diffusion_coefficients(const ProcessSpec<T>&, const std::vector<T>&);  \
  template DiffusionCoefficients<T> abep_l_coefficients_exp(const std::vector<T>&, const std::vector<T>&,  \
                                                            const T&, const T&);                           \
  template std::pair<T, T> directional_derivatives(const std::function<T(const std::vector<T>&)>&,         \
                                                   const std::vector<T>&, int, const StencilOptions&);     \
  template T apply_diffusion_generator(const ProcessSpec<T>&, const std::function<T(const std::vector<T>&)>&, \
                                       const std::vector<T>&, const StencilOptions&,                       \
                                       const DerivativeProvider<T>&);

DL_INSTANTIATE_PROCESS(double)
DL_INSTANTIATE_PROCESS(hp)

}  // namespace duality_lab
