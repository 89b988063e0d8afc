#pragma once

#include <duality_lab/duality.hpp>
#include <duality_lab/scalar.hpp>

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace duality_lab {

enum class ProcessKind { ASIP, ASIP_L, ASIP_R, SIP, SIP_L, SIP_R, ABEP, ABEP_L, ABEP_R, BEP, BEP_L };

const char* to_string(ProcessKind kind);
bool is_discrete(ProcessKind kind);

template <class T>
struct ProcessSpec {
  ProcessKind kind = ProcessKind::ASIP;
  ModelParams<T> params;

  // Checks kind/boundary consistency. Throws Error(kind_mismatch).
  void validate() const;
};

template <class T>
struct Jump {
  Config target;
  T rate;
  int from;
  int to;
};

template <class T>
using JumpList = std::vector<Jump<T>>;

template <class T>
struct DiffusionCoefficients {
  std::vector<T> A;  // bond j: second-order coefficient along e_j - e_{j+1}
  std::vector<T> B;  // bond j: first-order coefficient
};

template <class T>
bool state_space_contains(const ProcessSpec<T>& spec, const Config& eta);
template <class T>
bool state_space_contains(const ProcessSpec<T>& spec, const std::vector<T>& x);

// ASIP rates evaluated as formulas on real occupation values (0-based site j).
template <class T>
T asip_rate_plus(const std::vector<T>& eta, const std::vector<T>& k, const T& q, int j);
template <class T>
T asip_rate_minus(const std::vector<T>& eta, const std::vector<T>& k, const T& q, int j);

template <class T>
JumpList<T> jump_rates(const ProcessSpec<T>& spec, const Config& eta);
// Dynamic kinds only: rates in the q-bracket form.
template <class T>
JumpList<T> jump_rates_bracket(const ProcessSpec<T>& spec, const Config& eta);

template <class T>
T apply_discrete_generator(const ProcessSpec<T>& spec, const std::function<T(const Config&)>& f,
                           const Config& eta);

template <class T>
DiffusionCoefficients<T> diffusion_coefficients(const ProcessSpec<T>& spec, const std::vector<T>& x);
// ABEP_L coefficients written with exponentials instead of sinh.
template <class T>
DiffusionCoefficients<T> abep_l_coefficients_exp(const std::vector<T>& x, const std::vector<T>& k,
                                                 const T& sigma, const T& lambda);

struct StencilOptions {
  double step = 0.0;  // 0 selects the default 1e-3 (1 + max x) in double, 1e-6 (1 + max x) in hp
  bool richardson = false;
};

// (d_j f, d_j^2 f) at x along e_j - e_{j+1}.
template <class T>
using DerivativeProvider = std::function<std::pair<T, T>(const std::vector<T>&, int)>;

template <class T>
T apply_diffusion_generator(const ProcessSpec<T>& spec, const std::function<T(const std::vector<T>&)>& f,
                            const std::vector<T>& x, const StencilOptions& opts = {},
                            const DerivativeProvider<T>& derivatives = {});

// Finite-difference directional derivatives used by the generator.
template <class T>
std::pair<T, T> directional_derivatives(const std::function<T(const std::vector<T>&)>& f,
                                        const std::vector<T>& x, int j, const StencilOptions& opts);

}  // namespace duality_lab
