#pragma once

#include <duality_lab/duality.hpp>
#include <duality_lab/report.hpp>
#include <duality_lab/scalar.hpp>

#include <Eigen/Dense>
#include <boost/multiprecision/eigen.hpp>

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace duality_lab {

template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

// Generators of U_q(su(1,1)). Kinv is K^{-1}.
enum class Gen : char { K = 'K', Kinv = 'k', E = 'E', F = 'F' };
using Word = std::vector<Gen>;

// Formal sum of monomials. factors == 1: single-site words (right word empty);
// factors == 2: tensor monomials left (x) right.
template <class T>
struct AlgebraElement {
  int factors = 1;
  std::map<std::pair<Word, Word>, T> terms;

  static AlgebraElement scalar(const T& c, int factors = 1);
  static AlgebraElement generator(Gen g);
  static AlgebraElement tensor(const Word& left, const Word& right, const T& c = T(1));

  AlgebraElement& operator+=(const AlgebraElement& other);
  AlgebraElement operator+(const AlgebraElement& other) const;
  AlgebraElement operator-(const AlgebraElement& other) const;
  AlgebraElement operator*(const AlgebraElement& other) const;
  AlgebraElement operator*(const T& c) const;
  std::size_t size() const { return terms.size(); }
};

// Standard elements.
template <class T>
AlgebraElement<T> casimir(const T& q);
template <class T>
AlgebraElement<T> y_rho(const T& rho, const T& q);
// Coproduct of a single-site element, extended as an algebra homomorphism.
template <class T>
AlgebraElement<T> coproduct(const AlgebraElement<T>& x);
// The displayed expansion of Delta(Omega) in terms of tensor monomials.
template <class T>
AlgebraElement<T> coproduct_casimir_display(const T& q);
// f(A, B) = (q^2 + q^-2) ABA - A^2 B - B A^2.
template <class T>
AlgebraElement<T> aw_f(const AlgebraElement<T>& A, const AlgebraElement<T>& B, const T& q);
// Right-hand side of the Casimir decomposition in Y_rho and K^{-2}.
template <class T>
AlgebraElement<T> casimir_decomposition(const T& rho, const T& q, bool coproduct_form);

template <class T>
struct TruncatedRep {
  using value_type = T;
  int n_trunc = 14;  // basis 0..n_trunc
  int site = 0;      // 0-based site index into params.k
  ModelParams<T> params;

  int dim() const { return n_trunc + 1; }
  T k() const { return params.k.at(site); }
  T u() const;  // gauge factor u_j(k)
};

template <class T>
struct RepPair {
  TruncatedRep<T> left;
  TruncatedRep<T> right;
  int dim() const { return left.dim() * right.dim(); }
  int index(int a, int b) const { return a * right.dim() + b; }
};

template <class T>
RepPair<T> make_pair_rep(const ModelParams<T>& p, int n_trunc);

template <class T>
Matrix<T> generator_matrix(const TruncatedRep<T>& rep, Gen g);
template <class T>
Matrix<T> word_matrix(const TruncatedRep<T>& rep, const Word& w);
template <class T>
Matrix<T> rep_matrix(const TruncatedRep<T>& rep, const AlgebraElement<T>& x);
template <class T>
Matrix<T> rep_matrix(const RepPair<T>& rep, const AlgebraElement<T>& x);

// Weights w(n; k_j, q) u_j^{-2n} of the single-site inner product.
template <class T>
Vector<T> site_weights(const TruncatedRep<T>& rep);

template <class T>
CheckReport check_relations(const TruncatedRep<T>& rep);
template <class T>
CheckReport check_star_structure(const TruncatedRep<T>& rep);
template <class T>
CheckReport check_coideal(const RepPair<T>& rep, const T& rho);
template <class T>
CheckReport check_coproduct_casimir(const RepPair<T>& rep);
template <class T>
CheckReport check_casimir_self_adjoint(const TruncatedRep<T>& rep);
// -pi(Delta Omega) equals the two-site ASIP generator minus [(k_j+k_{j+1}-1)/2]_q^2.
template <class T>
CheckReport check_generator_equals_casimir(const RepPair<T>& rep);
template <class T>
CheckReport check_asc_eigen(const TruncatedRep<T>& rep, int x, const T& rho);
// Two-site eigen relation for P_R(., xi) with Delta(Y_rho).
template <class T>
CheckReport check_asc_eigen_pair(const RepPair<T>& rep, const Config& xi, const T& rho);
template <class T>
CheckReport check_casimir_decomposition(const TruncatedRep<T>& rep, const T& rho, const T& rho_alt);
template <class T>
CheckReport check_casimir_decomposition_pair(const RepPair<T>& rep, const T& rho);

template <class T>
T alpha_q(const T& rho, const T& q);

template <class T>
struct NineTermFit {
  std::map<std::pair<int, int>, T> coefficients;
  double residual = 0.0;  // relative least-squares residual
  int rank = 0;
};

// Fits pi(Delta(K^{-2})) P_R(., xi) = sum C(i1, i2) P_R(., xi + i1 e_1 + i2 e_2) on probe states.
template <class T>
NineTermFit<T> extract_nine_term_coefficients(const ModelParams<T>& p, const Config& xi,
                                              const std::vector<Config>& probe_states);
template <class T>
CheckReport check_nine_term(const ModelParams<T>& p, const Config& xi);

// pi(-Delta Omega) on P_R(., xi) moved to the xi variable with the ASIP_R rates.
template <class T>
CheckReport check_casimir_transfer(const RepPair<T>& rep, const Config& xi);

template <class T>
CheckReport check_aw_summation(int y, int x, const T& lambda, const T& rho, const T& v, const T& k, const T& q,
                               double tol);

}  // namespace duality_lab
