#pragma once

// One-dimensional Hermite machinery.
//
// Convention used throughout the library: a link is written as
//
//     sigma(t) = sum_k (gamma_k / k!) He_k(t),
//
// so gamma_k = E[sigma(Z) He_k(Z)] for Z ~ N(0,1). Under this convention
// He_2 itself has gamma_2 = 2, and E[sigma(Z)^2] = sum_k gamma_k^2 / k!.
// Code that assumes the alternative convention sum_k gamma_k He_k will get
// coefficients that are off by k!.

#include <functional>
#include <span>
#include <vector>

namespace sil {

inline constexpr int kMaxHermiteDegree = 32;

// Probabilists' Hermite polynomial He_k(t) by three-term recurrence.
double he_eval(int k, double t);

// Hermite coefficients of the shifted ReLU: phi(. + b) = sum_k (rho_k(b)/k!) He_k.
// rho_1(b) = Phi(b); rho_k(b) = exp(-b^2/2)/sqrt(2 pi) He_{k-2}(-b) for k >= 2.
double relu_shift_coeff(int k, double b);

// Exact integer monomial coefficients: He_k(t) = sum_j hermite_monomial(k, j) t^j.
long long hermite_monomial(int k, int j);

// Exact integer coefficients: t^j = sum_k monomial_hermite(j, k) He_k(t).
long long monomial_hermite(int j, int k);

// Monomial coefficients c_0..c_p -> gamma_0..gamma_p.
std::vector<double> to_hermite(std::span<const double> monomial_coeffs);

// gamma_0..gamma_p -> monomial coefficients c_0..c_p.
std::vector<double> to_monomials(std::span<const double> hermite_coeffs);

// Default relative tolerance for "nonzero" Hermite coefficients.
inline constexpr double kHermiteTol = 1e-10;

struct LinkSpec {
  std::vector<double> monomial_coeffs;
  std::vector<double> hermite_coeffs;
  int info_exponent = 0;  // 0 when every gamma_k (k >= 1) is negligible
  int degree = 0;

  static LinkSpec from_monomials(std::vector<double> coeffs);
  static LinkSpec from_hermite(std::vector<double> gammas);
  // sigma = scale * He_k.
  static LinkSpec hermite_term(int k, double scale = 1.0);

  double operator()(double t) const;
  // Evaluates sum_k (gamma_k/k!) He_k(t) directly in the Hermite basis.
  double eval_hermite(double t) const;
  // E[sigma(Z)^2] - E[sigma(Z)]^2 = sum_{k>=1} gamma_k^2 / k!.
  double variance() const;
  double gamma(int k) const;
};

// Centers and scales to E[sigma] = 0, E[sigma^2] = 1. Throws std::invalid_argument
// for a link without any non-constant component.
LinkSpec normalize_link(const LinkSpec& spec);

// Smallest k >= 1 with |gamma_k| > tol * max_k |gamma_k|. Throws
// std::invalid_argument when no such k exists.
int information_exponent(const LinkSpec& spec, double tol = kHermiteTol);

struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;  // sum to one
};

// Probabilists' Gauss-Hermite rule with the given number of nodes (>= 2),
// exact for polynomials of degree <= 2*nodes - 1.
GaussHermiteRule gauss_hermite_rule(int nodes);

// E[f(Z)], Z ~ N(0,1), by Gauss-Hermite quadrature.
double gauss_hermite_expect(const std::function<double(double)>& f, int nodes);

}  // namespace sil
