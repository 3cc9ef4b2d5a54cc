#include "sil/hermite.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "sil/types.hpp"

namespace sil {
namespace {

constexpr int kTable = kMaxHermiteDegree + 1;
using IntTable = std::array<std::array<long long, kTable>, kTable>;

long long narrow(__int128 v) {
  if (v > std::numeric_limits<long long>::max() || v < std::numeric_limits<long long>::min()) {
    throw std::overflow_error("Hermite coefficient table overflow");
  }
  return static_cast<long long>(v);
}

// He_{k+1} = t He_k - k He_{k-1}
IntTable build_hermite_table() {
  std::array<std::array<__int128, kTable>, kTable> h{};
  h[0][0] = 1;
  h[1][1] = 1;
  for (int k = 1; k + 1 < kTable; ++k) {
    for (int j = 0; j < kTable; ++j) {
      __int128 v = -static_cast<__int128>(k) * h[k - 1][j];
      if (j > 0) v += h[k][j - 1];
      h[k + 1][j] = v;
    }
  }
  IntTable out{};
  for (int k = 0; k < kTable; ++k)
    for (int j = 0; j < kTable; ++j) out[k][j] = narrow(h[k][j]);
  return out;
}

// t * He_k = He_{k+1} + k He_{k-1}, applied to t^j = sum_k T[j][k] He_k.
IntTable build_inverse_table() {
  std::array<std::array<__int128, kTable>, kTable> m{};
  m[0][0] = 1;
  for (int j = 0; j + 1 < kTable; ++j) {
    for (int k = 0; k <= j; ++k) {
      const __int128 c = m[j][k];
      if (c == 0) continue;
      m[j + 1][k + 1] += c;
      if (k > 0) m[j + 1][k - 1] += static_cast<__int128>(k) * c;
    }
  }
  IntTable out{};
  for (int j = 0; j < kTable; ++j)
    for (int k = 0; k < kTable; ++k) out[j][k] = narrow(m[j][k]);
  return out;
}

const IntTable& hermite_table() {
  static const IntTable table = build_hermite_table();
  return table;
}

const IntTable& inverse_table() {
  static const IntTable table = build_inverse_table();
  return table;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

void check_degree(std::size_t size) {
  if (size == 0) throw std::invalid_argument("link has no coefficients");
  if (size > static_cast<std::size_t>(kTable)) {
    throw std::invalid_argument("link degree exceeds " + std::to_string(kMaxHermiteDegree));
  }
}

}  // namespace

double he_eval(int k, double t) {
  if (k < 0) throw std::invalid_argument("Hermite degree must be non-negative");
  if (k == 0) return 1.0;
  double prev = 1.0;
  double cur = t;
  for (int j = 1; j < k; ++j) {
    const double next = t * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double relu_shift_coeff(int k, double b) {
  if (k < 1) throw std::invalid_argument("relu_shift_coeff requires k >= 1");
  if (k == 1) return 0.5 * std::erfc(-b / std::numbers::sqrt2);
  return std::exp(-0.5 * b * b) / std::sqrt(2.0 * std::numbers::pi) * he_eval(k - 2, -b);
}

long long hermite_monomial(int k, int j) {
  if (k < 0 || j < 0 || k >= kTable || j >= kTable) throw std::out_of_range("hermite_monomial index");
  return hermite_table()[k][j];
}

long long monomial_hermite(int j, int k) {
  if (k < 0 || j < 0 || k >= kTable || j >= kTable) throw std::out_of_range("monomial_hermite index");
  return inverse_table()[j][k];
}

std::vector<double> to_hermite(std::span<const double> monomial_coeffs) {
  check_degree(monomial_coeffs.size());
  const auto& inv = inverse_table();
  const int p = static_cast<int>(monomial_coeffs.size()) - 1;
  std::vector<double> gamma(monomial_coeffs.size(), 0.0);
  for (int k = 0; k <= p; ++k) {
    long double acc = 0.0L;
    for (int j = k; j <= p; j += 2) {
      acc += static_cast<long double>(monomial_coeffs[j]) * static_cast<long double>(inv[j][k]);
    }
    gamma[k] = static_cast<double>(acc * static_cast<long double>(factorial(k)));
  }
  return gamma;
}

std::vector<double> to_monomials(std::span<const double> hermite_coeffs) {
  check_degree(hermite_coeffs.size());
  const auto& he = hermite_table();
  const int p = static_cast<int>(hermite_coeffs.size()) - 1;
  std::vector<double> c(hermite_coeffs.size(), 0.0);
  for (int j = 0; j <= p; ++j) {
    long double acc = 0.0L;
    for (int k = j; k <= p; k += 2) {
      acc += static_cast<long double>(hermite_coeffs[k]) / static_cast<long double>(factorial(k)) *
             static_cast<long double>(he[k][j]);
    }
    c[j] = static_cast<double>(acc);
  }
  return c;
}

namespace {

int detect_info_exponent(const std::vector<double>& gamma, double tol) {
  double largest = 0.0;
  for (double g : gamma) largest = std::max(largest, std::abs(g));
  if (largest == 0.0) return 0;
  for (std::size_t k = 1; k < gamma.size(); ++k) {
    if (std::abs(gamma[k]) > tol * largest) return static_cast<int>(k);
  }
  return 0;
}

int trimmed_degree(const std::vector<double>& coeffs) {
  for (int k = static_cast<int>(coeffs.size()) - 1; k > 0; --k) {
    if (coeffs[k] != 0.0) return k;
  }
  return 0;
}

}  // namespace

LinkSpec LinkSpec::from_monomials(std::vector<double> coeffs) {
  check_degree(coeffs.size());
  LinkSpec spec;
  spec.hermite_coeffs = to_hermite(coeffs);
  spec.monomial_coeffs = std::move(coeffs);
  spec.degree = trimmed_degree(spec.monomial_coeffs);
  spec.info_exponent = detect_info_exponent(spec.hermite_coeffs, kHermiteTol);
  return spec;
}

LinkSpec LinkSpec::from_hermite(std::vector<double> gammas) {
  check_degree(gammas.size());
  LinkSpec spec;
  spec.monomial_coeffs = to_monomials(gammas);
  spec.hermite_coeffs = std::move(gammas);
  spec.degree = trimmed_degree(spec.hermite_coeffs);
  spec.info_exponent = detect_info_exponent(spec.hermite_coeffs, kHermiteTol);
  return spec;
}

LinkSpec LinkSpec::hermite_term(int k, double scale) {
  if (k < 0 || k > kMaxHermiteDegree) throw std::invalid_argument("Hermite degree out of range");
  std::vector<double> gammas(static_cast<std::size_t>(k) + 1, 0.0);
  gammas[k] = scale * factorial(k);
  return from_hermite(std::move(gammas));
}

double LinkSpec::operator()(double t) const {
  double acc = 0.0;
  for (auto it = monomial_coeffs.rbegin(); it != monomial_coeffs.rend(); ++it) acc = acc * t + *it;
  return acc;
}

double LinkSpec::eval_hermite(double t) const {
  double acc = 0.0;
  double prev = 1.0;
  double cur = t;
  double fact = 1.0;
  for (std::size_t k = 0; k < hermite_coeffs.size(); ++k) {
    double he;
    if (k == 0) {
      he = 1.0;
    } else if (k == 1) {
      he = t;
    } else {
      const double next = t * cur - static_cast<double>(k - 1) * prev;
      prev = cur;
      cur = next;
      he = cur;
    }
    if (k > 0) fact *= static_cast<double>(k);
    acc += hermite_coeffs[k] / fact * he;
  }
  return acc;
}

double LinkSpec::variance() const {
  double v = 0.0;
  for (std::size_t k = 1; k < hermite_coeffs.size(); ++k) {
    v += hermite_coeffs[k] * hermite_coeffs[k] / factorial(static_cast<int>(k));
  }
  return v;
}

double LinkSpec::gamma(int k) const {
  if (k < 0 || k >= static_cast<int>(hermite_coeffs.size())) return 0.0;
  return hermite_coeffs[k];
}

LinkSpec normalize_link(const LinkSpec& spec) {
  const double var = spec.variance();
  if (!(var > 0.0) || !std::isfinite(var)) {
    throw std::invalid_argument("cannot normalize a link without non-constant Hermite components");
  }
  const double scale = 1.0 / std::sqrt(var);
  std::vector<double> gammas = spec.hermite_coeffs;
  gammas[0] = 0.0;
  // Already-normalized input passes through untouched.
  if (std::abs(var - 1.0) > 1e-15) {
    for (std::size_t k = 1; k < gammas.size(); ++k) gammas[k] *= scale;
  }
  return LinkSpec::from_hermite(std::move(gammas));
}

int information_exponent(const LinkSpec& spec, double tol) {
  const int k = detect_info_exponent(spec.hermite_coeffs, tol);
  if (k == 0) throw std::invalid_argument("degenerate link: no non-zero Hermite coefficient");
  return k;
}

GaussHermiteRule gauss_hermite_rule(int nodes) {
  if (nodes < 2) throw std::invalid_argument("Gauss-Hermite rule needs at least 2 nodes");
  // Golub-Welsch on the probabilists' Jacobi matrix, then Newton polish and
  // Christoffel weights w = 1 / sum_k He_k(x)^2 / k!.
  Matrix jacobi = Matrix::Zero(nodes, nodes);
  for (int k = 1; k < nodes; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi, Eigen::EigenvaluesOnly);
  GaussHermiteRule rule;
  rule.nodes.resize(nodes);
  rule.weights.resize(nodes);
  for (int i = 0; i < nodes; ++i) {
    double x = solver.eigenvalues()[i];
    for (int it = 0; it < 3; ++it) {
      const double p = he_eval(nodes, x);
      const double dp = nodes * he_eval(nodes - 1, x);
      if (dp == 0.0) break;
      x -= p / dp;
    }
    // orthonormal recurrence keeps the Christoffel sum in range
    double prev = 0.0;
    double cur = 1.0;
    double christoffel = 1.0;
    for (int k = 0; k + 1 < nodes; ++k) {
      const double next = (x * cur - std::sqrt(static_cast<double>(k)) * prev) / std::sqrt(k + 1.0);
      prev = cur;
      cur = next;
      christoffel += cur * cur;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / christoffel;
  }
  return rule;
}

double gauss_hermite_expect(const std::function<double(double)>& f, int nodes) {
  const GaussHermiteRule rule = gauss_hermite_rule(nodes);
  long double acc = 0.0L;
  for (int i = 0; i < nodes; ++i) acc += static_cast<long double>(rule.weights[i]) * f(rule.nodes[i]);
  return static_cast<double>(acc);
}

}  // namespace sil
