#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "sil/hermite.hpp"

using namespace sil;

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

// Independent E[f(Z)] by composite Simpson on [-12, 12].
double simpson_expect(const std::function<double(double)>& f) {
  const int n = 20000;
  const double lo = -12.0, hi = 12.0, h = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = lo + i * h;
    const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * f(t) * std::exp(-0.5 * t * t);
  }
  return acc * h / 3.0 * kInvSqrt2Pi;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

TEST(HeEval, SmallValues) {
  EXPECT_DOUBLE_EQ(he_eval(2, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(he_eval(0, 7.3), 1.0);
  EXPECT_DOUBLE_EQ(he_eval(4, 0.0), 3.0);
  // He_4 = t^4 - 6t^2 + 3 written out
  for (double t : {-1.7, 0.3, 2.2}) {
    EXPECT_NEAR(he_eval(4, t), t * t * t * t - 6 * t * t + 3, 1e-12);
  }
}

TEST(HeEval, DerivativeRecurrence) {
  for (int k = 1; k <= 8; ++k) {
    for (int i = 0; i < 10; ++i) {
      const double t = -2.5 + 0.55 * i;
      const double h = 1e-5;
      const double fd = (he_eval(k, t + h) - he_eval(k, t - h)) / (2 * h);
      const double exact = k * he_eval(k - 1, t);
      EXPECT_LE(std::abs(fd - exact), 1e-6 * std::max(1.0, std::abs(exact))) << "k=" << k << " t=" << t;
    }
  }
}

TEST(ReluShiftCoeff, AtZero) {
  EXPECT_NEAR(relu_shift_coeff(1, 0.0), 0.5, 1e-12);
  EXPECT_NEAR(relu_shift_coeff(2, 0.0), kInvSqrt2Pi, 1e-12);
  EXPECT_NEAR(relu_shift_coeff(3, 0.0), 0.0, 1e-12);
  EXPECT_NEAR(relu_shift_coeff(4, 0.0), -kInvSqrt2Pi, 1e-12);
  EXPECT_NEAR(relu_shift_coeff(6, 0.0), 3.0 * kInvSqrt2Pi, 1e-12);
}

TEST(ReluShiftCoeff, MatchesProjection) {
  // rho_k(b) = E[relu(Z + b) He_k(Z)]
  for (double b : {-1.3, 0.0, 0.4, 2.0}) {
    for (int k = 1; k <= 7; ++k) {
      const double proj = simpson_expect([&](double t) { return std::max(t + b, 0.0) * he_eval(k, t); });
      EXPECT_NEAR(relu_shift_coeff(k, b), proj, 1e-7) << "k=" << k << " b=" << b;
    }
  }
}

TEST(ReluShiftCoeff, DerivativeSecondMomentBounded) {
  for (double b : {-2.0, 0.0, 2.0}) {
    const double m2 = simpson_expect([&](double t) { return t + b > 0.0 ? 1.0 : 0.0; });
    EXPECT_LE(m2, 1.0);
  }
}

TEST(ToHermite, Examples) {
  auto g = to_hermite(std::vector<double>{0, 0, 1});
  ASSERT_GE(g.size(), 3u);
  EXPECT_DOUBLE_EQ(g[0], 1.0);
  EXPECT_DOUBLE_EQ(g[1], 0.0);
  EXPECT_DOUBLE_EQ(g[2], 2.0);

  g = to_hermite(std::vector<double>{0, 1});
  EXPECT_DOUBLE_EQ(g[0], 0.0);
  EXPECT_DOUBLE_EQ(g[1], 1.0);

  g = to_hermite(std::vector<double>{0, 0, 0, 1});
  EXPECT_DOUBLE_EQ(g[1], 3.0);
  EXPECT_DOUBLE_EQ(g[3], 6.0);
  EXPECT_DOUBLE_EQ(g[0], 0.0);
  EXPECT_DOUBLE_EQ(g[2], 0.0);
}

TEST(ToHermite, CoefficientsAreProjections) {
  const std::vector<double> c{0.3, -1.0, 0.5, 0.25, -0.1};
  const auto g = to_hermite(c);
  for (int k = 0; k < static_cast<int>(g.size()); ++k) {
    const double proj = simpson_expect([&](double t) {
      double p = 0.0, tp = 1.0;
      for (double ci : c) {
        p += ci * tp;
        tp *= t;
      }
      return p * he_eval(k, t);
    });
    EXPECT_NEAR(g[k], proj, 1e-8) << k;
  }
}

TEST(ToHermite, RoundTripRandomPolynomials) {
  std::mt19937 gen(11);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> c(7);
    for (auto& x : c) x = nd(gen);
    const LinkSpec link = LinkSpec::from_monomials(c);
    for (int i = 0; i < 100; ++i) {
      const double t = 3.0 * (std::uniform_real_distribution<double>(-1, 1)(gen));
      double direct = 0.0, tp = 1.0;
      for (double ci : c) {
        direct += ci * tp;
        tp *= t;
      }
      EXPECT_NEAR(link.eval_hermite(t), direct, 1e-9 * std::max(1.0, std::abs(direct)));
    }
    const auto back = to_monomials(link.hermite_coeffs);
    for (std::size_t j = 0; j < c.size(); ++j) EXPECT_NEAR(back[j], c[j], 1e-10);
  }
}

TEST(ExactIntegerTables, InverseOfEachOther) {
  for (int a = 0; a <= 12; ++a) {
    for (int b = 0; b <= 12; ++b) {
      long long sum = 0;
      for (int k = 0; k <= 12; ++k) sum += hermite_monomial(a, k) * monomial_hermite(k, b);
      EXPECT_EQ(sum, a == b ? 1 : 0);
    }
  }
}

TEST(NormalizeLink, He2ScalesByInvSqrt2) {
  const LinkSpec n = normalize_link(LinkSpec::hermite_term(2));
  EXPECT_NEAR(n.gamma(2), 2.0 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(n.variance(), 1.0, 1e-12);
}

TEST(NormalizeLink, Idempotent) {
  const LinkSpec once = normalize_link(LinkSpec::from_monomials({0.5, 1.0, -2.0, 0.3}));
  const LinkSpec twice = normalize_link(once);
  ASSERT_EQ(once.hermite_coeffs.size(), twice.hermite_coeffs.size());
  for (std::size_t k = 0; k < once.hermite_coeffs.size(); ++k) {
    EXPECT_NEAR(once.hermite_coeffs[k], twice.hermite_coeffs[k], 1e-14);
  }
}

TEST(NormalizeLink, SquareBecomesScaledHe2) {
  const LinkSpec n = normalize_link(LinkSpec::from_monomials({0, 0, 1}));
  EXPECT_NEAR(n.gamma(0), 0.0, 1e-15);
  EXPECT_NEAR(n.gamma(2), std::sqrt(2.0), 1e-14);
  const double mean = simpson_expect([&](double t) { return n(t); });
  const double second = simpson_expect([&](double t) { return n(t) * n(t); });
  EXPECT_NEAR(mean, 0.0, 1e-10);
  EXPECT_NEAR(second, 1.0, 1e-10);
}

TEST(NormalizeLink, UnitVarianceProperty) {
  std::mt19937 gen(5);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> c(6);
    for (auto& x : c) x = nd(gen);
    const LinkSpec n = normalize_link(LinkSpec::from_monomials(c));
    double v = 0.0;
    for (int k = 1; k <= n.degree; ++k) v += n.gamma(k) * n.gamma(k) / factorial(k);
    EXPECT_NEAR(n.gamma(0), 0.0, 1e-12);
    EXPECT_NEAR(v, 1.0, 1e-12);
    for (int i = 0; i < 16; ++i) {
      const double t = -3.0 + 0.4 * i;
      EXPECT_NEAR(n(t), n.eval_hermite(t), 1e-10 * std::max(1.0, std::abs(n(t))));
    }
  }
}

TEST(NormalizeLink, ConstantRejected) {
  EXPECT_THROW(normalize_link(LinkSpec::from_monomials({3.0})), std::invalid_argument);
}

TEST(InformationExponent, Examples) {
  EXPECT_EQ(information_exponent(LinkSpec::hermite_term(2)), 2);
  EXPECT_EQ(information_exponent(LinkSpec::from_hermite({0, 1, 0, 6})), 1);
  const LinkSpec cancel = LinkSpec::from_hermite(
      {0, 0, 2.0 / std::sqrt(2.0), 0, 24.0 * 2.0 * std::sqrt(3.0) / std::sqrt(24.0)});
  EXPECT_EQ(information_exponent(cancel), 2);
  EXPECT_EQ(LinkSpec::hermite_term(3).info_exponent, 3);
}

TEST(GaussHermite, Examples) {
  EXPECT_NEAR(gauss_hermite_expect([](double t) { return t * t; }, 8), 1.0, 1e-13);
  EXPECT_NEAR(gauss_hermite_expect([](double t) { return he_eval(3, t) * he_eval(3, t); }, 16), 6.0, 1e-11);
  EXPECT_NEAR(gauss_hermite_expect([](double t) { return he_eval(2, t) * he_eval(4, t); }, 16), 0.0, 1e-11);
}

TEST(GaussHermite, Orthogonality) {
  for (int j = 0; j <= 10; ++j) {
    for (int k = 0; k <= 10; ++k) {
      const double e = gauss_hermite_expect([&](double t) { return he_eval(j, t) * he_eval(k, t); }, 32);
      EXPECT_NEAR(e, j == k ? factorial(k) : 0.0, 1e-8) << j << "," << k;
    }
  }
}

TEST(GaussHermite, WeightsSumToOne) {
  const auto rule = gauss_hermite_rule(20);
  double s = 0.0;
  for (double w : rule.weights) s += w;
  EXPECT_NEAR(s, 1.0, 1e-13);
}
