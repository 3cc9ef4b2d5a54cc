#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "sil/rng.hpp"
#include "sil/training.hpp"

using namespace sil;

namespace {

Dataset fixture(const IndexModel& model, Index n, std::uint64_t seed) {
  return augment(sample_dataset(model, n, derive_seed(seed, {1})), derive_seed(seed, {2}));
}

IndexModel he2_model(int d, int s, double delta) {
  return make_single_index(make_sparse_direction(d, s, DirectionProfile::flat()),
                           normalize_link(LinkSpec::hermite_term(2)), delta);
}

SupportSet support_of(std::vector<int> idx) {
  SupportSet J;
  for (int i : idx) J.add(i, 0);
  return J;
}

TrainConfig small_config(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.M = 4;
  cfg.c = 0.3;
  cfg.m = 8;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST(TrainConfig, StepAndDecayTied) {
  TrainConfig cfg;
  cfg.M = 16;
  cfg.kappa = 2.0;
  cfg.info_exponent = 3;
  EXPECT_DOUBLE_EQ(cfg.resolved_eta1(), 2.0 * 16.0);
  EXPECT_DOUBLE_EQ(cfg.lambda1(), 1.0 / cfg.resolved_eta1());
  cfg.mode = TrainMode::multi;
  EXPECT_DOUBLE_EQ(cfg.resolved_eta1(), 32.0);
  cfg.eta1 = 0.7;
  EXPECT_DOUBLE_EQ(cfg.resolved_eta1(), 0.7);
  cfg.m = 10;
  EXPECT_DOUBLE_EQ(cfg.resolved_lambda_t(100), 10.0 / std::pow(std::log(100.0), 2));
  EXPECT_EQ(cfg.resolved_T_max(1000), 50 * static_cast<int>(std::ceil(std::log(10000.0))));
}

TEST(TrainConfig, Validation) {
  TrainConfig cfg = small_config(0);
  EXPECT_NO_THROW(validate(cfg));
  cfg.kappa = -1.0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = small_config(0);
  cfg.m = 0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
  cfg = small_config(0);
  cfg.c = 1.0;
  EXPECT_THROW(validate(cfg), std::invalid_argument);
}

TEST(RestrictedReinit, RowsLiveOnSupport) {
  const SupportSet J = support_of({1, 4, 6});
  const NetParams net = restricted_reinit(J, 5, 9, 3);
  for (Index j = 0; j < net.width(); ++j) {
    EXPECT_NEAR(net.W.row(j).norm(), 1.0, 1e-12);
    for (Index c = 0; c < 9; ++c) {
      if (!J.contains(static_cast<int>(c))) EXPECT_EQ(net.W(j, c), 0.0);
    }
    const Index k = mirror_index(j, 5);
    EXPECT_EQ(net.a[j], -net.a[k]);
    EXPECT_TRUE((net.W.row(j).array() == net.W.row(k).array()).all());
  }
}

TEST(RestrictedReinit, SingletonSupportGivesSignedBasis) {
  const NetParams net = restricted_reinit(support_of({2}), 6, 5, 1);
  for (Index j = 0; j < net.width(); ++j) {
    EXPECT_EQ(std::abs(net.W(j, 2)), 1.0);
    EXPECT_EQ(net.W.row(j).cwiseAbs().sum(), 1.0);
  }
}

TEST(FirstLayerStep, WeightDecayCancellationIsBitwise) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(derive_seed(300, {seed}));
    const int d = 6 + static_cast<int>(seed % 5);
    const Dataset data = fixture(he2_model(d, 3, 0.1), 200 + 50 * seed, seed);
    SupportSet J;
    for (int i = 0; i < data.dim(); ++i)
      if (rng.uniform() < 0.5) J.add(i, 0);
    if (J.size() == 0) J.add(0, 0);
    const NetParams net = restricted_reinit(J, 4, data.dim(), seed);
    const double eta1 = 0.1 + 5.0 * rng.uniform();
    const Matrix W1 = first_layer_step(data, net, J, eta1);
    for (Index j = 0; j < net.width(); ++j) {
      const Vector g = grad_w_row_on(data, net.a[j], net.W.row(j).transpose(), net.b[j], J.indices);
      for (Index c = 0; c < data.dim(); ++c) {
        const double expect = J.contains(static_cast<int>(c)) ? -eta1 * g[c] : 0.0;
        EXPECT_EQ(W1(j, c), expect);
      }
    }
    const Matrix two = first_layer_step_two_term(data, net, J, eta1);
    EXPECT_LE((two - W1).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, W1.cwiseAbs().maxCoeff()));
  }
}

TEST(FirstLayerStep, MirroredRowsAreNegated) {
  const Dataset data = fixture(he2_model(8, 2, 0.0), 300, 4);
  const SupportSet J = support_of({0, 1, 5, 8});
  const NetParams net = restricted_reinit(J, 1, data.dim(), 2);
  const Matrix W1 = first_layer_step(data, net, J, 1.5);
  EXPECT_EQ(W1.row(0), (-W1.row(1)).eval());
}

TEST(SecondLayer, MonotoneAndMatchesNormalEquations) {
  const Dataset data = fixture(he2_model(5, 2, 0.1), 32, 8);
  const SupportSet J = SupportSet::full(data.dim());
  const NetParams net = restricted_reinit(J, 2, data.dim(), 3);
  const Matrix W1 = first_layer_step(data, net, J, 1.0);
  const double lambda = 0.05;
  const SecondLayerResult r = second_layer_fit(data, W1, 2, lambda, 200000, 1e-13, 5);
  EXPECT_TRUE(r.converged);
  for (std::size_t t = 1; t < r.objective.size(); ++t) EXPECT_LE(r.objective[t], r.objective[t - 1]);
  const Vector direct = ridge_closed_form(data, W1, r.b1, lambda);
  EXPECT_LE((r.a - direct).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(SecondLayer, HeavyRidgeShrinksToZero) {
  const Dataset data = fixture(he2_model(5, 2, 0.1), 64, 9);
  const SupportSet J = SupportSet::full(data.dim());
  const Matrix W1 = first_layer_step(data, restricted_reinit(J, 3, data.dim(), 1), J, 1.0);
  double prev = 1e300;
  for (double lambda : {1.0, 1e3, 1e6}) {
    const SecondLayerResult r = second_layer_fit(data, W1, 3, lambda, 10000, 1e-12, 2);
    EXPECT_LT(r.a.norm(), prev);
    prev = r.a.norm();
  }
  EXPECT_LE(prev, 1e-5);
}

TEST(Fit, SupportConfinement) {
  for (auto mode : {TrainMode::single, TrainMode::multi}) {
    const Dataset data = fixture(he2_model(20, 3, 0.2), 600, 3);
    TrainConfig cfg = small_config(4);
    cfg.mode = mode;
    const Predictor p = fit(data, cfg);
    for (Index c = 0; c < p.dim(); ++c) {
      if (p.J.contains(static_cast<int>(c))) continue;
      EXPECT_EQ(p.mu_hat[c], 0.0);
      for (Index j = 0; j < p.W1.rows(); ++j) EXPECT_EQ(p.W1(j, c), 0.0);
    }
    if (mode == TrainMode::single) EXPECT_EQ(p.mu_hat.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Fit, Deterministic) {
  const Dataset data = fixture(he2_model(16, 3, 0.2), 500, 6);
  const Predictor a = fit(data, small_config(7));
  const Predictor b = fit(data, small_config(7));
  EXPECT_EQ(a.a, b.a);
  EXPECT_EQ(a.W1, b.W1);
  EXPECT_EQ(a.b1, b.b1);
}

TEST(Fit, SecondLayerConvergesOnFixture) {
  const Dataset data = fixture(he2_model(32, 4, 0.25), 2000, 11);
  TrainConfig cfg = small_config(2);
  cfg.c = 1.0 / std::log(33.0);
  const FitResult r = fit_detailed(data, cfg);
  EXPECT_TRUE(r.second.converged);
  for (std::size_t t = 1; t < r.second.objective.size(); ++t) {
    EXPECT_LE(r.second.objective[t], r.second.objective[t - 1]);
  }
}

TEST(Fit, PureNoiseLearnsNothing) {
  const double delta = 1.0;
  const IndexModel noise = make_single_index(Vector::Unit(32, 0), LinkSpec::from_hermite({0.0}), delta);
  const Dataset data = fixture(noise, 2000, 5);
  TrainConfig cfg = small_config(9);
  cfg.c = 1.0 / std::log(33.0);
  const Predictor p = fit(data, cfg);
  // test risk E[(y_hat - y)^2] = excess + Delta
  const double risk = excess_risk(p, noise, 20000, 3) + delta;
  EXPECT_NEAR(risk, delta, 0.1 * delta);
}

TEST(Fit, MultiModeLinearStepExplainsHe1) {
  const Matrix V = make_sparse_frame(64, 1, 8, 2);
  const IndexModel model = make_single_index(V.col(0), LinkSpec::hermite_term(1), 0.0);
  const Dataset data = fixture(model, 10000, 4);
  TrainConfig cfg;
  cfg.M = 8;
  cfg.c = 1.0 / std::log(65.0);
  cfg.m = 16;
  cfg.mode = TrainMode::multi;
  cfg.seed = 1;
  Predictor p = fit(data, cfg);
  p.a.setZero();
  const double unexplained = excess_risk(p, model, 20000, 6);  // Var(y) = 1
  EXPECT_GE(1.0 - unexplained, 0.9);
}

TEST(Predict, ComposesLinearAndNetwork) {
  const Dataset data = fixture(he2_model(12, 3, 0.1), 800, 2);
  TrainConfig cfg = small_config(3);
  cfg.mode = TrainMode::multi;
  const Predictor p = fit(data, cfg);
  Rng rng(5);
  Predictor p0 = p;
  p0.mu_hat.setZero();
  for (int t = 0; t < 100; ++t) {
    const Vector x = rng.normal_vector(p.dim());
    EXPECT_EQ(predict(p, x), linear_term(p.mu_hat, x) + forward(p.net(), x));
    const Vector x2 = 2.0 * x;
    EXPECT_NEAR(predict(p, x2) - predict(p0, x2), 2.0 * p.mu_hat.dot(x), 1e-12);
  }
  Predictor zero = p;
  zero.a.setZero();
  zero.mu_hat.setZero();
  EXPECT_EQ(predict(zero, rng.normal_vector(p.dim())), 0.0);
}

TEST(Predict, LinearTermRoundTrip) {
  const Dataset data = fixture(he2_model(12, 3, 0.1), 400, 12);
  TrainConfig cfg = small_config(1);
  cfg.mode = TrainMode::multi;
  const Predictor p = fit(data, cfg);
  const Dataset residual = subtract_linear(data, p.mu_hat);
  for (Index i = 0; i < data.size(); ++i) {
    const Vector x = data.X.row(i).transpose();
    const double lin = linear_term(p.mu_hat, x);
    EXPECT_EQ(residual.y[i], data.y[i] - lin);
    EXPECT_EQ(predict(p, x), lin + forward(p.net(), x));
  }
}

TEST(ExcessRisk, PerfectAndZeroPredictors) {
  const int d = 10;
  const Vector v = make_sparse_direction(d, 2, DirectionProfile::flat());
  const IndexModel lin = make_single_index(v, LinkSpec::hermite_term(1), 0.0);
  Predictor p;
  p.m = 1;
  p.a = Vector::Zero(2);
  p.W1 = Matrix::Zero(2, d + 1);
  p.b1 = Vector::Zero(2);
  p.mu_hat = Vector::Zero(d + 1);
  p.mu_hat.head(d) = v;
  p.J = SupportSet::full(d + 1);
  EXPECT_LE(excess_risk(p, lin, 5000, 1), 1e-20);

  p.mu_hat.setZero();
  const IndexModel he2 = he2_model(d, 2, 0.0);
  const Index n = 200000;
  const double r = excess_risk(p, he2, n, 2);
  // Var(sigma^2) = E[He_2^4]/4 - 1 = 14
  const double se = std::sqrt(14.0 / static_cast<double>(n));
  EXPECT_NEAR(r, 1.0, 4 * se);
}

TEST(PredictorIo, RoundTripsBitwise) {
  const Dataset data = fixture(he2_model(10, 2, 0.1), 300, 2);
  TrainConfig cfg = small_config(5);
  cfg.mode = TrainMode::multi;
  const Predictor p = fit(data, cfg);
  std::stringstream ss;
  write_predictor(ss, p);
  const Predictor q = read_predictor(ss);
  EXPECT_EQ(q.a, p.a);
  EXPECT_EQ(q.W1, p.W1);
  EXPECT_EQ(q.b1, p.b1);
  EXPECT_EQ(q.mu_hat, p.mu_hat);
  EXPECT_EQ(q.J.indices, p.J.indices);
  EXPECT_EQ(q.m, p.m);
}
