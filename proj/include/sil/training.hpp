#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sil/model.hpp"
#include "sil/network.hpp"
#include "sil/pruning.hpp"
#include "sil/types.hpp"

namespace sil {

enum class TrainMode { single, multi };

struct TrainConfig {
  int M = 1;
  double c = 0.5;
  int m = 1;
  TrainMode mode = TrainMode::single;
  std::uint64_t seed = 0;
  // eta1 = kappa * M^{(k*-1)/2} (single) or kappa * M (multi) when eta1 <= 0.
  double kappa = 1.0;
  int info_exponent = 2;
  double eta1 = 0.0;
  double lambda_t = 0.0;  // <= 0: m / log^2 d
  int T_max = 0;          // <= 0: 50 ceil(log(n m))
  double grad_tol = 1e-8; // relative: stop once ||grad|| <= grad_tol (1 + |objective|)
  bool full_support = false;
  BiasInit prune_bias = BiasInit::gaussian;

  // First-layer weight decay; tied to the step so that W(0) cancels exactly.
  double lambda1() const { return 1.0 / resolved_eta1(); }
  double resolved_eta1() const;
  double resolved_lambda_t(Index d) const;
  int resolved_T_max(Index n) const;
};

void validate(const TrainConfig& cfg);

struct Predictor {
  Vector a;        // 2m
  Matrix W1;       // 2m x d, zero outside J
  Vector b1;       // 2m
  Vector mu_hat;   // d, zero outside J (and zero in single mode)
  SupportSet J;
  int m = 0;
  Index dim() const { return W1.cols(); }
  NetParams net() const;
};

// a, b as in init_symmetric; rows uniform on the unit sphere of the
// coordinates in J, mirrored.
NetParams restricted_reinit(const SupportSet& J, int m, Index d, std::uint64_t seed);

// W(1) = -eta1 * grad_W R_n(W(0)) restricted to J, row by row.
Matrix first_layer_step(const Dataset& data, const NetParams& net, const SupportSet& J,
                        double eta1);

// W(0) - eta1 (grad|_J + lambda1 W(0)) with lambda1 = 1/eta1, evaluated literally.
Matrix first_layer_step_two_term(const Dataset& data, const NetParams& net, const SupportSet& J,
                                 double eta1);

struct SecondLayerResult {
  Vector a;
  Vector b1;
  std::vector<double> objective;  // one entry per iterate, starting at a = 0
  double step = 0.0;
  double final_grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Fresh mirrored biases, then gradient descent on R_n + (lambda_t/2)||a||^2
// from a = 0 with step 1/(L + lambda_t), L = (1/n) sum ||phi(W1 x_i + b1)||^2.
SecondLayerResult second_layer_fit(const Dataset& data, const Matrix& W1, int m, double lambda_t,
                                   int T_max, double grad_tol, std::uint64_t seed);

// Minimizer of the same ridge objective for the same features (direct solve).
Vector ridge_closed_form(const Dataset& data, const Matrix& W1, const Vector& b1, double lambda_t);

// (1/n) sum y_i x_i.
Vector first_hermite_estimate(const Dataset& data);

// <mu, x> summed in index order; shared by subtract_linear and predict so the
// subtracted and re-added values are the same doubles.
double linear_term(const Vector& mu, const Eigen::Ref<const Vector>& x);

// y_i - <mu, x_i>.
Dataset subtract_linear(const Dataset& data, const Vector& mu);

struct FitResult {
  Predictor predictor;
  PruneTrace prune;
  SecondLayerResult second;
  double eta1 = 0.0;
};

FitResult fit_detailed(const Dataset& data, const TrainConfig& cfg);
Predictor fit(const Dataset& data, const TrainConfig& cfg);

// <mu_hat, x> + sum_j a_j phi(<W1_j, x> + b1_j), in that order.
double predict(const Predictor& p, const Eigen::Ref<const Vector>& x);
Vector predict_batch(const Predictor& p, const Matrix& X);

// Monte-Carlo estimate of E[(y_hat - y)^2] - Delta on fresh data, computed as
// the mean of (y_hat - sigma(V^T x))^2. Test inputs are augmented with an
// independent N(0,1) coordinate when the predictor is one wider than the model.
double excess_risk(const Predictor& p, const IndexModel& model, Index n_test, std::uint64_t seed);

inline constexpr const char* kPredictorHeader = "sparse-index-lab/predictor v1";
void write_predictor(std::ostream& out, const Predictor& p);
void write_predictor(const std::string& path, const Predictor& p);
Predictor read_predictor(std::istream& in);
Predictor read_predictor(const std::string& path);

}  // namespace sil
