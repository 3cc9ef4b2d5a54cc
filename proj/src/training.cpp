#include "sil/training.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>

#include "sil/csv.hpp"
#include "sil/rng.hpp"

namespace sil {
namespace {

enum StreamTag : std::uint64_t { kPruneStream = 11, kReinitStream = 12, kBiasStream = 13 };

void require_finite(double value, const char* what) {
  if (!std::isfinite(value)) throw NumericError(std::string("non-finite ") + what);
}

Matrix features(const Dataset& data, const Matrix& W1, const Vector& b1) {
  Matrix F = data.X * W1.transpose();
  F.rowwise() += b1.transpose();
  return F.unaryExpr([](double t) { return relu(t); });
}

double ridge_objective(const Matrix& F, const Vector& y, const Vector& a, double lambda) {
  const Vector r = F * a - y;
  CompensatedSum acc;
  for (Index i = 0; i < r.size(); ++i) acc.add(r[i] * r[i]);
  return acc.value() / (2.0 * static_cast<double>(y.size())) + 0.5 * lambda * a.squaredNorm();
}

}  // namespace

double TrainConfig::resolved_eta1() const {
  if (eta1 > 0.0) return eta1;
  if (mode == TrainMode::multi) return kappa * M;
  return kappa * std::pow(static_cast<double>(M), 0.5 * (info_exponent - 1));
}

double TrainConfig::resolved_lambda_t(Index d) const {
  if (lambda_t > 0.0) return lambda_t;
  const double l = std::log(static_cast<double>(d));
  return m / (l * l);
}

int TrainConfig::resolved_T_max(Index n) const {
  if (T_max > 0) return T_max;
  return 50 * static_cast<int>(std::ceil(std::log(static_cast<double>(n) * m)));
}

void validate(const TrainConfig& cfg) {
  if (cfg.m < 1) throw std::invalid_argument("training needs m >= 1");
  if (cfg.M < 1) throw std::invalid_argument("training needs M >= 1");
  if (!(cfg.c > 0.0 && cfg.c < 1.0)) throw std::invalid_argument("training needs 0 < c < 1");
  if (!(cfg.resolved_eta1() > 0.0) || !std::isfinite(cfg.resolved_eta1())) {
    throw std::invalid_argument("first-layer step must be positive");
  }
  if (cfg.info_exponent < 1) throw std::invalid_argument("information exponent must be >= 1");
  if (!(cfg.grad_tol > 0.0)) throw std::invalid_argument("gradient tolerance must be positive");
}

NetParams Predictor::net() const {
  NetParams n;
  n.a = a;
  n.W = W1;
  n.b = b1;
  n.m = m;
  return n;
}

NetParams restricted_reinit(const SupportSet& J, int m, Index d, std::uint64_t seed) {
  if (J.size() == 0) throw std::invalid_argument("restricted re-initialization needs a non-empty support");
  for (int p : J.indices) {
    if (p < 0 || p >= d) throw std::invalid_argument("support index out of range");
  }
  NetParams net;
  net.m = m;
  draw_symmetric_output_and_bias(m, seed, net.a, net.b);
  net.W = Matrix::Zero(2 * m, d);
  Rng rng(derive_seed(seed, {2}));
  for (int j = 0; j < m; ++j) {
    Vector g = rng.normal_vector(J.size());
    double norm = g.norm();
    while (norm == 0.0) {
      g = rng.normal_vector(J.size());
      norm = g.norm();
    }
    for (Index k = 0; k < J.size(); ++k) net.W(j, J.indices[k]) = g[k] / norm;
    net.W.row(mirror_index(j, m)) = net.W.row(j);
  }
  return net;
}

Matrix first_layer_step(const Dataset& data, const NetParams& net, const SupportSet& J,
                        double eta1) {
  if (!(eta1 > 0.0)) throw std::invalid_argument("first-layer step must be positive");
  const Index d = net.dim();
  Matrix W1 = Matrix::Zero(net.width(), d);
  for (Index j = 0; j < net.width(); ++j) {
    const Vector g = grad_w_row_on(data, net.a[j], net.W.row(j).transpose(), net.b[j], J.indices);
    for (int p : J.indices) W1(j, p) = -eta1 * g[p];
  }
  return W1;
}

Matrix first_layer_step_two_term(const Dataset& data, const NetParams& net, const SupportSet& J,
                                 double eta1) {
  const double lambda1 = 1.0 / eta1;
  const Index d = net.dim();
  Matrix W1 = Matrix::Zero(net.width(), d);
  for (Index j = 0; j < net.width(); ++j) {
    const Vector g = grad_w_row_on(data, net.a[j], net.W.row(j).transpose(), net.b[j], J.indices);
    for (int p : J.indices) W1(j, p) = net.W(j, p) - eta1 * (g[p] + lambda1 * net.W(j, p));
  }
  return W1;
}

SecondLayerResult second_layer_fit(const Dataset& data, const Matrix& W1, int m, double lambda_t,
                                   int T_max, double grad_tol, std::uint64_t seed) {
  if (W1.rows() != 2 * m) throw std::invalid_argument("first-layer matrix must have 2m rows");
  if (!(lambda_t > 0.0)) throw std::invalid_argument("ridge parameter must be positive");
  if (T_max < 1) throw std::invalid_argument("T_max must be >= 1");
  SecondLayerResult out;
  Vector unused;
  draw_symmetric_output_and_bias(m, seed, unused, out.b1);

  const Matrix F = features(data, W1, out.b1);
  const double n = static_cast<double>(data.size());
  const Matrix G = F.transpose() * F / n;
  const Vector h = F.transpose() * data.y / n;
  const double L = G.trace();
  out.step = 1.0 / (L + lambda_t);
  require_finite(out.step, "second-layer step");

  out.a = Vector::Zero(2 * m);
  double obj = ridge_objective(F, data.y, out.a, lambda_t);
  require_finite(obj, "second-layer objective");
  out.objective.push_back(obj);
  Vector grad = G * out.a + lambda_t * out.a - h;
  for (int t = 0; t < T_max; ++t) {
    if (grad.norm() <= grad_tol * (1.0 + std::abs(obj))) {
      out.converged = true;
      break;
    }
    out.a -= out.step * grad;
    obj = ridge_objective(F, data.y, out.a, lambda_t);
    require_finite(obj, "second-layer objective");
    out.objective.push_back(obj);
    grad = G * out.a + lambda_t * out.a - h;
    ++out.iterations;
  }
  out.final_grad_norm = grad.norm();
  if (!out.converged) out.converged = out.final_grad_norm <= grad_tol * (1.0 + std::abs(obj));
  return out;
}

Vector ridge_closed_form(const Dataset& data, const Matrix& W1, const Vector& b1, double lambda_t) {
  const Matrix F = features(data, W1, b1);
  const double n = static_cast<double>(data.size());
  Matrix A = F.transpose() * F / n;
  A.diagonal().array() += lambda_t;
  const Vector h = F.transpose() * data.y / n;
  return A.ldlt().solve(h);
}

Vector first_hermite_estimate(const Dataset& data) {
  Vector mu(data.dim());
  for (Index l = 0; l < data.dim(); ++l) {
    CompensatedSum acc;
    for (Index i = 0; i < data.size(); ++i) acc.add(data.y[i] * data.X(i, l));
    mu[l] = acc.value() / static_cast<double>(data.size());
  }
  return mu;
}

double linear_term(const Vector& mu, const Eigen::Ref<const Vector>& x) {
  if (mu.size() != x.size()) throw std::invalid_argument("linear term: dimension mismatch");
  double acc = 0.0;
  for (Index l = 0; l < x.size(); ++l) acc += mu[l] * x[l];
  return acc;
}

Dataset subtract_linear(const Dataset& data, const Vector& mu) {
  Dataset out = data;
  for (Index i = 0; i < data.size(); ++i) {
    const Vector x = data.X.row(i).transpose();
    out.y[i] = data.y[i] - linear_term(mu, x);
  }
  return out;
}

FitResult fit_detailed(const Dataset& data, const TrainConfig& cfg) {
  if (!data.augmented) throw std::invalid_argument("training requires augmented data");
  validate(cfg);
  const Index d = data.dim();
  FitResult out;
  Predictor& p = out.predictor;
  p.m = cfg.m;

  if (cfg.full_support) {
    p.J = SupportSet::full(d);
  } else {
    PruneConfig pc;
    pc.M = cfg.M;
    pc.c = cfg.c;
    pc.m = cfg.m;
    pc.seed = derive_seed(cfg.seed, {kPruneStream});
    pc.bias_init = cfg.prune_bias;
    p.J = prune_network(data, pc, &out.prune);
  }

  p.mu_hat = Vector::Zero(d);
  const Dataset* train = &data;
  Dataset residual;
  if (cfg.mode == TrainMode::multi) {
    const Vector mu = first_hermite_estimate(data);
    for (int q : p.J.indices) p.mu_hat[q] = mu[q];
    residual = subtract_linear(data, p.mu_hat);
    train = &residual;
  }

  const NetParams net0 = restricted_reinit(p.J, cfg.m, d, derive_seed(cfg.seed, {kReinitStream}));
  out.eta1 = cfg.resolved_eta1();
  p.W1 = first_layer_step(*train, net0, p.J, out.eta1);
  if (!p.W1.allFinite()) throw NumericError("non-finite first-layer weights");

  out.second = second_layer_fit(*train, p.W1, cfg.m, cfg.resolved_lambda_t(d),
                                cfg.resolved_T_max(data.size()), cfg.grad_tol,
                                derive_seed(cfg.seed, {kBiasStream}));
  p.a = out.second.a;
  p.b1 = out.second.b1;
  return out;
}

Predictor fit(const Dataset& data, const TrainConfig& cfg) { return fit_detailed(data, cfg).predictor; }

double predict(const Predictor& p, const Eigen::Ref<const Vector>& x) {
  if (x.size() != p.dim()) throw std::invalid_argument("predict: dimension mismatch");
  const double linear = linear_term(p.mu_hat, x);
  const double network = forward(p.net(), x);
  return linear + network;
}

Vector predict_batch(const Predictor& p, const Matrix& X) {
  if (X.cols() != p.dim()) throw std::invalid_argument("predict: dimension mismatch");
  Matrix H = X * p.W1.transpose();
  H.rowwise() += p.b1.transpose();
  H = H.unaryExpr([](double t) { return relu(t); });
  return X * p.mu_hat + H * p.a;
}

double excess_risk(const Predictor& p, const IndexModel& model, Index n_test, std::uint64_t seed) {
  if (n_test < 1) throw std::invalid_argument("excess risk needs n_test >= 1");
  const Index d = model.dim();
  if (p.dim() != d && p.dim() != d + 1) {
    throw std::invalid_argument("predictor dimension does not match the model");
  }
  IndexModel clean = model;
  clean.noise_delta = 0.0;
  Dataset test = sample_dataset(clean, n_test, seed);
  if (p.dim() == d + 1) test = augment(test, derive_seed(seed, {1}));
  const Vector yhat = predict_batch(p, test.X);
  CompensatedSum acc;
  for (Index i = 0; i < n_test; ++i) {
    const double r = yhat[i] - test.y[i];
    acc.add(r * r);
  }
  const double risk = acc.value() / static_cast<double>(n_test);
  require_finite(risk, "excess risk");
  return risk;
}

void write_predictor(std::ostream& out, const Predictor& p) {
  out << kPredictorHeader << '\n';
  out << "m " << p.m << '\n';
  out << "d " << p.dim() << '\n';
  out << "J " << p.J.size();
  for (int q : p.J.indices) out << ' ' << q;
  out << '\n';
  out << "mu";
  for (int q : p.J.indices) {
    if (p.mu_hat[q] != 0.0) out << ' ' << q << ':' << format_double(p.mu_hat[q]);
  }
  out << '\n';
  out << "a";
  for (Index j = 0; j < p.a.size(); ++j) out << ' ' << format_double(p.a[j]);
  out << '\n';
  out << "b";
  for (Index j = 0; j < p.b1.size(); ++j) out << ' ' << format_double(p.b1[j]);
  out << '\n';
  for (Index j = 0; j < p.W1.rows(); ++j) {
    out << "W " << j;
    for (Index q = 0; q < p.W1.cols(); ++q) {
      if (p.W1(j, q) != 0.0) out << ' ' << q << ':' << format_double(p.W1(j, q));
    }
    out << '\n';
  }
}

void write_predictor(const std::string& path, const Predictor& p) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  write_predictor(out, p);
}

namespace {

std::vector<std::string> tokens(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string t;
  while (ss >> t) out.push_back(t);
  return out;
}

std::vector<std::string> expect_line(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("predictor bundle truncated before " + key);
  auto t = tokens(line);
  if (t.empty() || t[0] != key) throw std::invalid_argument("predictor bundle: expected '" + key + "'");
  return t;
}

std::pair<Index, double> sparse_entry(const std::string& tok, Index d) {
  const auto colon = tok.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("malformed sparse entry " + tok);
  const long long q = parse_int(tok.substr(0, colon));
  if (q < 0 || q >= d) throw std::invalid_argument("sparse entry index out of range");
  return {static_cast<Index>(q), parse_double(tok.substr(colon + 1))};
}

}  // namespace

Predictor read_predictor(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kPredictorHeader) {
    throw std::invalid_argument("not a predictor bundle (bad header)");
  }
  Predictor p;
  p.m = static_cast<int>(parse_int(expect_line(in, "m").at(1)));
  const Index d = parse_int(expect_line(in, "d").at(1));
  if (p.m < 1 || d < 1) throw std::invalid_argument("predictor bundle: bad sizes");
  const auto jt = expect_line(in, "J");
  const long long k = parse_int(jt.at(1));
  if (static_cast<long long>(jt.size()) != k + 2) throw std::invalid_argument("predictor bundle: bad J line");
  for (long long q = 0; q < k; ++q) p.J.add(static_cast<int>(parse_int(jt[q + 2])), 0u);
  p.mu_hat = Vector::Zero(d);
  for (auto& tok : [&] { auto t = expect_line(in, "mu"); t.erase(t.begin()); return t; }()) {
    const auto [q, v] = sparse_entry(tok, d);
    p.mu_hat[q] = v;
  }
  const Index width = 2 * static_cast<Index>(p.m);
  auto dense = [&](const std::string& key) {
    const auto t = expect_line(in, key);
    if (static_cast<Index>(t.size()) != width + 1) throw std::invalid_argument("predictor bundle: bad " + key);
    Vector v(width);
    for (Index j = 0; j < width; ++j) v[j] = parse_double(t[j + 1]);
    return v;
  };
  p.a = dense("a");
  p.b1 = dense("b");
  p.W1 = Matrix::Zero(width, d);
  for (Index j = 0; j < width; ++j) {
    const auto t = expect_line(in, "W");
    if (t.size() < 2 || parse_int(t[1]) != j) throw std::invalid_argument("predictor bundle: bad W row");
    for (std::size_t q = 2; q < t.size(); ++q) {
      const auto [col, v] = sparse_entry(t[q], d);
      p.W1(j, col) = v;
    }
  }
  return p;
}

Predictor read_predictor(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_predictor(in);
}

}  // namespace sil
