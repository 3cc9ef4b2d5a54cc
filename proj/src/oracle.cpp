#include "sil/oracle.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "sil/csv.hpp"
#include "sil/hermite.hpp"
#include "sil/rng.hpp"

namespace sil {
namespace {

void require_unit(const Vector& u, const char* name) {
  if (std::abs(u.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument(std::string(name) + " must be a unit vector");
  }
}

Vector padded(const Vector& v, Index size) {
  if (v.size() > size) throw std::invalid_argument("direction is longer than the probe");
  Vector out = Vector::Zero(size);
  out.head(v.size()) = v;
  return out;
}

bool keep_v_term(ActivationPart part, int k) {
  if (part == ActivationPart::plus) return k % 2 == 1;
  return k % 2 == 0;
}

bool keep_w_term(ActivationPart part, int k) {
  if (part == ActivationPart::plus) return k % 2 == 0;
  return k % 2 == 1;
}

double phi_part_deriv(ActivationPart part, double t, double b) {
  const double up = relu_deriv(t + b);
  switch (part) {
    case ActivationPart::full:
      return up;
    case ActivationPart::plus:
      return 0.5 * (up - relu_deriv(-t + b));
    case ActivationPart::minus:
      return 0.5 * (up + relu_deriv(-t + b));
  }
  return 0.0;
}

double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

}  // namespace

Vector population_grad_single(const LinkSpec& link, const Vector& v_in, const Vector& w, double b,
                              ActivationPart part) {
  if (part == ActivationPart::full) {
    return population_grad_single(link, v_in, w, b, ActivationPart::plus) +
           population_grad_single(link, v_in, w, b, ActivationPart::minus);
  }
  require_unit(v_in, "v");
  require_unit(w, "w");
  const Vector v = padded(v_in, w.size());
  const double s = v.dot(w);
  const int p = link.degree;
  double v_coef = 0.0;
  double w_coef = 0.0;
  double s_pow = 1.0;
  for (int k = 0; k <= p; ++k) {
    const double kf = factorial(k);
    if (k <= p - 1 && keep_v_term(part, k)) {
      v_coef += link.gamma(k + 1) * relu_shift_coeff(k + 1, b) / kf * s_pow;
    }
    if (k >= 1 && keep_w_term(part, k)) {
      w_coef += link.gamma(k) * relu_shift_coeff(k + 2, b) / kf * s_pow;
    }
    s_pow *= s;
  }
  return v_coef * v + w_coef * w;
}

Vector population_grad_additive(const IndexModel& model, const Vector& w, double b,
                                ActivationPart part) {
  Vector g = Vector::Zero(w.size());
  for (Index j = 0; j < model.rank(); ++j) {
    g += population_grad_single(model.links[j], model.V.col(j), w, b, part);
  }
  return g;
}

McGradient mc_population_grad(const IndexModel& model, const Vector& w, double b,
                              Index mc_samples, std::uint64_t seed, ActivationPart part) {
  const Index d = model.dim();
  const Index D = w.size();
  if (D < d) throw std::invalid_argument("probe is shorter than the model dimension");
  if (mc_samples < 2) throw std::invalid_argument("Monte-Carlo oracle needs at least 2 samples");
  Rng rng(seed);
  const double noise_scale = std::sqrt(model.noise_delta);
  std::vector<long double> sum(static_cast<std::size_t>(D), 0.0L);
  std::vector<long double> sumsq(static_cast<std::size_t>(D), 0.0L);
  Vector x(D);
  for (Index i = 0; i < mc_samples; ++i) {
    for (Index l = 0; l < D; ++l) x[l] = rng.normal();
    const double eps = rng.normal();
    const double y = model.response(x.head(d)) + noise_scale * eps;
    const double coef = y * phi_part_deriv(part, w.dot(x), b);
    if (coef == 0.0) continue;
    for (Index l = 0; l < D; ++l) {
      const long double term = static_cast<long double>(coef * x[l]);
      sum[l] += term;
      sumsq[l] += term * term;
    }
  }
  McGradient out;
  out.samples = mc_samples;
  out.mean.resize(D);
  out.stderr_.resize(D);
  const long double N = static_cast<long double>(mc_samples);
  for (Index l = 0; l < D; ++l) {
    const long double mean = sum[l] / N;
    long double var = (sumsq[l] - N * mean * mean) / (N - 1.0L);
    if (var < 0.0L) var = 0.0L;
    out.mean[l] = static_cast<double>(mean);
    out.stderr_[l] = static_cast<double>(std::sqrt(var / N));
  }
  return out;
}

LeadingTermOracle::LeadingTermOracle(IndexModel model, Index mc_samples, std::uint64_t seed)
    : model_(std::move(model)) {
  validate(model_);
  check_ = check_assumption_full_rank(model_.links, mc_samples, seed, 0.0);
  H_ = model_.V * check_.D * model_.V.transpose();
}

Vector LeadingTermOracle::leading(const Vector& w, double b, const std::vector<int>& J) const {
  const Index d = H_.rows();
  if (w.size() < d) throw std::invalid_argument("probe is shorter than the model dimension");
  Vector out = Vector::Zero(w.size());
  const double rho2 = relu_shift_coeff(2, b);
  for (int p : J) {
    if (p < 0 || p >= w.size()) throw std::invalid_argument("support index out of range");
    if (p >= d) continue;
    double acc = 0.0;
    for (int q : J) {
      if (q < d) acc += H_(p, q) * w[q];
    }
    out[p] = rho2 * acc;
  }
  return out;
}

MultiLeadingGradient population_grad_multi_leading(const LeadingTermOracle& oracle,
                                                   const Vector& w, double b,
                                                   const std::vector<int>& J, Index mc_samples,
                                                   std::uint64_t seed) {
  MultiLeadingGradient out;
  out.leading = oracle.leading(w, b, J);
  out.mc = mc_population_grad(oracle.model(), w, b, mc_samples, seed);
  return out;
}

IndexModel make_cancellation_model(int d, int s, double eps, double gamma2, double gamma4) {
  const Vector v = make_sparse_direction(d, s, DirectionProfile::dominated(eps));
  std::vector<double> g(5, 0.0);
  g[2] = gamma2 / std::sqrt(2.0) * 2.0;
  g[4] = gamma4 / std::sqrt(24.0) * 24.0;
  return make_single_index(v, LinkSpec::from_hermite(std::move(g)), 0.0);
}

CancellationTerms cancellation_terms(const IndexModel& model, int i, double c, double b,
                                     double gamma2, double gamma4) {
  const Index d = model.dim();
  if (i < 0 || i >= d) throw std::invalid_argument("probe index out of range");
  const Vector v = model.V.col(0);
  Vector e_bar = Vector::Zero(d);
  if (i == d - 1) {
    e_bar[d - 1] = 1.0;
  } else {
    e_bar[i] = c;
    e_bar[d - 1] = std::sqrt(1.0 - c * c);
  }
  const double vi = v[i];
  const double r2 = relu_shift_coeff(2, b);
  const double r4 = relu_shift_coeff(4, b);
  const double r6 = relu_shift_coeff(6, b);
  CancellationTerms out;
  out.informative = c * v *
                    (std::sqrt(2.0) * gamma2 * r2 * vi +
                     c * c * 2.0 * gamma4 * r4 / std::sqrt(6.0) * vi * vi * vi);
  out.extra = c * c * e_bar *
              (r4 * gamma2 / std::sqrt(2.0) * vi * vi +
               c * c * r6 * gamma4 / std::sqrt(24.0) * vi * vi * vi * vi);
  return out;
}

double cancellation_residual(int s, double eps) {
  const IndexModel model = make_cancellation_model(s + 1, s, eps);
  const CancellationTerms t = cancellation_terms(model, 0, 1.0, 0.0);
  return (t.informative + t.extra).norm() / t.informative.norm();
}

double desk_epsilon(int s, double target) {
  if (s < 2) throw std::invalid_argument("cancellation needs s >= 2");
  double lo = 0.0;
  double hi = 0.5 / std::sqrt(static_cast<double>(s));
  if (cancellation_residual(s, hi) < target) throw std::invalid_argument("target residual too large");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (cancellation_residual(s, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

IndexModel make_even_pair_model(int d) {
  if (d < 3) throw std::invalid_argument("pathological fixture needs d >= 3");
  IndexModel model;
  model.V = Matrix::Zero(d, 2);
  model.V(0, 0) = 1.0;
  model.V(1, 1) = 1.0;
  model.links.assign(2, LinkSpec::hermite_term(2, 1.0 / std::sqrt(2.0)));
  validate(model);
  return model;
}

IndexModel make_even_pair_linear_model(int d) {
  IndexModel model = make_even_pair_model(d);
  const double lin = -1.0 / std::sqrt(std::numbers::pi);
  model.links.assign(2, LinkSpec::from_hermite({0.0, lin, std::sqrt(2.0)}));
  return model;
}

std::vector<FixtureTable> pathological_fixtures() {
  const int d = 16;
  const double k = 1.0 / (2.0 * std::sqrt(std::numbers::pi));
  std::vector<FixtureTable> tables;

  FixtureTable even{"even_pair", make_even_pair_model(d), {}};
  FixtureTable linear{"even_pair_linear", make_even_pair_linear_model(d), {}};
  for (int i = 0; i < d; ++i) {
    Vector g = Vector::Zero(d);
    if (i < 2) g[i] = -k;
    even.entries.push_back({i, 1.0, g});
    Vector h = Vector::Zero(d);
    if (i == 0) {
      h[1] = k;
    } else if (i == 1) {
      h[0] = k;
    } else {
      h[0] = k;
      h[1] = k;
    }
    linear.entries.push_back({i, 1.0, h});
  }
  tables.push_back(std::move(even));
  tables.push_back(std::move(linear));

  const int s = 4;
  FixtureTable cancel{"cancellation", make_cancellation_model(d, s, desk_epsilon(s)), {}};
  for (double c : {1.0, 1.0 / std::log(static_cast<double>(d))}) {
    for (int i = 0; i < d; ++i) {
      const CancellationTerms t = cancellation_terms(cancel.model, i, c);
      cancel.entries.push_back({i, c, -(t.informative + t.extra)});
    }
  }
  tables.push_back(std::move(cancel));
  return tables;
}

void write_fixture_csv(std::ostream& out, const std::vector<FixtureTable>& tables) {
  out << "fixture,i,c,coord,value\n";
  for (const auto& table : tables) {
    for (const auto& e : table.entries) {
      for (Index l = 0; l < e.gradient.size(); ++l) {
        out << table.name << ',' << e.i << ',' << format_double(e.c) << ',' << l << ','
            << format_double(e.gradient[l]) << '\n';
      }
    }
  }
}

}  // namespace sil
