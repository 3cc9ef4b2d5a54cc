#include "sil/network.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "sil/rng.hpp"

namespace sil {
namespace {

void check_dims(const Dataset& data, Index d) {
  if (data.dim() != d) throw std::invalid_argument("dimension mismatch between data and weights");
}

double part_derivative(ActivationPart part, double t, double b) {
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

}  // namespace

void draw_symmetric_output_and_bias(int m, std::uint64_t seed, Vector& a, Vector& b) {
  if (m < 1) throw std::invalid_argument("network needs m >= 1");
  Rng rng(derive_seed(seed, {1}));
  a.resize(2 * m);
  b.resize(2 * m);
  for (int j = 0; j < m; ++j) {
    a[j] = rng.sign();
    b[j] = rng.normal();
    a[mirror_index(j, m)] = -a[j];
    b[mirror_index(j, m)] = b[j];
  }
}

NetParams init_symmetric(int m, Index d, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("network needs d >= 1");
  NetParams net;
  net.m = m;
  draw_symmetric_output_and_bias(m, seed, net.a, net.b);
  net.W.resize(2 * m, d);
  Rng rng(derive_seed(seed, {2}));
  for (int j = 0; j < m; ++j) {
    const Vector w = rng.unit_vector(d);
    net.W.row(j) = w.transpose();
    net.W.row(mirror_index(j, m)) = w.transpose();
  }
  return net;
}

double forward(const NetParams& net, const Eigen::Ref<const Vector>& x) {
  if (x.size() != net.dim()) throw std::invalid_argument("forward: dimension mismatch");
  // mirrored pairs first, so a symmetric net is exactly zero
  double acc = 0.0;
  for (Index j = 0; j < net.m; ++j) {
    const Index k = mirror_index(j, net.m);
    const double pj = net.a[j] * relu(net.W.row(j).dot(x) + net.b[j]);
    const double pk = net.a[k] * relu(net.W.row(k).dot(x) + net.b[k]);
    acc += pj + pk;
  }
  return acc;
}

namespace {

Matrix hidden_activations(const NetParams& net, const Dataset& data) {
  check_dims(data, net.dim());
  Matrix H = data.X * net.W.transpose();
  H.rowwise() += net.b.transpose();
  return H.unaryExpr([](double t) { return relu(t); });
}

}  // namespace

double empirical_risk(const NetParams& net, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("empirical risk of an empty dataset");
  const Vector pred = hidden_activations(net, data) * net.a;
  CompensatedSum acc;
  for (Index i = 0; i < data.size(); ++i) {
    const double r = pred[i] - data.y[i];
    acc.add(r * r);
  }
  return acc.value() / (2.0 * static_cast<double>(data.size()));
}

Vector grad_w_row_on(const Dataset& data, double a_j, const Vector& w, double b_j,
                     std::span<const int> coords) {
  check_dims(data, w.size());
  const Index n = data.size();
  const Vector t = data.X * w;
  std::vector<Index> active;
  active.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    if (relu_deriv(t[i] + b_j) != 0.0) active.push_back(i);
  }
  Vector g = Vector::Zero(w.size());
  const double scale = -a_j / static_cast<double>(n);
  for (int l : coords) {
    CompensatedSum acc;
    const double* col = data.X.col(l).data();
    for (Index i : active) acc.add(data.y[i] * col[i]);
    g[l] = scale * acc.value();
  }
  return g;
}

Vector grad_w_row(const Dataset& data, double a_j, const Vector& w, double b_j) {
  std::vector<int> all(static_cast<std::size_t>(w.size()));
  for (std::size_t l = 0; l < all.size(); ++l) all[l] = static_cast<int>(l);
  return grad_w_row_on(data, a_j, w, b_j, all);
}

Matrix grad_even_odd(const Dataset& data, const Vector& a, const Vector& e_bar, const Vector& b,
                     ActivationPart part) {
  check_dims(data, e_bar.size());
  if (a.size() != b.size()) throw std::invalid_argument("grad_even_odd: a and b differ in length");
  const Index n = data.size();
  const Index d = data.dim();
  const Vector t = data.X * e_bar;
  Matrix G(a.size(), d);
  std::vector<double> coef(static_cast<std::size_t>(n));
  for (Index j = 0; j < a.size(); ++j) {
    for (Index i = 0; i < n; ++i) coef[i] = part_derivative(part, t[i], b[j]) * data.y[i];
    const double scale = -a[j] / static_cast<double>(n);
    for (Index l = 0; l < d; ++l) {
      CompensatedSum acc;
      const double* col = data.X.col(l).data();
      for (Index i = 0; i < n; ++i) {
        if (coef[i] != 0.0) acc.add(coef[i] * col[i]);
      }
      G(j, l) = scale * acc.value();
    }
  }
  return G;
}

Vector grad_a(const NetParams& net, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("grad_a of an empty dataset");
  const Matrix H = hidden_activations(net, data);
  const Vector resid = H * net.a - data.y;
  return H.transpose() * resid / static_cast<double>(data.size());
}

SharedDirectionGradients shared_direction_gradients(const Dataset& data, const Vector& a,
                                                    const Vector& projections, const Vector& b) {
  const Index n = data.size();
  const Index d = data.dim();
  const Index width = a.size();
  if (projections.size() != n) throw std::invalid_argument("projections must have one entry per sample");
  if (b.size() != width) throw std::invalid_argument("a and b differ in length");

  // phi'(t + b_j) = 1{t > -b_j};  phi'(-t + b_j) = 1{t < b_j}
  std::vector<double> tau;
  tau.reserve(static_cast<std::size_t>(2 * width));
  for (Index j = 0; j < width; ++j) {
    tau.push_back(-b[j]);
    tau.push_back(b[j]);
  }
  std::sort(tau.begin(), tau.end());
  const Index T = static_cast<Index>(tau.size());

  // Sample i lands in bucket L_i = #{tau < t_i}. Samples sitting exactly on a
  // threshold are kept aside for the strict "<" sums.
  std::vector<Index> bucket(static_cast<std::size_t>(n));
  std::vector<std::pair<Index, Index>> ties;  // (sample, U_i)
  for (Index i = 0; i < n; ++i) {
    const double t = projections[i];
    const auto lo = std::lower_bound(tau.begin(), tau.end(), t) - tau.begin();
    const auto hi = std::upper_bound(tau.begin(), tau.end(), t) - tau.begin();
    bucket[i] = lo;
    if (hi != lo) ties.emplace_back(i, hi);
  }

  Matrix bucket_sum = Matrix::Zero(T + 1, d);
  Matrix bucket_comp = Matrix::Zero(T + 1, d);
  for (Index l = 0; l < d; ++l) {
    const double* col = data.X.col(l).data();
    double* sum = bucket_sum.col(l).data();
    double* comp = bucket_comp.col(l).data();
    for (Index i = 0; i < n; ++i) {
      const double x = data.y[i] * col[i];
      const Index q = bucket[i];
      const double s = sum[q];
      const double tsum = s + x;
      comp[q] += std::abs(s) >= std::abs(x) ? (s - tsum) + x : (x - tsum) + s;
      sum[q] = tsum;
    }
  }

  // prefix[q] = sum over buckets <= q; suffix[q] = sum over buckets >= q.
  using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  LMatrix prefix(T + 1, d);
  LMatrix suffix(T + 2, d);
  for (Index l = 0; l < d; ++l) {
    long double run = 0.0L;
    for (Index q = 0; q <= T; ++q) {
      run += static_cast<long double>(bucket_sum(q, l)) + static_cast<long double>(bucket_comp(q, l));
      prefix(q, l) = run;
    }
    run = 0.0L;
    suffix(T + 1, l) = 0.0L;
    for (Index q = T; q >= 0; --q) {
      run += static_cast<long double>(bucket_sum(q, l)) + static_cast<long double>(bucket_comp(q, l));
      suffix(q, l) = run;
    }
  }

  SharedDirectionGradients out;
  out.plus.resize(width, d);
  out.minus.resize(width, d);
  std::vector<long double> upper(static_cast<std::size_t>(d));
  std::vector<long double> lower(static_cast<std::size_t>(d));
  for (Index j = 0; j < width; ++j) {
    // {t > -b_j} = {L >= q1}, q1 = #{tau <= -b_j}
    const Index q1 = std::upper_bound(tau.begin(), tau.end(), -b[j]) - tau.begin();
    // {t < b_j} = {U <= q0}, q0 = #{tau < b_j}; differs from {L <= q0} only on ties at b_j
    const Index q0 = std::lower_bound(tau.begin(), tau.end(), b[j]) - tau.begin();
    for (Index l = 0; l < d; ++l) {
      upper[l] = suffix(q1, l);
      lower[l] = prefix(q0, l);
    }
    for (const auto& [i, hi] : ties) {
      if (bucket[i] <= q0 && q0 < hi) {
        for (Index l = 0; l < d; ++l) lower[l] -= static_cast<long double>(data.y[i] * data.X(i, l));
      }
    }
    const long double scale = -static_cast<long double>(a[j]) / static_cast<long double>(n);
    for (Index l = 0; l < d; ++l) {
      out.plus(j, l) = static_cast<double>(scale * 0.5L * (upper[l] - lower[l]));
      out.minus(j, l) = static_cast<double>(scale * 0.5L * (upper[l] + lower[l]));
    }
  }
  return out;
}

}  // namespace sil
