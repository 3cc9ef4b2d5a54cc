#pragma once

#include <cstdint>
#include <span>

#include "sil/model.hpp"
#include "sil/types.hpp"

namespace sil {

// Two-layer ReLU net y(x) = sum_j a_j phi(<W_{j*}, x> + b_j) of width 2m.
// Neuron j (0-based) is paired with mirror_index(j, m) = 2m-1-j.
struct NetParams {
  Vector a;  // 2m
  Matrix W;  // 2m x d
  Vector b;  // 2m
  int m = 0;

  Index width() const { return 2 * static_cast<Index>(m); }
  Index dim() const { return W.cols(); }
};

constexpr Index mirror_index(Index j, int m) { return 2 * static_cast<Index>(m) - 1 - j; }

// a_j ~ Unif{-1,1}, b_j ~ N(0,1), W_{j*} ~ Unif(S^{d-1}) for j < m, mirrored
// so that a_j = -a_{j'}, W_{j*} = W_{j'*}, b_j = b_{j'}. The net output is
// identically zero.
NetParams init_symmetric(int m, Index d, std::uint64_t seed);

// Draws the (a, b) half of init_symmetric from the same stream layout.
void draw_symmetric_output_and_bias(int m, std::uint64_t seed, Vector& a, Vector& b);

double forward(const NetParams& net, const Eigen::Ref<const Vector>& x);

// (1/2n) sum (y_hat_i - y_i)^2.
double empirical_risk(const NetParams& net, const Dataset& data);

// (-a_j/n) sum_i y_i x_i phi'(<w, x_i> + b_j): the first-layer gradient of
// one neuron while the network output is identically zero.
Vector grad_w_row(const Dataset& data, double a_j, const Vector& w, double b_j);

// Same sum, accumulated only on `coords` (other entries are zero). The
// projection <w, x_i> always uses every coordinate.
Vector grad_w_row_on(const Dataset& data, double a_j, const Vector& w, double b_j,
                     std::span<const int> coords);

// Which part of the activation the gradient is taken through.
//   full:  phi(t + b)
//   plus:  phi_+(t; b) = (phi(t + b) + phi(-t + b)) / 2   (even in t)
//   minus: phi_-(t; b) = (phi(t + b) - phi(-t + b)) / 2   (odd in t)
// plus + minus = full.
enum class ActivationPart { full, plus, minus };

// Gradient rows of all 2m neurons when every first-layer row equals e_bar,
// through the requested activation part. Reference implementation (direct
// per-neuron sums).
Matrix grad_even_odd(const Dataset& data, const Vector& a, const Vector& e_bar, const Vector& b,
                     ActivationPart part);

// d R_n / d a = (1/n) sum (y_hat_i - y_i) phi(W x_i + b).
Vector grad_a(const NetParams& net, const Dataset& data);

// Plus/minus gradient rows for every neuron at a shared direction, given the
// projections t_i = <e_bar, x_i>. Each call costs O(n d + m d) regardless of
// the width: samples are bucketed between the sorted bias thresholds.
struct SharedDirectionGradients {
  Matrix plus;   // 2m x d
  Matrix minus;  // 2m x d
  Matrix full() const { return plus + minus; }
};

SharedDirectionGradients shared_direction_gradients(const Dataset& data, const Vector& a,
                                                    const Vector& projections, const Vector& b);

}  // namespace sil
