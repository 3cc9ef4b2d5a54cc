#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sil/hermite.hpp"
#include "sil/types.hpp"

namespace sil {

// y = sum_j links[j](<V_{*j}, x>) + sqrt(noise_delta) * eps, eps ~ N(0,1).
// A single-index model is the r = 1 case.
struct IndexModel {
  Matrix V;                     // d x r, orthonormal columns
  std::vector<LinkSpec> links;  // one per column of V
  double noise_delta = 0.0;

  Index dim() const { return V.rows(); }
  Index rank() const { return V.cols(); }
  // Noise-free response sigma(V^T x).
  double response(const Eigen::Ref<const Vector>& x) const;
};

// Throws std::invalid_argument unless V is orthonormal (1e-10), r <= d,
// links.size() == r and noise_delta >= 0.
void validate(const IndexModel& model);

IndexModel make_single_index(const Vector& v, LinkSpec link, double noise_delta);

// The additive family (1/sqrt(r k!)) sum_j He_k(<V_{*j}, x>).
IndexModel make_additive_hermite(const Matrix& V, int k, double noise_delta);

struct DirectionProfile {
  enum class Kind { flat, dominated };
  Kind kind = Kind::flat;
  double eps = 0.0;

  static DirectionProfile flat() { return {}; }
  static DirectionProfile dominated(double eps) { return {Kind::dominated, eps}; }
};

// flat: first s entries s^{-1/2}. dominated(eps): first entry sqrt(1-(s-1)eps^2),
// next s-1 entries eps.
Vector make_sparse_direction(int d, int s, DirectionProfile profile);

// Orthonormal d x r frame; column j lives in the contiguous block
// [j*floor(d/r), (j+1)*floor(d/r)) on s seed-shuffled positions with value s^{-1/2}.
Matrix make_sparse_frame(int d, int r, int s, std::uint64_t seed);

// sum_i ||V_{i*}||_2^q for q in (0,2); number of nonzero rows for q = 0.
double soft_sparsity(const Matrix& V, double q);

// ||V restricted to the complement of J||_F^2. Rows of V beyond its height
// (e.g. the augmented coordinate) count as zero.
double support_residual(const Matrix& V, const std::vector<int>& support);

struct Dataset {
  Matrix X;  // n x d
  Vector y;  // n
  bool augmented = false;
  std::uint64_t seed = 0;

  Index size() const { return X.rows(); }
  Index dim() const { return X.cols(); }
};

Dataset sample_dataset(const IndexModel& model, Index n, std::uint64_t seed);

// Appends one iid N(0,1) column drawn from `seed`. Throws std::logic_error on
// already-augmented data.
Dataset augment(const Dataset& data, std::uint64_t seed);

struct FullRankCheck {
  Matrix D;  // estimate of E[sigma(z) z z^T]
  double min_singular_value = 0.0;
  bool full_rank = false;
};

// Monte-Carlo estimate of E[sigma(z) z z^T], z ~ N(0, I_r), for the additive
// link z -> sum_j links[j](z_j).
FullRankCheck check_assumption_full_rank(const std::vector<LinkSpec>& links, Index mc_samples,
                                         std::uint64_t seed, double tol);

// CSV with header x_1,...,x_d,y and shortest round-trip decimals.
void write_dataset_csv(std::ostream& out, const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(std::istream& in, bool augmented);
Dataset read_dataset_csv(const std::string& path, bool augmented);

}  // namespace sil
