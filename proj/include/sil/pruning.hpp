#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sil/model.hpp"
#include "sil/types.hpp"

namespace sil {

// Coordinates are 0-based; the augmented coordinate is d-1.

// c e_i + sqrt(1-c^2) e_{d-1} for i < d-1, and e_{d-1} for i = d-1.
Vector shifted_basis(int i, Index d, double c);

// Keeps the M largest-magnitude entries (ties: smaller index first).
Vector top_m(const Vector& v, Index M);

// Sum of squares of the M largest-magnitude entries, i.e. ||top_m(v, M)||^2.
double top_m_norm_sq(const Vector& v, Index M);

// Indices sorted by descending value, ascending index on exact ties.
std::vector<int> rank_descending(const Vector& scores);

enum class BiasInit { gaussian, zero };

struct PruneConfig {
  int M = 1;
  double c = 0.5;
  int m = 1;
  std::uint64_t seed = 0;
  int line3_probe = -1;  // -1: the augmented coordinate d-1
  BiasInit bias_init = BiasInit::gaussian;
};

enum SupportSource : unsigned { kLine3 = 1u, kEvenTopM = 2u, kOddTopM = 4u };

struct SupportSet {
  std::vector<int> indices;      // sorted, unique
  std::vector<unsigned> sources; // bitmask of SupportSource per index
  Index size() const { return static_cast<Index>(indices.size()); }
  bool contains(int i) const;
  void add(int i, unsigned source);
  static SupportSet full(Index d);
};

struct PruneTrace {
  Vector a0;
  Vector b0;
  Vector plus_norms;   // ||top_M rows of grad^+ at e_bar_i||_F^2 per probe
  Vector minus_norms;  // same for grad^-
  int line3_neuron = -1;
  std::vector<int> line3;
  std::vector<int> even_top;
  std::vector<int> odd_top;
};

void validate(const PruneConfig& cfg, Index d);

// The support-selection pass. Requires augmented data.
SupportSet prune_network(const Dataset& data, const PruneConfig& cfg, PruneTrace* trace = nullptr);

// First-layer output/bias draw used by prune_network for this config.
void prune_initialization(const PruneConfig& cfg, Vector& a, Vector& b);

// Naive baseline: squared Frobenius norms of the unsplit, untruncated gradient
// at the unshifted probes e_i, with the same (a, b) draw as prune_network.
Vector raw_gradient_norms(const Dataset& data, const PruneConfig& cfg);

// One index per line, each followed by "# source=" tags.
void write_support(std::ostream& out, const SupportSet& J);
void write_support(const std::string& path, const SupportSet& J);
SupportSet read_support(std::istream& in);
SupportSet read_support(const std::string& path);
std::string source_tags(unsigned mask);

}  // namespace sil
