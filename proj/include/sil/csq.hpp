#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sil/rng.hpp"
#include "sil/types.hpp"

namespace sil {

// Each coordinate iid: +s^{-1/2} w.p. s/2d, -s^{-1/2} w.p. s/2d, else 0.
Vector sample_ps(int d, int s, Rng& rng);
Vector sample_ps(int d, int s, std::uint64_t seed);

// (1/r) sum_{i,j} |<V1_{*i}, V2_{*j}>|^k.
double avg_correlation(const Matrix& V1, const Matrix& V2, int k);

// d^{-min(alpha, 1/2) k / 2}; polylogarithmic factors set to 1.
double csq_tau_bound(double d, double alpha, int k);

// 8 C e log(d^2) / min(sqrt(floor(d/r)), s).
double default_coherence_cap(int d, int r, int s, double C = 1.0);

struct Packing {
  std::vector<Matrix> frames;
  int d = 0;
  int r = 0;
  int s = 0;
  int k = 0;
  double q = 1.0;
  double coherence_cap = 0.0;
  double achieved_coherence = 0.0;    // max over frame pairs of avg_correlation
  double max_column_coherence = 0.0;  // max |<u, u'>| over kept vectors sharing a block
  long long attempts = 0;
  long long accepted = 0;
  bool complete = false;
  double acceptance_rate() const {
    return attempts == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(attempts);
  }
};

// Per block of floor(d/r) contiguous coordinates, rejection-samples normalized
// P_s draws whose support size lies in [s/2, 3s/2] and whose inner product with
// every vector kept in that block is at most coherence_cap in magnitude. Frame
// f takes the f-th kept vector of every block. When a block runs out of its
// max_attempts, the packing holds the frames found so far and complete=false.
Packing build_packing(int d, int r, int s, int count, int k, double coherence_cap,
                      long long max_attempts, std::uint64_t seed);

// One CSV per frame (row,col,value for non-zeros) plus manifest.txt.
void write_packing(const std::string& directory, const Packing& packing);

}  // namespace sil
