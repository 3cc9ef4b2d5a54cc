#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "sil/types.hpp"

namespace sil {

// splitmix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix_seed(std::uint64_t x);

// Deterministic child seed from a base seed and a list of tags.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  double sign() { return (engine_() >> 63) != 0 ? 1.0 : -1.0; }
  std::uint64_t next() { return engine_(); }
  std::mt19937_64& engine() { return engine_; }

  Vector normal_vector(Index n);
  // Uniform on the unit sphere in R^n.
  Vector unit_vector(Index n);

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace sil
