#include "sil/csq.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "sil/csv.hpp"

namespace sil {

Vector sample_ps(int d, int s, Rng& rng) {
  if (d < 1 || s < 1 || s > d) throw std::invalid_argument("P_s needs 1 <= s <= d");
  const double p = static_cast<double>(s) / (2.0 * d);
  const double value = 1.0 / std::sqrt(static_cast<double>(s));
  Vector x(d);
  for (int i = 0; i < d; ++i) {
    const double u = rng.uniform();
    x[i] = u < p ? value : (u < 2.0 * p ? -value : 0.0);
  }
  return x;
}

Vector sample_ps(int d, int s, std::uint64_t seed) {
  Rng rng(seed);
  return sample_ps(d, s, rng);
}

double avg_correlation(const Matrix& V1, const Matrix& V2, int k) {
  if (V1.rows() != V2.rows() || V1.cols() != V2.cols()) {
    throw std::invalid_argument("avg_correlation needs conformable frames");
  }
  const Matrix C = V1.transpose() * V2;
  double acc = 0.0;
  for (Index i = 0; i < C.rows(); ++i) {
    for (Index j = 0; j < C.cols(); ++j) acc += std::pow(std::abs(C(i, j)), k);
  }
  return acc / static_cast<double>(V1.cols());
}

double csq_tau_bound(double d, double alpha, int k) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must lie in (0,1)");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  return std::pow(d, -std::min(alpha, 0.5) * k / 2.0);
}

double default_coherence_cap(int d, int r, int s, double C) {
  const double block = std::floor(static_cast<double>(d) / r);
  const double dd = static_cast<double>(d);
  return 8.0 * C * std::numbers::e * std::log(dd * dd) / std::min(std::sqrt(block), static_cast<double>(s));
}

Packing build_packing(int d, int r, int s, int count, int k, double coherence_cap,
                      long long max_attempts, std::uint64_t seed) {
  if (r < 1 || d < r) throw std::invalid_argument("packing needs 1 <= r <= d");
  const int block = d / r;
  if (s < 1 || 2 * s > block) throw std::invalid_argument("packing needs s <= floor(d/r)/2");
  if (count < 1 || k < 1) throw std::invalid_argument("packing needs count >= 1 and k >= 1");
  if (!(coherence_cap > 0.0)) throw std::invalid_argument("coherence cap must be positive");

  Packing out;
  out.d = d;
  out.r = r;
  out.s = s;
  out.k = k;
  out.coherence_cap = coherence_cap;
  std::vector<std::vector<Vector>> kept(static_cast<std::size_t>(r));
  for (int j = 0; j < r; ++j) {
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(j)}));
    auto& bucket = kept[j];
    long long tries = 0;
    while (static_cast<int>(bucket.size()) < count && tries < max_attempts) {
      ++tries;
      Vector u = sample_ps(block, s, rng);
      const Index nnz = (u.array() != 0.0).count();
      if (2 * nnz < s || 2 * nnz > 3 * s) continue;
      u /= u.norm();
      bool ok = true;
      double worst = 0.0;
      for (const Vector& w : bucket) {
        const double ip = std::abs(u.dot(w));
        worst = std::max(worst, ip);
        if (ip > coherence_cap) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      out.max_column_coherence = std::max(out.max_column_coherence, worst);
      bucket.push_back(std::move(u));
    }
    out.attempts += tries;
    out.accepted += static_cast<long long>(bucket.size());
  }

  std::size_t frames = static_cast<std::size_t>(count);
  for (const auto& bucket : kept) frames = std::min(frames, bucket.size());
  out.complete = frames == static_cast<std::size_t>(count);
  for (std::size_t f = 0; f < frames; ++f) {
    Matrix V = Matrix::Zero(d, r);
    for (int j = 0; j < r; ++j) V.col(j).segment(static_cast<Index>(j) * block, block) = kept[j][f];
    out.frames.push_back(std::move(V));
  }
  for (std::size_t f = 0; f < out.frames.size(); ++f) {
    for (std::size_t g = f + 1; g < out.frames.size(); ++g) {
      out.achieved_coherence =
          std::max(out.achieved_coherence, avg_correlation(out.frames[f], out.frames[g], k));
    }
  }
  return out;
}

void write_packing(const std::string& directory, const Packing& packing) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  for (std::size_t f = 0; f < packing.frames.size(); ++f) {
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%04zu.csv", f);
    std::ofstream out(fs::path(directory) / name);
    if (!out) throw std::runtime_error("cannot write packing frame");
    out << "row,col,value\n";
    const Matrix& V = packing.frames[f];
    for (Index j = 0; j < V.cols(); ++j) {
      for (Index i = 0; i < V.rows(); ++i) {
        if (V(i, j) != 0.0) out << i << ',' << j << ',' << format_double(V(i, j)) << '\n';
      }
    }
  }
  std::ofstream man(fs::path(directory) / "manifest.txt");
  if (!man) throw std::runtime_error("cannot write packing manifest");
  man << "d=" << packing.d << '\n'
      << "r=" << packing.r << '\n'
      << "s=" << packing.s << '\n'
      << "k=" << packing.k << '\n'
      << "q=" << format_double(packing.q) << '\n'
      << "frames=" << packing.frames.size() << '\n'
      << "complete=" << (packing.complete ? "true" : "false") << '\n'
      << "coherence_cap=" << format_double(packing.coherence_cap) << '\n'
      << "achieved_coherence=" << format_double(packing.achieved_coherence) << '\n'
      << "max_column_coherence=" << format_double(packing.max_column_coherence) << '\n'
      << "attempts=" << packing.attempts << '\n'
      << "accepted=" << packing.accepted << '\n';
}

}  // namespace sil
