#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "sil/csq.hpp"
#include "sil/model.hpp"

using namespace sil;

TEST(SamplePs, FullDensityHasNoZeros) {
  Rng rng(3);
  for (int t = 0; t < 50; ++t) {
    const Vector x = sample_ps(16, 16, rng);
    for (Index i = 0; i < x.size(); ++i) EXPECT_EQ(std::abs(x[i]), 0.25);
  }
}

TEST(SamplePs, Moments) {
  const int d = 400, s = 20, draws = 10000;
  Rng rng(9);
  double nnz = 0.0, norm2 = 0.0, norm2_sq = 0.0, m4 = 0.0;
  for (int t = 0; t < draws; ++t) {
    const Vector x = sample_ps(d, s, rng);
    nnz += static_cast<double>((x.array() != 0.0).count());
    const double n2 = x.squaredNorm();
    norm2 += n2;
    norm2_sq += n2 * n2;
    m4 += x.array().pow(4).mean();
  }
  nnz /= draws;
  norm2 /= draws;
  m4 /= draws;
  EXPECT_LE(std::abs(nnz - s), 4 * std::sqrt(static_cast<double>(s)));
  const double se = std::sqrt((norm2_sq / draws - norm2 * norm2) / draws);
  EXPECT_LE(std::abs(norm2 - 1.0), 4 * se);
  // E[x_i^4] = s^{-2} * s/d; the per-draw mean over d coordinates has small spread
  const double expect = 1.0 / (static_cast<double>(s) * s) * s / d;
  EXPECT_NEAR(m4, expect, 0.05 * expect);
}

TEST(SamplePs, SeedOverloadDeterministic) {
  EXPECT_EQ(sample_ps(50, 5, 7), sample_ps(50, 5, 7));
}

TEST(AvgCorrelation, Examples) {
  Matrix I = Matrix::Zero(6, 2);
  I(0, 0) = 1;
  I(3, 1) = 1;
  EXPECT_DOUBLE_EQ(avg_correlation(I, I, 2), 1.0);
  Matrix J = Matrix::Zero(6, 2);
  J(1, 0) = 1;
  J(4, 1) = 1;
  EXPECT_DOUBLE_EQ(avg_correlation(I, J, 2), 0.0);
  const Matrix V = make_sparse_frame(40, 2, 4, 3);
  for (int k : {1, 2, 5}) EXPECT_NEAR(avg_correlation(V, V, k), 1.0, 1e-12);
}

TEST(CsqTauBound, Formula) {
  EXPECT_NEAR(csq_tau_bound(1e4, 0.5, 2), 1e-2, 1e-15);
  EXPECT_EQ(csq_tau_bound(1e4, 0.9, 2), csq_tau_bound(1e4, 0.5, 2));
  EXPECT_NEAR(csq_tau_bound(1e4, 0.3, 4), std::pow(csq_tau_bound(1e4, 0.3, 2), 2), 1e-18);
  EXPECT_DOUBLE_EQ(csq_tau_bound(256, 0.25, 2), std::pow(256.0, -0.25));
}

TEST(DefaultCap, Formula) {
  const double expect = 8.0 * std::exp(1.0) * std::log(2048.0 * 2048.0) / std::min(std::sqrt(1024.0), 64.0);
  EXPECT_DOUBLE_EQ(default_coherence_cap(2048, 2, 64), expect);
}

TEST(Packing, DisjointSingletons) {
  // s = 1 keeps exactly one coordinate per draw
  const Packing p = build_packing(64, 1, 1, 2, 2, 0.5, 1000, 4);
  ASSERT_TRUE(p.complete);
  const Vector a = p.frames[0].col(0), b = p.frames[1].col(0);
  EXPECT_EQ((a.array() != 0).count(), 1);
  EXPECT_EQ(a.dot(b), 0.0);
  EXPECT_EQ(avg_correlation(p.frames[0], p.frames[1], 2), 0.0);
}

TEST(Packing, DirectReverification) {
  const int d = 2048, r = 2, s = 64, count = 50, k = 2;
  const double cap = default_coherence_cap(d, r, s);
  const Packing p = build_packing(d, r, s, count, k, cap, 100000, 21);
  ASSERT_TRUE(p.complete);
  ASSERT_EQ(static_cast<int>(p.frames.size()), count);
  RecordProperty("acceptance_rate", std::to_string(p.acceptance_rate()));
  double worst = 0.0, worst_col = 0.0;
  const double bound = 3.0 * r * std::sqrt(s / 2.0);
  for (int a = 0; a < count; ++a) {
    const Matrix& V = p.frames[a];
    EXPECT_LE((V.transpose() * V - Matrix::Identity(r, r)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE(soft_sparsity(V, 1.0), bound);
    for (int b = a + 1; b < count; ++b) {
      const double c = avg_correlation(V, p.frames[b], k);
      worst = std::max(worst, c);
      worst_col = std::max(worst_col, (V.transpose() * p.frames[b]).cwiseAbs().maxCoeff());
      EXPECT_LE(c, p.achieved_coherence);
    }
  }
  EXPECT_EQ(worst, p.achieved_coherence);
  EXPECT_LE(worst_col, cap);
  EXPECT_LE(p.achieved_coherence, std::pow(cap, k) * r);
}

TEST(Packing, ShortfallIsReported) {
  // a cap of zero overlap among 40 dense frames in a tiny block cannot be met
  const Packing p = build_packing(16, 1, 4, 40, 2, 1e-3, 500, 2);
  EXPECT_FALSE(p.complete);
  EXPECT_LT(static_cast<int>(p.frames.size()), 40);
  EXPECT_EQ(p.attempts, 500);
}

TEST(Packing, RejectsBadArguments) {
  EXPECT_THROW(build_packing(10, 3, 4, 2, 2, 1.0, 10, 0), std::invalid_argument);
  EXPECT_THROW(build_packing(10, 0, 1, 2, 2, 1.0, 10, 0), std::invalid_argument);
  EXPECT_THROW(build_packing(10, 1, 1, 2, 2, 0.0, 10, 0), std::invalid_argument);
}

TEST(Packing, WritesFramesAndManifest) {
  const Packing p = build_packing(64, 2, 4, 3, 2, 1.0, 1000, 5);
  const auto dir = std::filesystem::temp_directory_path() / "sil_packing_test";
  std::filesystem::remove_all(dir);
  write_packing(dir.string(), p);
  EXPECT_TRUE(std::filesystem::exists(dir / "manifest.txt"));
  EXPECT_TRUE(std::filesystem::exists(dir / "frame_0000.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "frame_0002.csv"));
  std::filesystem::remove_all(dir);
}
