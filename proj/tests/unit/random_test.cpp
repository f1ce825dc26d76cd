#include "sketchpinv/random.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

namespace sp = sketchpinv;

TEST(Rng, SameSeedSameStream) {
  sp::Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, EngineIsStandardMt19937_64) {
  // The standard fixes the 10000th output of a default-seeded mt19937_64.
  sp::Rng rng(5489u);
  std::uint64_t x = 0;
  for (int i = 0; i < 10000; ++i) x = rng.next_u64();
  EXPECT_EQ(x, 9981545732273789042ULL);
}

TEST(Rng, DifferentSeedsDiffer) {
  sp::Rng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a.next_u64() == b.next_u64() ? 1 : 0;
  EXPECT_EQ(same, 0);
}

TEST(Rng, Uniform01RangeAndMean) {
  sp::Rng rng(3);
  double sum = 0.0;
  const int N = 200000;
  for (int i = 0; i < N; ++i) {
    const double u = rng.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / N, 0.5, 0.005);
}

TEST(Rng, UniformIndexFrequencies) {
  sp::Rng rng(4);
  const int N = 70000;
  std::vector<int> counts(7, 0);
  for (int i = 0; i < N; ++i) {
    const auto k = rng.uniform_index(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c / double(N), 1.0 / 7.0, 0.01);
  EXPECT_THROW(rng.uniform_index(0), std::invalid_argument);
  EXPECT_EQ(rng.uniform_index(1), 0u);
}

TEST(Rng, NormalMoments) {
  sp::Rng rng(5);
  const int N = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < N; ++i) {
    const double z = rng.normal();
    s1 += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s1 / N, 0.0, 0.01);
  EXPECT_NEAR(s2 / N, 1.0, 0.015);
}

TEST(SplitSeed, DeterministicAndDistinct) {
  EXPECT_EQ(sp::split_seed(7, 3), sp::split_seed(7, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 100; ++s) seen.insert(sp::split_seed(7, s));
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_NE(sp::split_seed(7, 0), sp::split_seed(8, 0));
}
