#include <gtest/gtest.h>

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <map>
#include <set>
#include <vector>

#include "replicalab/errors.hpp"
#include "replicalab/seedstream.hpp"

using namespace replicalab;

namespace {

SeedKey root() { return SeedKey::from_hex(kDefaultRootSeed); }

double chi2_quantile(double dof, double p) {
  return boost::math::quantile(boost::math::chi_squared(dof), p);
}

}  // namespace

TEST(SeedKey, HexRoundTrip) {
  const SeedKey k = root();
  EXPECT_EQ(k.to_hex(), kDefaultRootSeed);
  EXPECT_EQ(SeedKey::from_hex("00000000000000000000000000000000000000000000000000000000000000FF").state()[3],
            0xFFu);
}

TEST(SeedKey, RejectsMalformedSeeds) {
  EXPECT_THROW(SeedKey::from_hex("abc"), ConfigError);
  EXPECT_THROW(SeedKey::from_hex(std::string(63, '0') + "g"), ConfigError);
}

TEST(Derive, PureAndInjective) {
  const SeedKey k = root();
  EXPECT_EQ(derive(k, "trial", 0), derive(k, "trial", 0));
  EXPECT_NE(derive(k, "trial", 0), derive(k, "trial", 1));
  EXPECT_NE(derive(k, "trial", 0), derive(k, "trials", 0));
  EXPECT_NE(derive(derive(k, "a", 0), "b", 1), derive(derive(k, "b", 1), "a", 0));
}

TEST(Derive, LabelLengthLimits) {
  const SeedKey k = root();
  EXPECT_THROW(derive(k, ""), ConfigError);
  EXPECT_THROW(derive(k, std::string(33, 'x')), ConfigError);
  EXPECT_NO_THROW(derive(k, std::string(32, 'x')));
}

TEST(Derive, NoCollisionsAcrossManyChildren) {
  const SeedKey k = root();
  std::set<SeedKey::State> seen;
  for (std::uint64_t i = 0; i < 20000; ++i) {
    seen.insert(derive(k, "t", i).state());
    seen.insert(k.split(i).state());
  }
  EXPECT_EQ(seen.size(), 40000u);
}

TEST(Uniform01, PureAndInRange) {
  const SeedKey k = derive(root(), "u");
  EXPECT_EQ(uniform01(k, 7), uniform01(k, 7));
  for (std::uint64_t c = 0; c < 100000; ++c) {
    const double u = uniform01(k, c);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Uniform01, ChiSquareOnAMillionDraws) {
  const SeedKey k = derive(root(), "chi");
  constexpr int kBins = 100;
  constexpr std::uint64_t kDraws = 1'000'000;
  std::vector<double> counts(kBins, 0.0);
  for (std::uint64_t c = 0; c < kDraws; ++c) counts[static_cast<int>(uniform01(k, c) * kBins)] += 1;
  const double expected = static_cast<double>(kDraws) / kBins;
  double stat = 0.0;
  for (double c : counts) stat += (c - expected) * (c - expected) / expected;
  EXPECT_LT(stat, chi2_quantile(kBins - 1, 0.99));
}

TEST(Uniform01, DerivedSiblingsLookIndependent) {
  // first draws of consecutive children: lag-1 correlation near zero
  const SeedKey k = root();
  constexpr int kN = 50000;
  double sxy = 0, sx = 0, sxx = 0;
  double prev = uniform01(derive(k, "s", 0), 0);
  for (int i = 1; i <= kN; ++i) {
    const double cur = uniform01(derive(k, "s", static_cast<std::uint64_t>(i)), 0);
    sxy += prev * cur;
    sx += cur;
    sxx += cur * cur;
    prev = cur;
  }
  const double mean = sx / kN;
  const double corr = (sxy / kN - mean * mean) / (sxx / kN - mean * mean);
  EXPECT_LT(std::abs(corr), 4.0 / std::sqrt(kN));
}

TEST(UniformStream, BelowStaysInRange) {
  UniformStream s(derive(root(), "below"));
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = s.below(7);
    ASSERT_LT(v, 7u);
    ++hits[v];
  }
  for (int h : hits) EXPECT_NEAR(h, 10000, 500);
}

TEST(RandomPermutation, EdgeCases) {
  EXPECT_THROW(random_permutation(root(), 0), DomainError);
  EXPECT_EQ(random_permutation(root(), 1), std::vector<std::size_t>{0});
  EXPECT_EQ(random_permutation(root(), 50), random_permutation(root(), 50));
}

TEST(RandomPermutation, AlwaysABijection) {
  for (std::uint64_t t = 0; t < 200; ++t) {
    auto p = random_permutation(derive(root(), "bij", t), 1 + t % 37);
    std::sort(p.begin(), p.end());
    for (std::size_t i = 0; i < p.size(); ++i) ASSERT_EQ(p[i], i);
  }
}

TEST(RandomPermutation, UniformOverS3) {
  constexpr std::uint64_t kKeys = 600000;
  std::map<std::vector<std::size_t>, double> freq;
  const SeedKey k = derive(root(), "perm3");
  for (std::uint64_t t = 0; t < kKeys; ++t) freq[random_permutation(k.split(t), 3)] += 1;
  ASSERT_EQ(freq.size(), 6u);
  const double sigma = std::sqrt(kKeys * (1.0 / 6) * (5.0 / 6));
  for (const auto& [perm, c] : freq) EXPECT_NEAR(c, kKeys / 6.0, 3 * sigma);
}
