#include <gtest/gtest.h>

#include <cmath>

#include "replicalab/lowerbound.hpp"
#include "replicalab/replicable.hpp"
#include "test_helpers.hpp"

using namespace replicalab;
using testutil::root;

namespace {

// Threshold moves with the previous output, so histories matter.
AdaptiveAlgorithm sticky_tester() {
  AdaptiveAlgorithm alg;
  alg.name = "sticky";
  alg.run = [](std::span<const Output> history, const SampleSet& bits, const SeedKey&) {
    const double cut = history.empty() ? 0.5 : (history.back().as_scalar() > 0 ? 0.47 : 0.53);
    return Output::scalar(bits.mean() >= cut ? 1.0 : -1.0);
  };
  return alg;
}

AdaptiveAlgorithm without_fast_path(AdaptiveAlgorithm alg) {
  alg.run_on_count = nullptr;
  return alg;
}

}  // namespace

TEST(SampleTheta, MixtureWeightsAndSupport) {
  const AdversaryDist adv{0.1};
  constexpr int kDraws = 300000;
  int low = 0, high = 0;
  const SeedKey base = root("theta");
  for (int i = 0; i < kDraws; ++i) {
    const double t = sample_theta(adv, base.split(i));
    ASSERT_GE(t, 0.4);
    ASSERT_LE(t, 0.6);
    low += t == 0.5 - 0.1;
    high += t == 0.5 + 0.1;
  }
  const double sigma = std::sqrt(kDraws * (1.0 / 3) * (2.0 / 3));
  EXPECT_NEAR(low, kDraws / 3.0, 3 * sigma);
  EXPECT_NEAR(high, kDraws / 3.0, 3 * sigma);
  EXPECT_EQ(sample_theta(adv, base), sample_theta(adv, base));
  EXPECT_THROW(sample_theta(AdversaryDist{0.25}, base), ParameterError);
  EXPECT_THROW(sample_theta(AdversaryDist{0.0}, base), ParameterError);
}

TEST(AdaptiveGame, SingleRoundIsThreeSignTests) {
  const AdversaryDist adv{0.1};
  for (std::uint64_t g = 0; g < 200; ++g) {
    const SeedKey key = root("k1").split(g);
    const auto t = run_adaptive_game(canonical_sign_tester(), 1, 25, adv, key);
    ASSERT_EQ(t.rounds.size(), 1u);
    const SeedKey dk = key.split(0);
    EXPECT_EQ(t.rounds[0].theta, sample_theta(adv, dk));
    for (std::uint64_t r = 0; r < 3; ++r) {
      const SampleSet s = sample_counts(bernoulli(t.rounds[0].theta), 25, dk, r + 1);
      EXPECT_EQ(t.rounds[0].outputs[r].as_scalar(), replicable_sign_test(s, SeedKey{}));
    }
    EXPECT_EQ(t.agree(), t.rounds[0].outputs[0] == t.rounds[0].outputs[1]);
  }
}

TEST(AdaptiveGame, CountFastPathMatchesSamples) {
  const AdversaryDist adv{0.15};
  const auto fast = canonical_sign_tester();
  const auto slow = without_fast_path(fast);
  const auto wrapped = history_free(make_sign_test_algorithm(40));
  for (std::uint64_t g = 0; g < 300; ++g) {
    const SeedKey key = root("fast").split(g);
    const auto a = run_adaptive_game(fast, 4, 40, adv, key);
    EXPECT_EQ(a, run_adaptive_game(slow, 4, 40, adv, key));
    EXPECT_EQ(a, run_adaptive_game(wrapped, 4, 40, adv, key));
    EXPECT_EQ(game_disagrees(fast, 4, 40, adv, key), !a.agree());
  }
}

TEST(AdaptiveGame, DeterministicAndValidated) {
  const AdversaryDist adv{0.1};
  const auto a = run_adaptive_game(sticky_tester(), 5, 30, adv, root("det"));
  EXPECT_EQ(a, run_adaptive_game(sticky_tester(), 5, 30, adv, root("det")));
  EXPECT_EQ(a.k, 5u);
  for (const auto& r : a.rounds) {
    EXPECT_GE(r.theta, 0.4);
    EXPECT_LE(r.theta, 0.6);
  }
  EXPECT_THROW(run_adaptive_game(sticky_tester(), 0, 30, adv, root()), ParameterError);
  EXPECT_THROW(run_adaptive_game(sticky_tester(), 3, 0, adv, root()), ParameterError);
}

TEST(AdaptiveGame, HistoryFreeItemsRepresentation) {
  auto alg = history_free(make_sign_test_algorithm(15, Representation::items));
  EXPECT_EQ(alg.representation, Representation::items);
  EXPECT_NO_THROW(run_adaptive_game(alg, 3, 15, AdversaryDist{0.1}, root()));
}

TEST(AdaptiveGame, PhantomDistributedLikeRunTwo) {
  const AdversaryDist adv{0.1};
  constexpr std::size_t kRounds = 4;
  std::vector<std::vector<double>> run2(kRounds, std::vector<double>(2)), phantom = run2;
  for (std::uint64_t g = 0; g < 10000; ++g) {
    const auto t = run_adaptive_game(sticky_tester(), kRounds, 60, adv, root("phantom").split(g));
    for (std::size_t i = 0; i < kRounds; ++i) {
      run2[i][t.rounds[i].outputs[1].as_scalar() > 0] += 1;
      phantom[i][t.rounds[i].outputs[2].as_scalar() > 0] += 1;
    }
  }
  for (std::size_t i = 0; i < kRounds; ++i) {
    EXPECT_GT(testutil::chi_square_two_sample_p(run2[i], phantom[i]), 0.001) << "round " << i;
  }
}

TEST(RoundDivergence, SingleFlipOracle) {
  // 2θ(1−θ) averaged over the prior: atoms give 0.48, the window 2(1/4 − τ²/3)
  const double exact = (0.48 + 0.48 + 2 * (0.25 - 0.01 / 3)) / 3;
  EXPECT_NEAR(sign_tester_divergence_m1(AdversaryDist{0.1}), exact, 1e-12);
  EXPECT_NEAR(exact, 0.484444, 1e-6);
  const auto e = measure_round_divergence(canonical_sign_tester(), 1, AdversaryDist{0.1}, 50000, root("m1"));
  EXPECT_LE(std::abs(e.p_hat - exact), 3 * e.ci.half_width());
}

TEST(RoundDivergence, DecreasingWithSqrtShape) {
  const AdversaryDist adv{0.1};
  std::vector<double> scaled;
  double prev = 1.0;
  for (std::size_t m : {100u, 1000u, 10000u}) {
    const auto e = measure_round_divergence(canonical_sign_tester(), m, adv, 50000, root("shape"));
    EXPECT_LT(e.p_hat, prev);
    prev = e.p_hat;
    scaled.push_back(e.p_hat * adv.tau * std::sqrt(static_cast<double>(m)));
  }
  const auto [lo, hi] = std::minmax_element(scaled.begin(), scaled.end());
  EXPECT_LE(*hi / *lo, 2.0);
  EXPECT_THROW(measure_round_divergence(canonical_sign_tester(), 10, adv, 999, root()), ParameterError);
}

TEST(RoundDivergence, ThreadCountIrrelevant) {
  const AdversaryDist adv{0.1};
  MeterOptions one, four;
  one.threads = 1;
  four.threads = 4;
  const auto a = measure_round_divergence(canonical_sign_tester(), 50, adv, 5000, root("thr"), one);
  const auto b = measure_round_divergence(canonical_sign_tester(), 50, adv, 5000, root("thr"), four);
  EXPECT_EQ(a.disagreements, b.disagreements);
}

TEST(LogLogSlope, ExactPowerLaw) {
  const std::vector<double> x{1, 2, 4, 8}, y{3, 12, 48, 192};
  EXPECT_NEAR(loglog_slope(x, y), 2.0, 1e-12);
  EXPECT_TRUE(std::isnan(loglog_slope(std::vector<double>{1}, std::vector<double>{1})));
  EXPECT_THROW(loglog_slope(std::vector<double>{1, 0}, std::vector<double>{1, 1}), DomainError);
}

TEST(Scaling, SmallTableMonotoneAndSingleRoundBudget) {
  const AdversaryDist adv{0.1};
  ScalingOptions o;
  o.games = 20000;
  const std::vector<std::size_t> ks{1, 2, 4};
  const SeedKey key = root("scaling");
  const auto table = scaling_experiment(canonical_sign_tester(), ks, 0.1, adv, key, o);
  ASSERT_EQ(table.rows.size(), 3u);
  for (std::size_t i = 1; i < 3; ++i) EXPECT_GE(table.rows[i].m_min, table.rows[i - 1].m_min);
  for (const auto& r : table.rows) {
    EXPECT_LE(r.rho_at_pass, 0.1);
    EXPECT_LE(static_cast<double>(r.m_pass), 1.25 * static_cast<double>(r.m_fail) + 1);
  }
  EXPECT_GT(table.exponent, 1.0);

  // k = 1 probes are single-round divergence measurements on the same keys
  const auto& r1 = table.rows[0];
  const auto pass = measure_round_divergence(canonical_sign_tester(), r1.m_pass, adv, o.games, key.derive("k", 1));
  const auto fail = measure_round_divergence(canonical_sign_tester(), r1.m_fail, adv, o.games, key.derive("k", 1));
  EXPECT_LE(pass.p_hat, 0.1);
  EXPECT_GT(fail.p_hat, 0.1);
  EXPECT_EQ(pass.p_hat, r1.rho_at_pass);
}

TEST(Scaling, CeilingCarriesPartialTable) {
  ScalingOptions o;
  o.games = 2000;
  o.m_ceiling = 200;
  const std::vector<std::size_t> ks{1, 8};
  try {
    scaling_experiment(canonical_sign_tester(), ks, 0.1, AdversaryDist{0.1}, root("ceil"), o);
    FAIL() << "expected ScalingExhausted";
  } catch (const ScalingExhausted& e) {
    ASSERT_EQ(e.partial().rows.size(), 1u);
    EXPECT_EQ(e.partial().rows[0].k, 1u);
  }
  const std::vector<std::size_t> bad{2, 1};
  EXPECT_THROW(scaling_experiment(canonical_sign_tester(), bad, 0.1, AdversaryDist{0.1}, root(), o), ParameterError);
}

TEST(NaiveTightness, SingleCoordinateJointEqualsPerCoordinate) {
  const auto alg = make_grid_rounding_algorithm(0.25, 400);
  const auto r = naive_tightness_experiment(1, alg, 5000, root("nt1"));
  EXPECT_EQ(r.joint, r.per_coord);
  EXPECT_EQ(r.bound, r.per_coord / 2);
}

TEST(NaiveTightness, IndependentCoordinatesCompound) {
  const auto alg = make_grid_rounding_algorithm(0.25, 1600);
  const auto r = naive_tightness_experiment(5, alg, 20000, root("nt5"));
  EXPECT_GT(r.per_coord, 0.02);
  EXPECT_NEAR(r.joint, r.independent_prediction(), 0.02);
  EXPECT_GE(r.joint, r.bound - 3 * r.joint_ci.half_width());
  EXPECT_THROW(naive_tightness_experiment(0, alg, 5000, root()), ParameterError);
  EXPECT_THROW(naive_tightness_experiment(2, alg, 999, root()), ParameterError);
}
