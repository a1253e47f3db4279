#include <gtest/gtest.h>

#include <cmath>

#include "replicalab/meter.hpp"
#include "replicalab/replicable.hpp"
#include "test_helpers.hpp"

using namespace replicalab;
using testutil::root;

TEST(SqEstimate, ForcedOffsetRounding) {
  EXPECT_NEAR(round_to_offset_grid(0.37, 0.1, 0.03), 0.33, 1e-12);
  // exactly midway between 0.125 and 0.375 (binary-exact values) rounds up
  EXPECT_EQ(round_to_offset_grid(0.25, 0.25, 0.125), 0.375);
  EXPECT_EQ(round_to_offset_grid(0.999, 0.1, 0.03), 1.0);
  EXPECT_EQ(round_to_offset_grid(0.001, 0.1, 0.07), 0.0);
}

TEST(SqEstimate, BudgetFormula) {
  EXPECT_EQ(sq_sample_budget(0.1, 0.1, 0.05, 8), static_cast<std::size_t>(std::ceil(8 * std::log(20.0) / (0.01 * 0.01))));
  EXPECT_EQ(sq_sample_budget(0.5, 0.2, 0.01, 1), static_cast<std::size_t>(std::ceil(std::log(100.0) / (0.04 * 0.25))));
  const auto cfg = SqEstimateConfig::make(0.1, 0.1, 0.05);
  EXPECT_EQ(cfg.spacing, cfg.alpha);
}

TEST(SqEstimate, PreconditionsAndDomain) {
  const SqEstimateConfig cfg{0.1, 0.1, 0.05, 0.1, 4};
  EXPECT_THROW(replicable_sq_estimate(SampleSet::from_items({0.1, 0.2}), cfg, root()), ParameterError);
  EXPECT_THROW(replicable_sq_estimate(SampleSet::from_items({0.1, 0.2, 1.5, 0}), cfg, root()), DomainError);
}

TEST(SqEstimate, GridMembershipAndAccuracy) {
  const SqEstimateConfig cfg{0.1, 0.1, 0.05, 0.1, 20};
  for (std::uint64_t t = 0; t < 2000; ++t) {
    const SeedKey k = root("grid").derive("t", t);
    const SampleSet s = sample(DiscreteDistribution{{0, 0.3, 0.9, 1}, {0.2, 0.3, 0.3, 0.2}}, 20, k.derive("S"));
    const double out = replicable_sq_estimate(s, cfg, k);
    const double u = sq_offset(k, 0.1);
    const double steps = (out - u) / 0.1;
    const bool clipped = out == 0.0 || out == 1.0;
    ASSERT_TRUE(clipped || std::abs(steps - std::round(steps)) < 1e-9);
    if (!clipped) ASSERT_LE(std::abs(out - s.mean()), 0.05 + 1e-9);
    ASSERT_EQ(out, replicable_sq_estimate(s, cfg, k));
  }
}

TEST(SqEstimate, BernoulliHalfMeetsContract) {
  const auto cfg = SqEstimateConfig::make(0.1, 0.1, 0.05);
  const ValidityCheck check{mean_estimation_problem(0.1), {{0.5}, std::nullopt}};
  const auto r = estimate_replicability(make_sq_algorithm(cfg), population_of(bernoulli(0.5)), 10000,
                                        root("sq-half"), {}, check);
  EXPECT_TRUE(within_tolerance(r.rho_hat, r.rho_ci, 0.1)) << r.rho_hat;
  EXPECT_TRUE(within_tolerance(r.beta_hat, r.beta_ci, 0.05)) << r.beta_hat;
}

TEST(SqEstimate, ItemsAndCountsAgree) {
  const SqEstimateConfig cfg{0.1, 0.1, 0.05, 0.1, 500};
  const SeedKey k = root("rep");
  const auto a = sample(bernoulli(0.3), 500, k);
  const auto b = SampleSet::from_counts(a.histogram().empty() ? std::vector<double>{} : std::vector<double>{0, 1},
                                        {a.count(0), a.count(1)});
  EXPECT_EQ(replicable_sq_estimate(a, cfg, k), replicable_sq_estimate(b, cfg, k));
}

TEST(SignTest, CanonicalRule) {
  EXPECT_EQ(replicable_sign_test(SampleSet::from_items({1, 1, 1}), root()), 1);
  EXPECT_EQ(replicable_sign_test(SampleSet::from_items({0, 0, 0}), root()), -1);
  EXPECT_EQ(replicable_sign_test(SampleSet::from_items({0, 1}), root()), 1);
  EXPECT_THROW(replicable_sign_test(SampleSet{}, root()), ParameterError);
}

TEST(HeavyHitters, SingleMass) {
  const auto s = sample_counts(point_mass(7), 100, root());
  EXPECT_EQ(replicable_heavy_hitters(s, 0.5, 0.2, 0.1, 0.05, root()), std::vector<double>{7});
  EXPECT_THROW(replicable_heavy_hitters(s, 0.5, 0.3, 0.1, 0.05, root()), ParameterError);
}

TEST(HeavyHitters, LightMassesGiveEmptyList) {
  DiscreteDistribution light;
  for (int i = 0; i < 10; ++i) {
    light.support.push_back(i);
    light.probs.push_back(0.1);
  }
  const auto alg = make_heavy_hitters_algorithm(0.4, 0.1, 0.2, 0.05);
  const auto fail = estimate_failure(alg, heavy_hitters_problem(0.4, 0.1), {{}, light},
                                     population_of(light), 2000, root("hh-light"));
  EXPECT_EQ(fail.failures, 0u);
}

TEST(HeavyHitters, ThreeMassesValidAndReplicable) {
  const DiscreteDistribution d{{0, 1, 2}, {0.5, 0.3, 0.2}};
  const auto alg = make_heavy_hitters_algorithm(0.4, 0.1, 0.1, 0.05);
  const ValidityCheck check{heavy_hitters_problem(0.4, 0.1), {{}, d}};
  const auto r = estimate_replicability(alg, population_of(d), 10000, root("hh3"), {}, check);
  EXPECT_TRUE(within_tolerance(r.beta_hat, r.beta_ci, 0.05));
  EXPECT_TRUE(within_tolerance(r.rho_hat, r.rho_ci, 0.1));
}

TEST(BestArm, SingleArm) {
  const std::vector<SampleSet> arms{sample_counts(bernoulli(0.3), 10, root())};
  for (std::uint64_t t = 0; t < 100; ++t) EXPECT_EQ(replicable_best_arm(arms, 0.2, 0.1, 0.05, root().split(t)), 0u);
  EXPECT_THROW(replicable_best_arm(std::vector<SampleSet>{}, 0.2, 0.1, 0.05, root()), DomainError);
}

TEST(BestArm, ClearWinner) {
  const Population pop{bernoulli(0.9), bernoulli(0.1)};
  const auto alg = make_best_arm_algorithm(2, 0.2, 0.1, 0.05);
  const auto f = estimate_failure(alg, best_arm_problem(0.2), {{0.9, 0.1}, std::nullopt}, pop, 10000, root("ba"));
  EXPECT_TRUE(within_tolerance(f.beta_hat, f.beta_ci, 0.05));
}

TEST(BestArm, IdenticalArmsReplicable) {
  const Population pop{bernoulli(0.5), bernoulli(0.5), bernoulli(0.5)};
  const auto alg = make_best_arm_algorithm(3, 0.2, 0.1, 0.05);
  const auto r = estimate_replicability(alg, pop, 10000, root("ba-id"));
  EXPECT_TRUE(within_tolerance(r.rho_hat, r.rho_ci, 0.1)) << r.rho_hat;
}

TEST(GridRounding, AtomsMatchContinuousLawAndSpace) {
  const auto alg = make_grid_rounding_algorithm(0.25, 40, 16);
  ASSERT_TRUE(alg.atoms.has_value());
  EXPECT_EQ(alg.output_space.elements.size(), 5u);
  const Dataset d{sample_counts(bernoulli(0.4), 40, root())};
  for (std::size_t a = 0; a < 16; ++a) EXPECT_TRUE(alg.output_space.contains(alg.atoms->run_atom(d, a)));
  EXPECT_THROW(make_grid_rounding_algorithm(0.3, 10), ParameterError);
}

TEST(Algorithms, PureOnRepeat) {
  const Population pop{bernoulli(0.5), bernoulli(0.45)};
  const std::vector<ReplicableAlgorithm> algs{
      make_sq_algorithm(SqEstimateConfig{0.1, 0.1, 0.05, 0.1, 300}),
      make_grid_rounding_algorithm(0.25, 300), make_sign_test_algorithm(300),
      make_best_arm_algorithm(2, 0.3, 0.3, 0.3)};
  for (const auto& alg : algs) {
    for (std::uint64_t t = 0; t < 50; ++t) {
      const SeedKey k = root("pure").derive("t", t);
      const Dataset d = draw_dataset(pop, alg.shape, k);
      EXPECT_EQ(alg(d, k), alg(d, k)) << alg.name;
    }
  }
}
