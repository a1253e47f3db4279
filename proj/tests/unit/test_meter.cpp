#include <gtest/gtest.h>

#include "replicalab/meter.hpp"
#include "replicalab/replicable.hpp"
#include "test_helpers.hpp"

using namespace replicalab;
using testutil::root;

TEST(Wilson, Boundaries) {
  EXPECT_EQ(wilson_ci(0, 50).lo, 0.0);
  EXPECT_EQ(wilson_ci(50, 50).hi, 1.0);
  EXPECT_THROW(wilson_ci(3, 2), ParameterError);
  EXPECT_THROW(wilson_ci(0, 0), ParameterError);
  EXPECT_THROW(wilson_ci(1, 2, 1.0), ParameterError);
}

TEST(Wilson, TextbookFiveOfTen) {
  // (p + z²/2n ± z·sqrt(p(1-p)/n + z²/4n²)) / (1 + z²/n), z = 1.959963984540054
  const double z = 1.959963984540054, n = 10, p = 0.5;
  const double denom = 1 + z * z / n;
  const double centre = (p + z * z / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
  const Interval ci = wilson_ci(5, 10, 0.95);
  EXPECT_NEAR(ci.lo, centre - half, 1e-12);
  EXPECT_NEAR(ci.hi, centre + half, 1e-12);
  EXPECT_NEAR(ci.lo, 0.2365931, 1e-6);
}

TEST(Wilson, CoverageOnSimulatedBernoulli) {
  const double p = 0.07;
  int covered = 0;
  for (std::uint64_t meta = 0; meta < 200; ++meta) {
    UniformStream s(root("coverage").derive("m", meta));
    const std::uint64_t hits = binomial(s, 1000, p);
    covered += wilson_ci(hits, 1000).contains(p);
  }
  EXPECT_GE(covered, 180);
}

TEST(Meter, ConstantAlgorithmNeverDisagrees) {
  const auto alg = make_constant_algorithm(Output::scalar(0.5), single_part(10));
  const auto report = estimate_replicability(alg, population_of(bernoulli(0.5)), 500, root());
  EXPECT_EQ(report.rho_hat, 0.0);
  EXPECT_EQ(report.rho_ci.lo, 0.0);
}

TEST(Meter, RawMeanOfContinuousSampleAlwaysDisagrees) {
  DiscreteDistribution fine;
  for (int i = 0; i < 1000; ++i) {
    fine.support.push_back(i / 999.0);
    fine.probs.push_back(1.0 / 1000);
  }
  const auto report = estimate_replicability(make_raw_mean_algorithm(100), population_of(fine), 1000, root());
  EXPECT_GE(report.rho_hat, 1.0 - 3 * std::sqrt(1.0 / 1000));
}

TEST(Meter, FailureOfConstantOutputs) {
  const auto prob = mean_estimation_problem(0.1);
  const GroundTruth truth{{0.5}, std::nullopt};
  const auto pop = population_of(bernoulli(0.5));
  EXPECT_EQ(estimate_failure(make_constant_algorithm(Output::scalar(0.5), single_part(5)), prob, truth, pop, 200, root()).beta_hat, 0.0);
  EXPECT_EQ(estimate_failure(make_constant_algorithm(Output::scalar(0.9), single_part(5)), prob, truth, pop, 200, root()).beta_hat, 1.0);
}

TEST(Meter, RequiresHundredTrials) {
  const auto alg = make_constant_algorithm(Output::scalar(0.5), single_part(1));
  EXPECT_THROW(estimate_replicability(alg, population_of(bernoulli(0.5)), 99, root()), ParameterError);
}

TEST(Meter, SqEstimatorContractWithDoubledRerun) {
  const auto cfg = SqEstimateConfig::make(0.1, 0.1, 0.05);
  const auto alg = make_sq_algorithm(cfg);
  const auto pop = population_of(bernoulli(0.5));
  const ValidityCheck check{mean_estimation_problem(0.1), {{0.5}, std::nullopt}};
  for (std::uint64_t trials : {2000u, 4000u}) {
    const auto r = estimate_replicability(alg, pop, trials, root("sq-meter"), {}, check);
    EXPECT_TRUE(within_tolerance(r.rho_ci.hi, r.rho_ci, 0.1));
    EXPECT_TRUE(within_tolerance(r.beta_ci.hi, r.beta_ci, 0.05));
  }
}

TEST(Meter, ReportIndependentOfThreadCount) {
  const auto alg = make_grid_rounding_algorithm(0.25, 50);
  const auto pop = population_of(bernoulli(0.4));
  const auto one = estimate_replicability(alg, pop, 3000, root(), {0.95, 1});
  const auto four = estimate_replicability(alg, pop, 3000, root(), {0.95, 4});
  EXPECT_EQ(one, four);
  EXPECT_EQ(one.rho_ci.lo, four.rho_ci.lo);
  EXPECT_GT(one.disagreements, 0u);
}

TEST(Meter, CsvRowShape) {
  const auto row = csv_row("x", TrialReport::from_counts(100, 3, 1));
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 9);
  EXPECT_EQ(trial_report_csv_header().substr(0, 17), "experiment,trials");
}
