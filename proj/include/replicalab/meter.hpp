#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "replicalab/algorithm.hpp"
#include "replicalab/problems.hpp"
#include "replicalab/seedstream.hpp"

namespace replicalab {

struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  double half_width() const { return (hi - lo) / 2.0; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Wilson score interval for a binomial proportion. ParameterError unless
/// successes ≤ trials, trials ≥ 1 and level ∈ (0,1).
Interval wilson_ci(std::uint64_t successes, std::uint64_t trials, double level = 0.95);

struct TrialReport {
  std::uint64_t trials = 0;
  std::uint64_t disagreements = 0;
  std::uint64_t failures = 0;
  double rho_hat = 0.0;
  double beta_hat = 0.0;
  Interval rho_ci;
  Interval beta_ci;
  double level = 0.95;

  static TrialReport from_counts(std::uint64_t trials, std::uint64_t disagreements,
                                 std::uint64_t failures, double level = 0.95);

  friend bool operator==(const TrialReport& a, const TrialReport& b) {
    return a.trials == b.trials && a.disagreements == b.disagreements &&
           a.failures == b.failures && a.level == b.level;
  }
};

/// point ≤ target + k·half_width(ci): the acceptance rule used throughout.
bool within_tolerance(double point, const Interval& ci, double target, double k = 3.0);

/// The optional validity check estimate_replicability applies to run 1.
struct ValidityCheck {
  StatProblem problem;
  GroundTruth truth;
};

struct MeterOptions {
  double level = 0.95;
  unsigned threads = 0;  ///< 0: REPLICALAB_THREADS or hardware concurrency
};

inline constexpr std::uint64_t kMinMeterTrials = 100;

/// Trial t derives (r, S₁, S₂) from (key, t); S₁ and S₂ are independent
/// draws of alg.shape from `population`, r is shared. Counts outputs that
/// differ; with `check`, also counts invalid run-1 outputs as failures.
/// ParameterError when trials < 100.
TrialReport estimate_replicability(const ReplicableAlgorithm& alg, const Population& population,
                                   std::uint64_t trials, const SeedKey& key,
                                   const MeterOptions& opts = {},
                                   const std::optional<ValidityCheck>& check = std::nullopt);

/// Fresh (S, r) per trial; counts invalid outputs.
TrialReport estimate_failure(const ReplicableAlgorithm& alg, const StatProblem& problem,
                             const GroundTruth& truth, const Population& population,
                             std::uint64_t trials, const SeedKey& key,
                             const MeterOptions& opts = {});

/// Joint replicability plus per-coordinate validity of tuple-valued outputs.
struct CoordinateReport {
  TrialReport joint;                    ///< failures: some coordinate invalid
  std::vector<std::uint64_t> invalid;   ///< per coordinate, on run 1
  std::vector<double> validity_rate;
  std::vector<Interval> validity_ci;
};

/// Same trial keys as estimate_replicability. Run 1's output must be a
/// tuple of scalars; coordinate i is valid when |y_i − means[i]| ≤ alpha.
CoordinateReport estimate_coordinatewise(const ReplicableAlgorithm& alg, const Population& population,
                                         const std::vector<double>& means, double alpha,
                                         std::uint64_t trials, const SeedKey& key,
                                         const MeterOptions& opts = {});

/// Header matching csv_row().
std::string trial_report_csv_header();
std::string csv_row(const std::string& experiment, const TrialReport& report);

}  // namespace replicalab
