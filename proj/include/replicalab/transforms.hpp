#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "replicalab/algorithm.hpp"
#include "replicalab/problems.hpp"
#include "replicalab/seedstream.hpp"

namespace replicalab {

enum class Verdict { accept, reject };

/// Checks a candidate output against fresh samples.
struct Tester {
  std::string name;
  InputShape shape;
  std::function<Verdict(const Output& candidate, const Dataset&, const SeedKey&)> test;

  std::size_t sample_complexity() const { return shape.total_size(); }
};

// --- testers and fallbacks ------------------------------------------------------

/// ceil(32·ln(2/β)/α²): Hoeffding to ±α/4 with failure β.
std::size_t mean_tester_budget(double alpha, double beta);

/// Accept iff |candidate − μ̂| ≤ 3α/2 (inclusive). Requires at least
/// ceil(2·ln(1/β)/α²) samples (ParameterError); DomainError when empty.
Verdict mean_tester(double candidate, const SampleSet& samples, double alpha, double beta);

/// ceil(24·ln(1/β)/α).
std::size_t bernoulli_rate_tester_budget(double alpha, double beta);

/// Accept iff the empirical rate is ≥ 3α/2.
Verdict bernoulli_rate_tester(const SampleSet& samples, double alpha, double beta);

/// Part sizes for the heavy-hitters tester: [L-estimates, discovery, A-estimates].
struct HeavyHittersTesterBudget {
  std::size_t estimate_l = 0;
  std::size_t discovery = 0;
  std::size_t estimate_a = 0;
};
HeavyHittersTesterBudget heavy_hitters_tester_budget(double nu, double eps, double beta);

/// Three-part procedure with ν′ = ν − ε/4, ε′ = ε/2: reject when |L| > 4/ν,
/// when an L-estimate falls below ν′ − ε′ − ε/16, or when a discovered
/// element outside L is estimated at ≥ ν − ε/16. `data` holds the parts
/// in the order of HeavyHittersTesterBudget.
Verdict heavy_hitters_tester(std::span<const Element> L, const Dataset& data, double nu,
                             double eps, double beta, const SeedKey& key);

/// [discovery, estimation] part sizes of the non-replicable solver.
struct HeavyHittersFallbackBudget {
  std::size_t discovery = 0;
  std::size_t estimate = 0;
};
HeavyHittersFallbackBudget nonreplicable_heavy_hitters_budget(double nu, double eps, double beta);

/// Elements of a discovery sample whose frequency estimate is ≥ ν − ε/16.
std::vector<Element> nonreplicable_heavy_hitters(const Dataset& data, double nu, double eps,
                                                 double beta, const SeedKey& key);

/// Per-arm ceil(128·ln(32|A|/β)/α²): every mean to ±α/16 with failure β/2.
std::size_t best_arm_tester_budget(std::size_t arms, double alpha, double beta);

/// Accept iff μ̂_candidate ≥ max μ̂ − 3α/2.
Verdict best_arm_tester(std::size_t candidate, std::span<const SampleSet> arm_samples,
                        double alpha, double beta);

/// Empirical argmax on per-arm samples (lowest index on ties).
std::size_t nonreplicable_best_arm(std::span<const SampleSet> arm_samples);

// --- boosting ----------------------------------------------------------------------

/// Components instantiated at the boosted sub-parameters.
struct BoostPlan {
  ReplicableAlgorithm replicable;
  Tester tester;
  ReplicableAlgorithm fallback;  ///< not replicable; same calling convention

  /// Parts of the three stages laid end to end.
  InputShape shape() const;
};

/// Runs replicable on part 1 → u; returns u when tester(u, part 2)
/// accepts, fallback(part 3) otherwise. ParameterError on undersized parts.
Output boost_success(const BoostPlan& plan, const Dataset& part1, const Dataset& part2,
                     const Dataset& part3, const SeedKey& key);

/// Component factories; boost_plan evaluates them at replicable(ρ/4, α/2, ρ/4),
/// tester(α/2, min(ρ,β)/4) and fallback(α, β/2).
struct BoostComponents {
  std::function<ReplicableAlgorithm(double rho, double alpha, double beta)> replicable;
  std::function<Tester(double alpha, double beta)> tester;
  std::function<ReplicableAlgorithm(double alpha, double beta)> fallback;
};

BoostPlan boost_plan(const BoostComponents& components, double rho, double alpha, double beta);

/// The boosted algorithm over the concatenated three-stage input.
ReplicableAlgorithm make_boosted(const BoostPlan& plan);

/// Mean estimation: SQ estimator, mean tester, raw empirical mean on
/// ceil(ln(2/β)/(2α²)) samples.
BoostComponents sq_boost_components(double sq_C = 8.0);

/// Heavy hitters at (ν, ε): the replicable stage solves the (ν − ε/4, ε/2)
/// problem so its valid answers pass the tester. The α argument is unused.
BoostComponents heavy_hitters_boost_components(double nu, double eps, double hh_C = 8.0);

BoostComponents best_arm_boost_components(std::size_t arms, double bestarm_C = 1.0,
                                          double lambda_scale = 1.0);

// --- invariance wrappers ------------------------------------------------------------

/// A statistic together with a sampler of the conditional law of the data
/// given the statistic. Statistic values are vectors of doubles.
struct SufficientStatistic {
  std::string name;
  std::function<std::vector<double>(const SampleSet&)> f;
  std::function<SampleSet(const std::vector<double>&, const SeedKey&)> resample;
};

/// Bits with f = number of ones; resample places them uniformly among n positions.
SufficientStatistic bernoulli_sum_statistic(std::size_t n);

/// f = sorted multiset; resample = uniformly random arrangement.
SufficientStatistic multiset_statistic();

/// alg.run(stat.resample(f(samples), r′), r) with r = derive(key,"r"),
/// r′ = derive(key,"r'"). ConfigError when the resample does not reproduce
/// the statistic.
Output suff_stat_wrap(const ReplicableAlgorithm& alg, const SufficientStatistic& stat,
                      const SampleSet& samples, const SeedKey& key);

/// alg.run(σ(sort(samples)), r) with σ = random_permutation(r′, n).
/// ConfigError on an unordered domain (NaN elements).
Output order_invariant_wrap(const ReplicableAlgorithm& alg, const SampleSet& samples,
                            const SeedKey& key);

/// π = random_permutation(r′, |domain|) relabels domain[i] as domain[π(i)];
/// returns alg.run(π(samples), r). DomainError for elements outside the domain.
Output label_invariant_wrap(const ReplicableAlgorithm& alg, std::span<const Element> domain,
                            const SampleSet& samples, const SeedKey& key);

/// correlated_sample(oracle(samples), key). The oracle must return a
/// distribution over a support that does not depend on the samples.
Output pointwise_label_invariant_wrap(
    const std::function<OutputDistribution(const SampleSet&)>& oracle, const SampleSet& samples,
    const SeedKey& key);

inline constexpr std::size_t kExactOracleAtomLimit = std::size_t{1} << 20;
inline constexpr std::size_t kDefaultOracleInnerTrials = 10000;

/// Output distribution of label_invariant_wrap(alg, domain, samples, ·) over
/// alg.output_space.elements. Exact when |domain|!·atoms ≤ 2²⁰ and alg
/// exposes atoms; otherwise a Monte Carlo estimate over `inner_trials`
/// split keys of `mc_key`. ConfigError when the output space is not enumerable.
OutputDistribution label_invariant_output_distribution(const ReplicableAlgorithm& alg,
                                                       std::span<const Element> domain,
                                                       const SampleSet& samples,
                                                       const SeedKey& mc_key,
                                                       std::size_t inner_trials = kDefaultOracleInnerTrials,
                                                       bool* exact = nullptr);

/// Whether label_invariant_output_distribution would enumerate exactly.
bool exact_label_oracle_feasible(const ReplicableAlgorithm& alg, std::size_t domain_size);

// Packaged wrappers over single-part algorithms.
ReplicableAlgorithm make_suff_stat_wrapped(const ReplicableAlgorithm& alg, SufficientStatistic stat);
ReplicableAlgorithm make_order_invariant(const ReplicableAlgorithm& alg);
ReplicableAlgorithm make_label_invariant(const ReplicableAlgorithm& alg, std::vector<Element> domain);
/// Pointwise wrapper; the oracle's Monte Carlo key is derived from the run key
/// only when exact enumeration is infeasible.
ReplicableAlgorithm make_pointwise_label_invariant(const ReplicableAlgorithm& alg,
                                                   std::vector<Element> domain,
                                                   std::size_t inner_trials = kDefaultOracleInnerTrials);

}  // namespace replicalab
