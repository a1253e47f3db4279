#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "replicalab/algorithm.hpp"
#include "replicalab/problems.hpp"
#include "replicalab/seedstream.hpp"

namespace replicalab {

inline constexpr double kDefaultSqC = 8.0;
inline constexpr double kDefaultHeavyHittersC = 8.0;
inline constexpr double kDefaultBestArmC = 1.0;

/// ceil(C·ln(1/min(ρ,β))/(α²ρ²)).
std::size_t sq_sample_budget(double rho, double alpha, double beta, double C = kDefaultSqC);

struct SqEstimateConfig {
  double rho = 0.1;
  double alpha = 0.1;
  double beta = 0.05;
  double spacing = 0.1;  ///< grid step, equal to alpha
  std::size_t n = 0;     ///< sample budget

  /// spacing = alpha, n = sq_sample_budget(rho, alpha, beta, C).
  static SqEstimateConfig make(double rho, double alpha, double beta, double C = kDefaultSqC);
  void validate() const;
};

/// Nearest point of {offset + j·spacing} to `mean`, ties upward, clipped to [0,1].
double round_to_offset_grid(double mean, double spacing, double offset);

/// Shared grid offset u = spacing·uniform01(key).
double sq_offset(const SeedKey& key, double spacing);

/// Random-offset grid rounding of the empirical mean. Requires
/// |samples| = cfg.n and values in [0,1] (DomainError otherwise).
double replicable_sq_estimate(const SampleSet& samples, const SqEstimateConfig& cfg,
                              const SeedKey& key);

/// Canonical fixed-coins sign rule: +1 iff the empirical mean is ≥ 1/2.
int replicable_sign_test(const SampleSet& samples, const SeedKey& key);
/// Same rule on a count of ones out of m.
int sign_rule(std::uint64_t ones, std::uint64_t m);

/// ceil(C·ln(1/min(ρ,β))/(ν·ε²·ρ²)).
std::size_t heavy_hitters_sample_budget(double nu, double eps, double rho, double beta,
                                        double C = kDefaultHeavyHittersC);

/// Elements whose empirical frequency reaches the shared random threshold
/// v ∈ (ν−ε/2, ν), sorted. Throws ParameterError unless 0 < ε ≤ ν/2.
std::vector<Element> replicable_heavy_hitters(const SampleSet& samples, double nu, double eps,
                                              double rho, double beta, const SeedKey& key);

/// Per-arm budget ceil(C·ln³(|A|/min(ρ,β))/(α²ρ²)).
std::size_t best_arm_sample_budget(std::size_t arms, double alpha, double rho, double beta,
                                   double C = kDefaultBestArmC);

/// Gibbs weights exp(λ·μ̂_a) normalised, λ = lambda_scale·(2/α)·ln(|A|/ρ).
std::vector<double> best_arm_gibbs(std::span<const SampleSet> arm_samples, double alpha,
                                   double rho, double lambda_scale = 1.0);

/// Correlated sample from the Gibbs distribution over arms.
std::size_t replicable_best_arm(std::span<const SampleSet> arm_samples, double alpha, double rho,
                                double beta, const SeedKey& key, double lambda_scale = 1.0);

// --- packaged algorithms ----------------------------------------------------

ReplicableAlgorithm make_sq_algorithm(const SqEstimateConfig& cfg,
                                      Representation rep = Representation::counts);

/// Randomised rounding to the fixed grid {0, h, …, 1}: h·floor(μ̂/h + u).
/// With offset_atoms = K > 0 the offset takes the K values a/K, exposing
/// the randomness as enumerable atoms. Requires 1/h to be an integer.
ReplicableAlgorithm make_grid_rounding_algorithm(double h, std::size_t n,
                                                 std::size_t offset_atoms = 0,
                                                 Representation rep = Representation::counts);

/// Grid rounding of coordinate `coordinate` of a product input with
/// `coordinates` parts of n draws each; same law as coordinate_algorithm over
/// make_grid_rounding_algorithm without copying the part.
ReplicableAlgorithm make_coordinate_grid_rounding(double h, std::size_t n, std::size_t coordinate,
                                                  std::size_t coordinates,
                                                  std::size_t offset_atoms = 0,
                                                  Representation rep = Representation::counts);

ReplicableAlgorithm make_sign_test_algorithm(std::size_t m,
                                             Representation rep = Representation::counts);

ReplicableAlgorithm make_heavy_hitters_algorithm(double nu, double eps, double rho, double beta,
                                                 double C = kDefaultHeavyHittersC);

/// Reads one part per arm (population index = arm).
ReplicableAlgorithm make_best_arm_algorithm(std::size_t arms, double alpha, double rho,
                                            double beta, double C = kDefaultBestArmC,
                                            double lambda_scale = 1.0);

}  // namespace replicalab
