#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "replicalab/algorithm.hpp"
#include "replicalab/problems.hpp"
#include "replicalab/seedstream.hpp"

namespace replicalab {

// --- naive composition -----------------------------------------------------------

/// Tuple of alg_i(data, derive(key, "alg", i)). Every algorithm must read
/// the same input shape (ParameterError otherwise).
Output naive_compose(std::span<const ReplicableAlgorithm> algs, const Dataset& data,
                     const SeedKey& key);

ReplicableAlgorithm make_naive_composition(std::vector<ReplicableAlgorithm> algs);

// --- parameter calculus ------------------------------------------------------------

/// Absolute constants of the simplified composition bound. c1 bounds ε_i and
/// δ_i/ε_i², c3 bounds δ′; c2 and c4 scale ε* and δ*.
struct PgConstants {
  double c1 = 0.01;
  double c2 = 6.0;
  double c3 = 0.5;
  double c4 = 5.0;
};

struct SimpleComposition {
  double eps_star = 0.0;
  double delta_star = 0.0;
};

/// ε* = c2·(sqrt(ln(1/δ′)·Σε²) + Σε²); δ* = c4·sqrt((kδ′ + Σδ_i/ε_i)/ε*).
/// With `enforce`, ParameterError unless every ε_i ∈ (0, c1],
/// 0 ≤ δ_i ≤ c1·ε_i² and δ′ ∈ (0, c3).
SimpleComposition pg_compose_simple(std::span<const double> eps, std::span<const double> delta,
                                    double delta_prime, const PgConstants& constants = {},
                                    bool enforce = true);

/// Whether pg_compose_simple's preconditions hold.
bool pg_simple_preconditions_hold(std::span<const double> eps, std::span<const double> delta,
                                  double delta_prime, const PgConstants& constants = {});

struct CompositionParams {
  std::vector<double> eps_i;
  std::vector<double> delta_i;
  double delta_prime = 0.0;
  double eps_star = 0.0;
  double delta_star = 0.0;
  double gamma_star = 0.0;
  double n_bound = 0.0;
  double beta_bound = 0.0;
  double sum_eps_sq = 0.0;
  bool preconditions_hold = false;  ///< of the simplified bound at these ε_i, δ_i
};

/// ε_i = c·ρ·sqrt((n_i/Σn + 1/k)/ln(k/(ρβ₀))), δ_i = β₀ε_i¹⁰,
/// δ′ = β₀Σε_i¹⁰/k, (ε*, δ*) from pg_compose_simple without enforcement,
/// γ* = δ*, n_bound = (Σn/ρ²)·ln³(k/(ρβ₀)), beta_bound = k·sqrt(β₀)·ln(k/(ρβ₀)).
/// ParameterError unless k ≥ 2, every n_i ≥ 1 and ρ, β₀, c ∈ (0,1).
CompositionParams theorem1_params(std::span<const double> n_list, double rho, double beta0,
                                  double c = 0.1, const PgConstants& constants = {});

struct HeterogeneousComposition {
  std::vector<double> delta_hat;  ///< δ̂_ℓ
  std::vector<double> psi;        ///< ψ_ℓ
  std::vector<double> eps_j;      ///< ε^(j), j = 1..k
  std::vector<double> delta_j;    ///< δ^(j), j = 1..k
  double eps_k = 0.0;
  double delta_k = 0.0;
  double eps_star = 0.0;
  double delta_star = 0.0;
  double gamma_star = 0.0;
};

/// Adaptive composition of (γ_ℓ, ε_ℓ, δ_ℓ)-perfectly generalizing algorithms
/// with the explicit recurrences for ε^(j), δ^(j). ParameterError naming the
/// violated bound unless ε_ℓ ∈ (0,1], δ_ℓ ∈ (0, ε_ℓ/50], γ_ℓ ∈ (0,1) and
/// δ′ ∈ (0, 1/2).
HeterogeneousComposition pg_compose_het_params(std::span<const double> eps,
                                               std::span<const double> delta,
                                               std::span<const double> gamma,
                                               double delta_prime);

// --- replicability → perfect generalization → replicability -------------------

/// Exponential-mechanism surrogate: the input is split into m_runs chunks of
/// the base shape; the base algorithm runs on every chunk with one shared
/// internal seed r, and one output is drawn with probability ∝
/// exp(ε·tally/2) over the base's enumerated output space.
class PgSurrogate {
 public:
  PgSurrogate(ReplicableAlgorithm base, double eps, double delta, std::size_t m_runs);

  const ReplicableAlgorithm& base() const { return base_; }
  double eps() const { return eps_; }
  double delta() const { return delta_; }
  std::size_t m_runs() const { return m_runs_; }
  const std::vector<Output>& support() const { return base_.output_space.elements; }
  InputShape shape() const;

  /// ParameterError when the data cannot be split into m_runs chunks.
  Output run(const Dataset& data, const SeedKey& key) const;

  /// Output distribution on `data`, averaging the exact mechanism law over
  /// `inner_trials` shared seeds split from `inner_key`.
  OutputDistribution distribution(const Dataset& data, const SeedKey& inner_key,
                                  std::size_t inner_trials) const;

  ReplicableAlgorithm as_algorithm() const;

 private:
  std::vector<Dataset> chunks(const Dataset& data) const;
  std::vector<double> mechanism(const std::vector<Dataset>& chunks, const SeedKey& r) const;

  ReplicableAlgorithm base_;
  double eps_;
  double delta_;
  std::size_t m_runs_;
};

/// ConfigError when the base output space is not enumerable; ParameterError
/// when m_runs < 2 or ε ≤ 0.
PgSurrogate replicability_to_pg(const ReplicableAlgorithm& alg, double eps, double delta,
                                std::size_t m_runs);

/// correlated_sample(oracle(data), key).
Output pg_to_replicable(const std::function<OutputDistribution(const Dataset&)>& oracle,
                        const Dataset& data, const SeedKey& key);

// --- pipeline ------------------------------------------------------------------------

inline constexpr std::size_t kPipelineMaxAtoms = 10000;

struct PipelineOptions {
  double c = 0.1;
  PgConstants constants;
  std::size_t m_runs = 64;
  std::size_t inner_trials = 10000;
  std::size_t max_atoms = kPipelineMaxAtoms;
};

/// Composition through perfect generalization: per-algorithm (ε_i, δ_i)
/// from theorem1_params, a PgSurrogate per algorithm, the product of
/// their estimated output distributions, and one correlated sample from it.
class ComposePipeline {
 public:
  /// ScaleError when the product output space exceeds max_atoms.
  ComposePipeline(std::vector<ReplicableAlgorithm> algs, double rho, double beta0,
                  PipelineOptions options = {});

  const std::vector<PgSurrogate>& surrogates() const { return surrogates_; }
  const std::vector<double>& eps() const { return eps_; }
  const std::vector<double>& delta() const { return delta_; }
  double beta_bound() const { return beta_bound_; }
  std::size_t atoms() const { return support_.size(); }
  /// Worst-case standard error of a Monte Carlo probability estimate.
  double estimation_error() const;
  InputShape shape() const;

  OutputDistribution joint_distribution(const Dataset& data, const SeedKey& key) const;
  Output run(const Dataset& data, const SeedKey& key) const;
  ReplicableAlgorithm as_algorithm() const;

 private:
  std::vector<ReplicableAlgorithm> algs_;
  std::vector<PgSurrogate> surrogates_;
  std::vector<double> eps_;
  std::vector<double> delta_;
  double beta_bound_ = 0.0;
  PipelineOptions options_;
  std::vector<Output> support_;
};

Output compose_pipeline(const std::vector<ReplicableAlgorithm>& algs, double rho, double beta0,
                        const Dataset& data, const SeedKey& key, const PipelineOptions& options = {});

}  // namespace replicalab
