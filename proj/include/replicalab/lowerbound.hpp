#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "replicalab/algorithm.hpp"
#include "replicalab/errors.hpp"
#include "replicalab/meter.hpp"
#include "replicalab/output.hpp"
#include "replicalab/problems.hpp"
#include "replicalab/seedstream.hpp"

namespace replicalab {

/// Hard coin prior: θ = 1/2 ± τ with mass 1/3 each, otherwise uniform on
/// the open window between them.
struct AdversaryDist {
  double tau = 0.1;

  /// ParameterError unless 0 < τ < 1/4.
  void validate() const;
};

double sample_theta(const AdversaryDist& adv, const SeedKey& key);

/// Algorithm playing the adaptive game. Each round it sees the outputs of
/// the previous rounds of its own run and m fresh bits.
struct AdaptiveAlgorithm {
  using RunFn = std::function<Output(std::span<const Output> history, const SampleSet& bits,
                                     const SeedKey& key)>;
  /// Optional fast path on the number of ones; must agree with `run` on
  /// any bit sample with that count.
  using CountFn = std::function<Output(std::span<const Output> history, std::uint64_t ones,
                                       std::uint64_t m, const SeedKey& key)>;

  std::string name;
  RunFn run;
  CountFn run_on_count;
  /// How `run` wants its bits when there is no count fast path.
  Representation representation = Representation::counts;
};

/// Deterministic sign rule, ignoring both history and key.
AdaptiveAlgorithm canonical_sign_tester();

/// Runs a single-part bit algorithm every round with a fresh per-round key
/// and no dependence on history.
AdaptiveAlgorithm history_free(const ReplicableAlgorithm& alg);

struct GameRound {
  double theta = 0.5;
  std::array<Output, 3> outputs;  ///< run 1, run 2, phantom
  bool agree_12 = true;

  friend bool operator==(const GameRound&, const GameRound&) = default;
};

struct GameTranscript {
  std::vector<GameRound> rounds;
  std::size_t k = 0;
  std::size_t m = 0;

  /// Whole output sequences of runs 1 and 2 match.
  bool agree() const;

  friend bool operator==(const GameTranscript&, const GameTranscript&) = default;
};

/// k rounds on game key `key`. Round i draws θ_i and three independent
/// Bernoulli(θ_i)^m samples; run 1 and run 2 use their own histories with a
/// shared per-round algorithm key, the phantom reuses run 2's history on the
/// third sample. ParameterError unless k, m ≥ 1.
GameTranscript run_adaptive_game(const AdaptiveAlgorithm& alg, std::size_t k, std::size_t m,
                                 const AdversaryDist& adv, const SeedKey& key);

/// Whether runs 1 and 2 disagree somewhere in the game; same randomness as
/// run_adaptive_game but no phantom and stops at the first disagreement.
bool game_disagrees(const AdaptiveAlgorithm& alg, std::size_t k, std::size_t m,
                    const AdversaryDist& adv, const SeedKey& key);

struct DivergenceEstimate {
  std::size_t m = 0;
  std::uint64_t trials = 0;
  std::uint64_t disagreements = 0;
  double p_hat = 0.0;
  Interval ci;
};

inline constexpr std::uint64_t kMinDivergenceTrials = 1000;

/// Single-round disagreement probability E_θ Pr[alg(S) ≠ alg(S′)] with a
/// shared key; trial t plays a one-round game on key.split(t).
/// ParameterError when trials < 1000.
DivergenceEstimate measure_round_divergence(const AdaptiveAlgorithm& alg, std::size_t m,
                                            const AdversaryDist& adv, std::uint64_t trials,
                                            const SeedKey& key, const MeterOptions& opts = {});

/// Exact single-round divergence for the sign rule at m = 1 by enumeration
/// of the sample and Gauss-Legendre integration over the prior.
double sign_tester_divergence_m1(const AdversaryDist& adv);

struct ScalingOptions {
  std::uint64_t games = 200000;  ///< per probe
  double growth = 1.25;          ///< geometric grid ratio
  std::size_t m_ceiling = 1u << 22;
  std::uint64_t chunk = 10000;   ///< early-stop granularity
  MeterOptions meter;
};

struct ScalingRow {
  std::size_t k = 0;
  double m_min = 0.0;       ///< geometric midpoint of (m_fail, m_pass)
  std::size_t m_pass = 0;   ///< smallest grid point meeting the target
  std::size_t m_fail = 0;   ///< grid point below it (0 when m = 1 passes)
  double rho_at_pass = 0.0;
};

struct ScalingTable {
  std::vector<ScalingRow> rows;
  double exponent = 0.0;  ///< least-squares slope of log m_min on log k; NaN with < 2 rows
};

/// Raised when the search passes the m ceiling; carries the rows finished so far.
class ScalingExhausted : public ScaleError {
 public:
  ScalingExhausted(const std::string& what, ScalingTable partial)
      : ScaleError(what), partial_(std::move(partial)) {}
  const ScalingTable& partial() const { return partial_; }

 private:
  ScalingTable partial_;
};

/// Per k, searches the growth-ratio grid for the smallest m whose full-game
/// disagreement rate over `games` games is ≤ rho_target. Games are shared
/// across m (common random numbers) so the measured rate is nearly
/// monotone in m. ParameterError unless ks is ascending with k ≥ 1.
ScalingTable scaling_experiment(const AdaptiveAlgorithm& alg, std::span<const std::size_t> ks,
                                double rho_target, const AdversaryDist& adv, const SeedKey& key,
                                const ScalingOptions& options = {});

/// Least-squares slope of log y on log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct NaiveTightness {
  std::size_t k = 0;
  std::uint64_t trials = 0;
  double per_coord = 0.0;  ///< p₀ over all k·trials coordinate runs
  double joint = 0.0;
  double bound = 0.0;      ///< min(k·p₀, 1)/2
  Interval per_coord_ci;
  Interval joint_ci;

  double independent_prediction() const;  ///< 1 − (1 − p₀)^k
};

/// k independent coordinates drawn from `source`, one copy of the
/// single-part algorithm per coordinate with its own shared key.
/// ParameterError when trials < 1000 or k == 0.
NaiveTightness naive_tightness_experiment(std::size_t k, const ReplicableAlgorithm& per_coord_alg,
                                          std::uint64_t trials, const SeedKey& key,
                                          const DiscreteDistribution& source = bernoulli(0.5),
                                          const MeterOptions& opts = {});

}  // namespace replicalab
