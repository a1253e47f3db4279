#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "replicalab/errors.hpp"
#include "replicalab/output.hpp"
#include "replicalab/seedstream.hpp"

namespace replicalab {

/// Domain element. Reals for [0,1]-valued data, bits as 0/1, categorical
/// elements as integral identifiers.
using Element = double;

inline constexpr double kProbabilityTolerance = 1e-12;

/// Explicit finite-support probability vector. Support order is part of the
/// identity: correlated sampling indexes the support by position.
template <class T>
struct FiniteDistribution {
  std::vector<T> support;
  std::vector<double> probs;

  std::size_t size() const { return support.size(); }

  /// Throws ValidationError unless probs are non-negative, sized like the
  /// support, non-empty and sum to 1 within kProbabilityTolerance.
  void validate() const;
};

using DiscreteDistribution = FiniteDistribution<Element>;
using OutputDistribution = FiniteDistribution<Output>;

void validate_probabilities(std::span<const double> probs);

template <class T>
void FiniteDistribution<T>::validate() const {
  if (support.empty()) throw ValidationError("distribution has empty support");
  if (support.size() != probs.size()) {
    throw ValidationError("support and probability vectors differ in length");
  }
  validate_probabilities(probs);
}

/// Validates and additionally requires distinct support elements.
void validate_discrete(const DiscreteDistribution& dist);

DiscreteDistribution point_mass(Element x);
DiscreteDistribution bernoulli(double p);

/// Product of independent coins with the given means.
struct BernoulliProduct {
  std::vector<double> p;

  void validate() const;
};

/// Independent sources an input is drawn from: one entry for a plain
/// distribution, one per coordinate of a product, one per bandit arm.
using Population = std::vector<DiscreteDistribution>;

Population population_of(const DiscreteDistribution& dist);
Population population_of(const BernoulliProduct& product);

/// Multiset of domain elements. Either an ordered list of items (`sample`)
/// or a histogram of sorted distinct values with counts (`sample_counts`).
/// Histograms carry only the unordered multiset; consumers that look at
/// positions must require items().
class SampleSet {
 public:
  SampleSet() = default;

  static SampleSet from_items(std::vector<Element> items);
  /// values need not be sorted; zero counts are dropped, duplicates merged.
  static SampleSet from_counts(std::vector<Element> values,
                               std::vector<std::uint64_t> counts);

  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  bool has_items() const { return has_items_; }

  /// Throws DomainError for histogram-only sets.
  std::span<const Element> items() const;

  /// Items in original order, or the histogram expanded in sorted order.
  std::vector<Element> materialize() const;

  /// Sorted distinct values with their multiplicities.
  const std::vector<std::pair<Element, std::uint64_t>>& histogram() const {
    return histogram_;
  }

  std::uint64_t count(Element x) const;
  double frequency(Element x) const;
  double mean() const;

  /// Applies f to every element, keeping the representation.
  SampleSet map(const std::function<Element(Element)>& f) const;

  friend bool operator==(const SampleSet& a, const SampleSet& b) {
    return a.has_items_ == b.has_items_ && a.items_ == b.items_ &&
           a.histogram_ == b.histogram_;
  }

 private:
  void build_histogram();

  std::vector<Element> items_;
  std::vector<std::pair<Element, std::uint64_t>> histogram_;
  std::size_t size_ = 0;
  bool has_items_ = false;
};

/// Input to an algorithm: one sample set per input part.
using Dataset = std::vector<SampleSet>;

/// n i.i.d. draws listed in draw order; item i uses stream position i of
/// the given lane. Throws ParameterError when n == 0.
SampleSet sample(const DiscreteDistribution& dist, std::size_t n,
                 const SeedKey& key, std::uint64_t lane = 0);

/// Same law as the histogram of sample(), drawn as an exact multinomial
/// (sequential binomials). O(|support|) regardless of n.
SampleSet sample_counts(const DiscreteDistribution& dist, std::size_t n,
                        const SeedKey& key, std::uint64_t lane = 0);

/// Product-coin sample: one part per coordinate, each n bits.
Dataset sample(const BernoulliProduct& product, std::size_t n, const SeedKey& key);

/// Exact Binomial(n, p) draw from a stream.
std::uint64_t binomial(UniformStream& stream, std::uint64_t n, double p);

/// ½·Σ|p_i − q_i|. Throws DomainError when supports differ.
template <class T>
double tv_distance(const FiniteDistribution<T>& p, const FiniteDistribution<T>& q) {
  if (p.support != q.support) throw DomainError("tv_distance: support mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) total += std::abs(p.probs[i] - q.probs[i]);
  double tv = 0.5 * total;
  return tv > 1.0 ? 1.0 : tv;
}

/// Ground truth handed to validity predicates: the harness knows D.
struct GroundTruth {
  std::vector<double> means;                  ///< coordinate / arm means, or θ
  std::optional<DiscreteDistribution> dist;   ///< masses for list problems
};

/// A statistical problem: output space plus the validity predicate G_D.
struct StatProblem {
  std::string name;
  std::vector<std::pair<std::string, double>> accuracy_params;
  std::function<bool(const Output&)> in_output_space;
  std::function<bool(const GroundTruth&, const Output&)> validity;
};

/// |output_i − μ_i| ≤ α for every coordinate; outputs in [0,1]^k.
StatProblem mean_estimation_problem(double alpha);
/// Every x with mass ≥ ν listed, no x with mass ≤ ν − ε listed.
StatProblem heavy_hitters_problem(double nu, double eps);
/// Output arm a with μ_a ≥ max μ − α.
StatProblem best_arm_problem(double alpha);
/// Sign problem G_θ with window (1/2 − τ, 1/2 + τ): outputs ±1.
StatProblem threshold_sign_problem(double tau);

/// Throws DomainError when the output is outside the problem's output space.
bool is_valid(const StatProblem& problem, const GroundTruth& truth, const Output& output);

}  // namespace replicalab
