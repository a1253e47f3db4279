#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "replicalab/output.hpp"
#include "replicalab/problems.hpp"
#include "replicalab/seedstream.hpp"

namespace replicalab {

/// How an algorithm wants its sample sets materialised.
enum class Representation { items, counts };

/// One input part: `size` i.i.d. draws from population[source].
struct PartSpec {
  std::size_t source = 0;
  std::size_t size = 0;

  friend bool operator==(const PartSpec&, const PartSpec&) = default;
};

struct InputShape {
  std::vector<PartSpec> parts;
  Representation representation = Representation::items;

  std::size_t total_size() const;
  friend bool operator==(const InputShape&, const InputShape&) = default;
};

InputShape single_part(std::size_t n, Representation rep = Representation::items,
                       std::size_t source = 0);
/// One part of n draws per source 0..sources-1 (product coins, bandit arms).
InputShape per_source_parts(std::size_t sources, std::size_t n,
                            Representation rep = Representation::items);
/// Concatenation; the representation of `a` wins.
InputShape concat(const InputShape& a, const InputShape& b);

/// Finite output space: a membership test and, when small, the elements in
/// canonical (sorted) order. Correlated sampling over outputs needs the list.
struct OutputSpace {
  std::vector<Output> elements;
  std::function<bool(const Output&)> contains;

  bool enumerable() const { return !elements.empty(); }
  static OutputSpace of(std::vector<Output> elements);
  static OutputSpace predicate(std::function<bool(const Output&)> contains);
};

/// Internal randomness consisting of `count` equally likely atoms, exposed
/// so output distributions can be enumerated exactly.
struct RandomnessAtoms {
  std::size_t count = 0;
  std::function<Output(const Dataset&, std::size_t atom)> run_atom;
};

/// (sample parts, shared seed) → output. `run` must be pure.
struct ReplicableAlgorithm {
  std::string name;
  InputShape shape;
  OutputSpace output_space;
  std::function<Output(const Dataset&, const SeedKey&)> run;
  std::optional<RandomnessAtoms> atoms;

  std::size_t sample_complexity() const { return shape.total_size(); }

  /// Checks the dataset against `shape` (ParameterError) and runs.
  Output operator()(const Dataset& data, const SeedKey& key) const;
};

/// Throws ParameterError unless data has one part per PartSpec with at least
/// the specified size (exactly, when `exact`).
void check_dataset(const InputShape& shape, const Dataset& data, bool exact,
                   const std::string& who);

/// Part j drawn from population[shape.parts[j].source] on lane j of key.
Dataset draw_dataset(const Population& population, const InputShape& shape,
                     const SeedKey& key);

/// Always returns `value`.
ReplicableAlgorithm make_constant_algorithm(Output value, InputShape shape);

/// Raw empirical mean of part 0 (not replicable; the meter's sanity check).
ReplicableAlgorithm make_raw_mean_algorithm(std::size_t n);

/// Single-part algorithm lifted to a product input: reads part `coordinate`
/// of a dataset with `coordinates` parts of the base size.
ReplicableAlgorithm coordinate_algorithm(const ReplicableAlgorithm& base,
                                         std::size_t coordinate,
                                         std::size_t coordinates);

}  // namespace replicalab
