#include "replicalab/algorithm.hpp"

#include <algorithm>
#include <numeric>

namespace replicalab {

std::size_t InputShape::total_size() const {
  return std::accumulate(parts.begin(), parts.end(), std::size_t{0},
                         [](std::size_t acc, const PartSpec& p) { return acc + p.size; });
}

InputShape single_part(std::size_t n, Representation rep, std::size_t source) {
  return InputShape{{PartSpec{source, n}}, rep};
}

InputShape per_source_parts(std::size_t sources, std::size_t n, Representation rep) {
  InputShape shape{{}, rep};
  for (std::size_t s = 0; s < sources; ++s) shape.parts.push_back({s, n});
  return shape;
}

InputShape concat(const InputShape& a, const InputShape& b) {
  InputShape out = a;
  out.parts.insert(out.parts.end(), b.parts.begin(), b.parts.end());
  return out;
}

OutputSpace OutputSpace::of(std::vector<Output> elements) {
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  OutputSpace space;
  space.elements = elements;
  space.contains = [elements](const Output& y) {
    return std::binary_search(elements.begin(), elements.end(), y);
  };
  return space;
}

OutputSpace OutputSpace::predicate(std::function<bool(const Output&)> contains) {
  OutputSpace space;
  space.contains = std::move(contains);
  return space;
}

void check_dataset(const InputShape& shape, const Dataset& data, bool exact,
                   const std::string& who) {
  if (data.size() != shape.parts.size()) {
    throw ParameterError(who + ": expected " + std::to_string(shape.parts.size()) +
                         " sample parts, got " + std::to_string(data.size()));
  }
  for (std::size_t j = 0; j < data.size(); ++j) {
    const std::size_t want = shape.parts[j].size;
    const std::size_t got = data[j].size();
    if (got < want || (exact && got != want)) {
      throw ParameterError(who + ": part " + std::to_string(j) + " has " + std::to_string(got) +
                           " samples, needs " + (exact ? "exactly " : "at least ") +
                           std::to_string(want));
    }
  }
}

Output ReplicableAlgorithm::operator()(const Dataset& data, const SeedKey& key) const {
  check_dataset(shape, data, /*exact=*/false, name);
  return run(data, key);
}

Dataset draw_dataset(const Population& population, const InputShape& shape, const SeedKey& key) {
  Dataset data;
  data.reserve(shape.parts.size());
  for (std::size_t j = 0; j < shape.parts.size(); ++j) {
    const PartSpec& part = shape.parts[j];
    if (part.source >= population.size()) {
      throw ParameterError("draw_dataset: part " + std::to_string(j) + " reads source " +
                           std::to_string(part.source) + " but the population has " +
                           std::to_string(population.size()));
    }
    const DiscreteDistribution& dist = population[part.source];
    data.push_back(shape.representation == Representation::counts
                       ? sample_counts(dist, part.size, key, j)
                       : sample(dist, part.size, key, j));
  }
  return data;
}

ReplicableAlgorithm make_constant_algorithm(Output value, InputShape shape) {
  ReplicableAlgorithm alg;
  alg.name = "constant";
  alg.shape = std::move(shape);
  alg.output_space = OutputSpace::of({value});
  alg.run = [value](const Dataset&, const SeedKey&) { return value; };
  alg.atoms = RandomnessAtoms{1, [value](const Dataset&, std::size_t) { return value; }};
  return alg;
}

ReplicableAlgorithm make_raw_mean_algorithm(std::size_t n) {
  ReplicableAlgorithm alg;
  alg.name = "raw_mean";
  alg.shape = single_part(n);
  alg.output_space = OutputSpace::predicate([](const Output& y) {
    return y.size() == 1 && y.as_scalar() >= 0.0 && y.as_scalar() <= 1.0;
  });
  alg.run = [](const Dataset& data, const SeedKey&) { return Output::scalar(data[0].mean()); };
  return alg;
}

ReplicableAlgorithm coordinate_algorithm(const ReplicableAlgorithm& base, std::size_t coordinate,
                                         std::size_t coordinates) {
  if (base.shape.parts.size() != 1) {
    throw ConfigError("coordinate_algorithm: base algorithm must read a single part");
  }
  if (coordinate >= coordinates) throw ParameterError("coordinate_algorithm: coordinate out of range");
  ReplicableAlgorithm alg;
  alg.name = base.name + "[" + std::to_string(coordinate) + "]";
  alg.shape = per_source_parts(coordinates, base.shape.parts[0].size, base.shape.representation);
  alg.output_space = base.output_space;
  alg.run = [base, coordinate](const Dataset& data, const SeedKey& key) {
    return base.run(Dataset{data[coordinate]}, key);
  };
  if (base.atoms) {
    auto atoms = *base.atoms;
    alg.atoms = RandomnessAtoms{atoms.count, [atoms, coordinate](const Dataset& data, std::size_t a) {
                                  return atoms.run_atom(Dataset{data[coordinate]}, a);
                                }};
  }
  return alg;
}

}  // namespace replicalab
