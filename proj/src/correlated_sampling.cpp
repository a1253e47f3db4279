#include "replicalab/correlated_sampling.hpp"

namespace replicalab {

std::size_t correlated_sample_index(std::span<const double> probs, const SeedKey& key) {
  if (probs.empty()) throw ValidationError("correlated_sample: empty distribution");
  validate_probabilities(probs);
  UniformStream stream(key, 0);
  const std::uint64_t n = probs.size();
  for (std::uint64_t t = 0; t < kCorrelatedSamplingMaxRounds; ++t) {
    const auto y = static_cast<std::size_t>(stream.below(n));
    const double u = stream.uniform01();
    if (u < probs[y]) return y;
  }
  throw InternalError("correlated_sample: exceeded the rejection round budget");
}

double disagreement_bound(double tv) {
  if (!(tv >= 0.0 && tv <= 1.0)) throw DomainError("disagreement_bound: tv must lie in [0,1]");
  return 2.0 * tv / (1.0 + tv);
}

}  // namespace replicalab
