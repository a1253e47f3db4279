#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "replicalab/problems.hpp"
#include "replicalab/seedstream.hpp"

namespace replicalab {

/// Hard cap on rejection rounds before giving up with InternalError.
inline constexpr std::uint64_t kCorrelatedSamplingMaxRounds = 1'000'000;

/// Rejection scheme over the shared stream of `key`: round t draws an index
/// y_t uniform over the support and u_t uniform in [0,1); the first round
/// with u_t < P(y_t) wins. Strict comparison keeps zero-mass atoms out.
/// Validates probs (ValidationError).
std::size_t correlated_sample_index(std::span<const double> probs, const SeedKey& key);

template <class T>
const T& correlated_sample(const FiniteDistribution<T>& dist, const SeedKey& key) {
  dist.validate();
  return dist.support[correlated_sample_index(dist.probs, key)];
}

/// 2·tv/(1+tv). DomainError outside [0,1].
double disagreement_bound(double tv);

}  // namespace replicalab
