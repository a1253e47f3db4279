#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace replicalab {

/// Node of the deterministic seed tree.
///
/// A key is a 256-bit state. Roots come from a 64-hex-character seed; every
/// other key is obtained from its parent by `derive` (keyed BLAKE2b over an
/// injective encoding of the label and index) or, in hot loops, by `split`.
/// Keys are plain values: copying is cheap and every operation is pure.
class SeedKey {
 public:
  using State = std::array<std::uint64_t, 4>;

  SeedKey() = default;
  explicit SeedKey(const State& state) : state_(state) {}

  /// Parses a 64-character hex string (case-insensitive). Throws ConfigError.
  static SeedKey from_hex(std::string_view hex);

  std::string to_hex() const;
  const State& state() const { return state_; }

  /// Child key for (label, index); label must be 1..32 bytes.
  SeedKey derive(std::string_view label, std::uint64_t index = 0) const;

  /// Cheap non-cryptographic child for inner loops. Distinct indices give
  /// distinct, statistically independent children; never mixes with derive().
  SeedKey split(std::uint64_t index) const;

  friend bool operator==(const SeedKey&, const SeedKey&) = default;

 private:
  State state_{};
};

inline constexpr std::string_view kDefaultRootSeed =
    "5265706c6963616c61622064656661756c7420726f6f74207365656420763031";

SeedKey derive(const SeedKey& parent, std::string_view label,
               std::uint64_t index = 0);

/// 64 uniform bits at position `counter` of stream `lane` of `key`.
std::uint64_t random_bits(const SeedKey& key, std::uint64_t lane,
                          std::uint64_t counter);

/// Uniform value in [0,1) with 53-bit resolution; lane 0 of the key.
double uniform01(const SeedKey& key, std::uint64_t counter);

/// Sequential reader over one lane of a key. Models a 64-bit uniform random
/// bit generator so it can drive standard distributions.
class UniformStream {
 public:
  using result_type = std::uint64_t;

  explicit UniformStream(const SeedKey& key, std::uint64_t lane = 0)
      : key_(key), lane_(lane) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return random_bits(key_, lane_, counter_++); }

  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) by rejection; bound >= 1.
  std::uint64_t below(std::uint64_t bound);

  std::uint64_t position() const { return counter_; }

 private:
  SeedKey key_;
  std::uint64_t lane_;
  std::uint64_t counter_ = 0;
};

/// Uniform permutation of {0..n-1} (Fisher-Yates over the key's stream).
/// Throws DomainError when n == 0.
std::vector<std::size_t> random_permutation(const SeedKey& key, std::size_t n);

}  // namespace replicalab
