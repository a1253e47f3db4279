#include "replicalab/seedstream.hpp"

#include <sodium.h>

#include <cstring>
#include <numeric>

#include "replicalab/errors.hpp"

namespace replicalab {

namespace {

constexpr std::size_t kMaxLabelBytes = 32;

constexpr std::uint64_t fmix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void store_le(std::uint64_t v, unsigned char* out) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<unsigned char>(v >> (8 * i));
}

std::uint64_t load_le(const unsigned char* in) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | in[i];
  return v;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

struct SodiumInit {
  SodiumInit() {
    if (sodium_init() < 0) throw InternalError("libsodium initialisation failed");
  }
};

}  // namespace

SeedKey SeedKey::from_hex(std::string_view hex) {
  if (hex.size() != 64) {
    throw ConfigError("root_seed must be 64 hex characters, got " +
                      std::to_string(hex.size()));
  }
  State state{};
  for (std::size_t w = 0; w < 4; ++w) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < 16; ++i) {
      int h = hex_value(hex[w * 16 + i]);
      if (h < 0) throw ConfigError("root_seed contains a non-hex character");
      v = (v << 4) | static_cast<std::uint64_t>(h);
    }
    state[w] = v;
  }
  return SeedKey(state);
}

std::string SeedKey::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (std::uint64_t w : state_) {
    for (int shift = 60; shift >= 0; shift -= 4) out.push_back(kDigits[(w >> shift) & 0xF]);
  }
  return out;
}

SeedKey SeedKey::derive(std::string_view label, std::uint64_t index) const {
  static const SodiumInit init;
  if (label.empty() || label.size() > kMaxLabelBytes) {
    throw ConfigError("seed label must be 1.." + std::to_string(kMaxLabelBytes) +
                      " bytes: '" + std::string(label) + "'");
  }
  unsigned char key[32];
  for (std::size_t w = 0; w < 4; ++w) store_le(state_[w], key + 8 * w);

  // length byte | label | index: prefix-free, hence injective in (label, index)
  unsigned char msg[1 + kMaxLabelBytes + 8];
  msg[0] = static_cast<unsigned char>(label.size());
  std::memcpy(msg + 1, label.data(), label.size());
  store_le(index, msg + 1 + label.size());
  const std::size_t msg_len = 1 + label.size() + 8;

  unsigned char digest[32];
  crypto_generichash(digest, sizeof digest, msg, msg_len, key, sizeof key);
  State child{};
  for (std::size_t w = 0; w < 4; ++w) child[w] = load_le(digest + 8 * w);
  return SeedKey(child);
}

SeedKey SeedKey::split(std::uint64_t index) const {
  const std::uint64_t tag = fmix64(index * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
  State child{};
  for (std::size_t w = 0; w < 4; ++w) {
    child[w] = fmix64(fmix64(state_[w] ^ tag) + state_[(w + 1) % 4] +
                      0x9E3779B97F4A7C15ULL * (w + 1));
  }
  return SeedKey(child);
}

SeedKey derive(const SeedKey& parent, std::string_view label, std::uint64_t index) {
  return parent.derive(label, index);
}

std::uint64_t random_bits(const SeedKey& key, std::uint64_t lane, std::uint64_t counter) {
  const auto& s = key.state();
  std::uint64_t x = fmix64(counter + s[0]);
  x = fmix64(x ^ (lane * 0x9E3779B97F4A7C15ULL + s[1]));
  x = fmix64(x + s[2]);
  return x ^ s[3];
}

double uniform01(const SeedKey& key, std::uint64_t counter) {
  return static_cast<double>(random_bits(key, 0, counter) >> 11) * 0x1.0p-53;
}

std::uint64_t UniformStream::below(std::uint64_t bound) {
  // Lemire's multiply-shift with rejection of the biased low region
  __uint128_t m = static_cast<__uint128_t>((*this)()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<__uint128_t>((*this)()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

std::vector<std::size_t> random_permutation(const SeedKey& key, std::size_t n) {
  if (n == 0) throw DomainError("random_permutation: empty domain");
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  UniformStream stream(key);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[stream.below(i + 1)]);
  }
  return perm;
}

}  // namespace replicalab
