#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <string>
#include <utility>
#include <thread>
#include <vector>

namespace replicalab {

/// Worker count: `requested` if non-zero, else REPLICALAB_THREADS, else the
/// hardware concurrency.
inline unsigned resolve_threads(unsigned requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("REPLICALAB_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Sums the integer tallies `fn(t)` (each of length `width`) over t in
/// [0, n). Every t is evaluated exactly once and summation is over
/// integers, so the result does not depend on the thread count. The first
/// exception thrown by any worker is rethrown on the caller's thread.
template <class Fn>
std::vector<std::uint64_t> parallel_tally_n(std::uint64_t n, std::size_t width, unsigned threads, Fn&& fn) {
  const unsigned workers =
      static_cast<unsigned>(std::min<std::uint64_t>(resolve_threads(threads), std::max<std::uint64_t>(n, 1)));
  std::vector<std::vector<std::uint64_t>> partial(workers, std::vector<std::uint64_t>(width, 0));
  std::vector<std::exception_ptr> errors(workers);

  auto body = [&](unsigned w) {
    try {
      for (std::uint64_t t = w; t < n; t += workers) {
        const auto r = fn(t);
        for (std::size_t i = 0; i < width; ++i) partial[w][i] += r[i];
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };

  if (workers == 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<std::uint64_t> total(width, 0);
  for (const auto& p : partial) {
    for (std::size_t i = 0; i < width; ++i) total[i] += p[i];
  }
  return total;
}

/// Fixed-width form of parallel_tally_n.
template <std::size_t N, class Fn>
std::array<std::uint64_t, N> parallel_tally(std::uint64_t n, unsigned threads, Fn&& fn) {
  const auto v = parallel_tally_n(n, N, threads, std::forward<Fn>(fn));
  std::array<std::uint64_t, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

}  // namespace replicalab
