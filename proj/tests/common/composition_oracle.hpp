#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <vector>

namespace testoracle {

using Big = boost::multiprecision::cpp_bin_float_50;

struct BigTuple {
  Big eps_k, delta_k, eps_star, delta_star;
};

// Independent extended-precision evaluation of the adaptive composition
// recurrences, written directly from the formulas without expm1 rewrites.
inline BigTuple composition_oracle(const std::vector<double>& eps, const std::vector<double>& delta,
                             const std::vector<double>& gamma, double delta_prime) {
  using boost::multiprecision::exp;
  using boost::multiprecision::log;
  using boost::multiprecision::sqrt;
  const Big one = 1, two = 2;
  const Big dp = delta_prime;
  Big sum_sq = 0, drift = 0, sum_hat = 0, sum_gamma = 0, eps_prev = 0, eps_j = 0, delta_j = 0;
  for (std::size_t l = 0; l < eps.size(); ++l) {
    const Big e = eps[l], d = delta[l], g = gamma[l];
    const Big d_hat = two * d / (one - exp(-e));
    const Big inner = two * exp(two * e) / (exp(e) - one) + one;
    const Big psi = d * (two * exp(e) + one) + two * d * d * inner * inner;
    sum_sq += e * e;
    drift += psi + two * e * (exp(two * e) / (one - d_hat) - one);
    sum_hat += d_hat;
    sum_gamma += exp(eps_prev) * g;
    eps_j = two * sqrt(two * log(one / dp) * sum_sq) + drift;
    delta_j = Big(static_cast<double>(l + 1)) * dp + sum_hat + sum_gamma;
    eps_prev = eps_j;
  }
  const Big eps_star = 3 * eps_j;
  const Big delta_star = 5 * sqrt(delta_j / (eps_j < one ? eps_j : one));
  return {eps_j, delta_j, eps_star, delta_star};
}

inline double rel_error(double got, const Big& want) {
  return static_cast<double>(boost::multiprecision::abs((Big(got) - want) / want));
}

}  // namespace testoracle
