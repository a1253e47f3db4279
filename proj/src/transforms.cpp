#include "replicalab/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "replicalab/correlated_sampling.hpp"
#include "replicalab/replicable.hpp"

namespace replicalab {

namespace {

// accept/reject thresholds are inclusive; this absorbs decimal round-off
constexpr double kBoundarySlack = 1e-12;

void require_open_unit(double x, const char* what) {
  if (!(x > 0.0 && x < 1.0)) throw ParameterError(std::string(what) + " must lie in (0,1)");
}

std::size_t ceil_size(double x) {
  if (!std::isfinite(x) || x > 1e15) throw ScaleError("sample budget overflows");
  return static_cast<std::size_t>(std::ceil(x));
}

void require_hh(double nu, double eps, double beta) {
  if (!(nu > 0.0 && nu <= 1.0)) throw ParameterError("heavy hitters: nu must lie in (0,1]");
  if (!(eps > 0.0 && eps <= nu / 2.0)) throw ParameterError("heavy hitters: need 0 < eps <= nu/2");
  require_open_unit(beta, "beta");
}

double frequency_or_zero(const SampleSet& s, Element x) {
  return static_cast<double>(s.count(x)) / static_cast<double>(s.size());
}

Dataset slice(const Dataset& data, std::size_t from, std::size_t count) {
  return Dataset(data.begin() + static_cast<std::ptrdiff_t>(from),
                 data.begin() + static_cast<std::ptrdiff_t>(from + count));
}

}  // namespace

// --- mean / rate testers ------------------------------------------------------------

std::size_t mean_tester_budget(double alpha, double beta) {
  require_open_unit(alpha, "alpha");
  require_open_unit(beta, "beta");
  return ceil_size(32.0 * std::log(2.0 / beta) / (alpha * alpha));
}

Verdict mean_tester(double candidate, const SampleSet& samples, double alpha, double beta) {
  require_open_unit(alpha, "alpha");
  require_open_unit(beta, "beta");
  if (samples.empty()) throw DomainError("mean_tester: no samples");
  const std::size_t need = ceil_size(2.0 * std::log(1.0 / beta) / (alpha * alpha));
  if (samples.size() < need) {
    throw ParameterError("mean_tester: needs at least " + std::to_string(need) + " samples");
  }
  return std::abs(candidate - samples.mean()) <= 1.5 * alpha + kBoundarySlack ? Verdict::accept
                                                                              : Verdict::reject;
}

std::size_t bernoulli_rate_tester_budget(double alpha, double beta) {
  require_open_unit(alpha, "alpha");
  require_open_unit(beta, "beta");
  return ceil_size(24.0 * std::log(1.0 / beta) / alpha);
}

Verdict bernoulli_rate_tester(const SampleSet& samples, double alpha, double beta) {
  const std::size_t need = bernoulli_rate_tester_budget(alpha, beta);
  if (samples.size() < need) {
    throw ParameterError("bernoulli_rate_tester: needs at least " + std::to_string(need) + " samples");
  }
  return samples.mean() >= 1.5 * alpha - kBoundarySlack ? Verdict::accept : Verdict::reject;
}

// --- heavy hitters ---------------------------------------------------------------

HeavyHittersTesterBudget heavy_hitters_tester_budget(double nu, double eps, double beta) {
  require_hh(nu, eps, beta);
  // each stage fails with probability at most beta/3; estimates are within eps/32
  const double e2 = (eps / 32.0) * (eps / 32.0);
  HeavyHittersTesterBudget b;
  b.estimate_l = ceil_size(std::log(2.0 * 3.0 * (4.0 / nu) / beta) / (2.0 * e2));
  b.discovery = ceil_size(std::log(3.0 / (nu * beta)) / nu);
  b.estimate_a = ceil_size(std::log(2.0 * 3.0 * static_cast<double>(b.discovery) / beta) / (2.0 * e2));
  return b;
}

Verdict heavy_hitters_tester(std::span<const Element> L, const Dataset& data, double nu, double eps,
                             double beta, const SeedKey&) {
  require_hh(nu, eps, beta);
  if (data.size() != 3) throw ParameterError("heavy_hitters_tester: expects three sample parts");
  for (const auto& part : data) {
    if (part.empty()) throw ParameterError("heavy_hitters_tester: empty sample part");
  }
  if (static_cast<double>(L.size()) > 4.0 / nu) return Verdict::reject;

  const double nu_p = nu - eps / 4.0;
  const double eps_p = eps / 2.0;
  for (Element x : L) {
    if (frequency_or_zero(data[0], x) < nu_p - eps_p - eps / 16.0 - kBoundarySlack) return Verdict::reject;
  }
  std::vector<Element> sorted_l(L.begin(), L.end());
  std::sort(sorted_l.begin(), sorted_l.end());
  for (const auto& [x, c] : data[1].histogram()) {
    if (std::binary_search(sorted_l.begin(), sorted_l.end(), x)) continue;
    if (frequency_or_zero(data[2], x) >= nu - eps / 16.0 - kBoundarySlack) return Verdict::reject;
  }
  return Verdict::accept;
}

HeavyHittersFallbackBudget nonreplicable_heavy_hitters_budget(double nu, double eps, double beta) {
  require_hh(nu, eps, beta);
  const double e2 = (eps / 32.0) * (eps / 32.0);
  HeavyHittersFallbackBudget b;
  b.discovery = ceil_size(std::log(2.0 / (nu * beta)) / nu);
  b.estimate = ceil_size(std::log(2.0 * 2.0 * static_cast<double>(b.discovery) / beta) / (2.0 * e2));
  return b;
}

std::vector<Element> nonreplicable_heavy_hitters(const Dataset& data, double nu, double eps,
                                                 double beta, const SeedKey&) {
  require_hh(nu, eps, beta);
  if (data.size() != 2 || data[0].empty() || data[1].empty()) {
    throw ParameterError("nonreplicable_heavy_hitters: expects non-empty discovery and estimation parts");
  }
  std::vector<Element> out;
  for (const auto& [x, c] : data[0].histogram()) {
    if (frequency_or_zero(data[1], x) >= nu - eps / 16.0 - kBoundarySlack) out.push_back(x);
  }
  return out;
}

// --- best arm ----------------------------------------------------------------------

std::size_t best_arm_tester_budget(std::size_t arms, double alpha, double beta) {
  if (arms == 0) throw DomainError("best arm: no arms");
  require_open_unit(alpha, "alpha");
  require_open_unit(beta, "beta");
  return ceil_size(128.0 * std::log(32.0 * static_cast<double>(arms) / beta) / (alpha * alpha));
}

Verdict best_arm_tester(std::size_t candidate, std::span<const SampleSet> arm_samples, double alpha,
                        double beta) {
  if (arm_samples.empty()) throw DomainError("best_arm_tester: no arms");
  if (candidate >= arm_samples.size()) throw DomainError("best_arm_tester: candidate arm out of range");
  const std::size_t need = best_arm_tester_budget(arm_samples.size(), alpha, beta);
  double best = -1.0;
  for (const auto& s : arm_samples) {
    if (s.size() < need) {
      throw ParameterError("best_arm_tester: every arm needs at least " + std::to_string(need) + " samples");
    }
    best = std::max(best, s.mean());
  }
  return arm_samples[candidate].mean() >= best - 1.5 * alpha - kBoundarySlack ? Verdict::accept
                                                                              : Verdict::reject;
}

std::size_t nonreplicable_best_arm(std::span<const SampleSet> arm_samples) {
  if (arm_samples.empty()) throw DomainError("nonreplicable_best_arm: no arms");
  std::size_t best = 0;
  double top = arm_samples[0].mean();
  for (std::size_t a = 1; a < arm_samples.size(); ++a) {
    const double m = arm_samples[a].mean();
    if (m > top) {
      top = m;
      best = a;
    }
  }
  return best;
}

// --- boosting -----------------------------------------------------------------------

InputShape BoostPlan::shape() const {
  return concat(concat(replicable.shape, tester.shape), fallback.shape);
}

Output boost_success(const BoostPlan& plan, const Dataset& part1, const Dataset& part2,
                     const Dataset& part3, const SeedKey& key) {
  check_dataset(plan.replicable.shape, part1, false, "boost_success stage 1");
  check_dataset(plan.tester.shape, part2, false, "boost_success stage 2");
  check_dataset(plan.fallback.shape, part3, false, "boost_success stage 3");
  const Output u = plan.replicable.run(part1, key);
  if (plan.tester.test(u, part2, key.derive("tester")) == Verdict::accept) return u;
  return plan.fallback.run(part3, key.derive("fallback"));
}

BoostPlan boost_plan(const BoostComponents& c, double rho, double alpha, double beta) {
  require_open_unit(rho, "rho");
  require_open_unit(alpha, "alpha");
  require_open_unit(beta, "beta");
  return BoostPlan{c.replicable(rho / 4.0, alpha / 2.0, rho / 4.0),
                   c.tester(alpha / 2.0, std::min(rho, beta) / 4.0),
                   c.fallback(alpha, beta / 2.0)};
}

ReplicableAlgorithm make_boosted(const BoostPlan& plan) {
  ReplicableAlgorithm alg;
  alg.name = "boosted(" + plan.replicable.name + ")";
  alg.shape = plan.shape();
  alg.output_space = plan.replicable.output_space;
  const std::size_t n1 = plan.replicable.shape.parts.size();
  const std::size_t n2 = plan.tester.shape.parts.size();
  const std::size_t n3 = plan.fallback.shape.parts.size();
  alg.run = [plan, n1, n2, n3](const Dataset& data, const SeedKey& key) {
    return boost_success(plan, slice(data, 0, n1), slice(data, n1, n2), slice(data, n1 + n2, n3), key);
  };
  return alg;
}

BoostComponents sq_boost_components(double sq_C) {
  BoostComponents c;
  c.replicable = [sq_C](double rho, double alpha, double beta) {
    return make_sq_algorithm(SqEstimateConfig::make(rho, alpha, beta, sq_C));
  };
  c.tester = [](double alpha, double beta) {
    Tester t;
    t.name = "mean_tester";
    t.shape = single_part(mean_tester_budget(alpha, beta), Representation::counts);
    t.test = [alpha, beta](const Output& cand, const Dataset& data, const SeedKey&) {
      return mean_tester(cand.as_scalar(), data.at(0), alpha, beta);
    };
    return t;
  };
  c.fallback = [](double alpha, double beta) {
    auto alg = make_raw_mean_algorithm(ceil_size(std::log(2.0 / beta) / (2.0 * alpha * alpha)));
    alg.shape.representation = Representation::counts;
    alg.name = "empirical_mean";
    return alg;
  };
  return c;
}

BoostComponents heavy_hitters_boost_components(double nu, double eps, double hh_C) {
  require_hh(nu, eps, 0.5);
  BoostComponents c;
  c.replicable = [=](double rho, double, double beta) {
    return make_heavy_hitters_algorithm(nu - eps / 4.0, eps / 2.0, rho, beta, hh_C);
  };
  c.tester = [=](double, double beta) {
    const auto b = heavy_hitters_tester_budget(nu, eps, beta);
    Tester t;
    t.name = "heavy_hitters_tester";
    t.shape = InputShape{{{0, b.estimate_l}, {0, b.discovery}, {0, b.estimate_a}}, Representation::counts};
    t.test = [=](const Output& cand, const Dataset& data, const SeedKey& key) {
      return heavy_hitters_tester(cand.values(), data, nu, eps, beta, key);
    };
    return t;
  };
  c.fallback = [=](double, double beta) {
    const auto b = nonreplicable_heavy_hitters_budget(nu, eps, beta);
    ReplicableAlgorithm alg;
    alg.name = "nonreplicable_heavy_hitters";
    alg.shape = InputShape{{{0, b.discovery}, {0, b.estimate}}, Representation::counts};
    alg.output_space = OutputSpace::predicate([](const Output& y) {
      return std::is_sorted(y.values().begin(), y.values().end());
    });
    alg.run = [=](const Dataset& data, const SeedKey& key) {
      return Output::list(nonreplicable_heavy_hitters(data, nu, eps, beta, key));
    };
    return alg;
  };
  return c;
}

BoostComponents best_arm_boost_components(std::size_t arms, double bestarm_C, double lambda_scale) {
  if (arms == 0) throw DomainError("best arm: no arms");
  BoostComponents c;
  c.replicable = [=](double rho, double alpha, double beta) {
    return make_best_arm_algorithm(arms, alpha, rho, beta, bestarm_C, lambda_scale);
  };
  c.tester = [arms](double alpha, double beta) {
    Tester t;
    t.name = "best_arm_tester";
    t.shape = per_source_parts(arms, best_arm_tester_budget(arms, alpha, beta), Representation::counts);
    t.test = [alpha, beta](const Output& cand, const Dataset& data, const SeedKey&) {
      return best_arm_tester(static_cast<std::size_t>(cand.as_scalar()), data, alpha, beta);
    };
    return t;
  };
  c.fallback = [arms](double alpha, double beta) {
    // every mean within alpha/2 with probability 1 - beta
    const std::size_t n =
        ceil_size(2.0 * std::log(2.0 * static_cast<double>(arms) / beta) / (alpha * alpha));
    ReplicableAlgorithm alg;
    alg.name = "empirical_best_arm";
    alg.shape = per_source_parts(arms, n, Representation::counts);
    std::vector<Output> space;
    for (std::size_t a = 0; a < arms; ++a) space.push_back(Output::scalar(static_cast<double>(a)));
    alg.output_space = OutputSpace::of(std::move(space));
    alg.run = [](const Dataset& data, const SeedKey&) {
      return Output::scalar(static_cast<double>(nonreplicable_best_arm(data)));
    };
    return alg;
  };
  return c;
}

// --- invariance wrappers --------------------------------------------------------------

SufficientStatistic bernoulli_sum_statistic(std::size_t n) {
  if (n == 0) throw ParameterError("bernoulli_sum_statistic: n must be positive");
  SufficientStatistic s;
  s.name = "bernoulli_sum";
  s.f = [n](const SampleSet& samples) {
    if (samples.size() != n) throw ConfigError("bernoulli_sum_statistic: sample size differs from n");
    const std::uint64_t ones = samples.count(1.0);
    if (ones + samples.count(0.0) != samples.size()) {
      throw ConfigError("bernoulli_sum_statistic: samples are not bits");
    }
    return std::vector<double>{static_cast<double>(ones)};
  };
  s.resample = [n](const std::vector<double>& t, const SeedKey& key) {
    if (t.size() != 1 || t[0] < 0 || t[0] > static_cast<double>(n)) {
      throw ConfigError("bernoulli_sum_statistic: malformed statistic");
    }
    const auto ones = static_cast<std::size_t>(t[0]);
    const auto perm = random_permutation(key, n);
    std::vector<Element> items(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) items[i] = perm[i] < ones ? 1.0 : 0.0;
    return SampleSet::from_items(std::move(items));
  };
  return s;
}

SufficientStatistic multiset_statistic() {
  SufficientStatistic s;
  s.name = "multiset";
  s.f = [](const SampleSet& samples) {
    auto v = samples.materialize();
    std::sort(v.begin(), v.end());
    return v;
  };
  s.resample = [](const std::vector<double>& t, const SeedKey& key) {
    if (t.empty()) throw ConfigError("multiset_statistic: empty statistic");
    const auto perm = random_permutation(key, t.size());
    std::vector<Element> items(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) items[i] = t[perm[i]];
    return SampleSet::from_items(std::move(items));
  };
  return s;
}

Output suff_stat_wrap(const ReplicableAlgorithm& alg, const SufficientStatistic& stat,
                      const SampleSet& samples, const SeedKey& key) {
  const auto t = stat.f(samples);
  SampleSet fresh = stat.resample(t, key.derive("r'"));
  if (stat.f(fresh) != t) {
    throw ConfigError("suff_stat_wrap: resample of '" + stat.name + "' does not preserve the statistic");
  }
  return alg(Dataset{std::move(fresh)}, key.derive("r"));
}

Output order_invariant_wrap(const ReplicableAlgorithm& alg, const SampleSet& samples,
                            const SeedKey& key) {
  for (const auto& [x, c] : samples.histogram()) {
    if (std::isnan(x)) throw ConfigError("order_invariant_wrap: domain is not totally ordered");
  }
  return suff_stat_wrap(alg, multiset_statistic(), samples, key);
}

namespace {

std::vector<Element> checked_domain(std::span<const Element> domain) {
  if (domain.empty()) throw DomainError("label invariance: empty domain");
  std::vector<Element> sorted(domain.begin(), domain.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("label invariance: domain elements must be distinct");
  }
  return sorted;
}

std::size_t domain_index(std::span<const Element> domain, Element x) {
  const auto it = std::find(domain.begin(), domain.end(), x);
  if (it == domain.end()) throw DomainError("label invariance: sample element outside the domain");
  return static_cast<std::size_t>(it - domain.begin());
}

SampleSet relabel(const SampleSet& samples, std::span<const Element> domain,
                  std::span<const std::size_t> perm) {
  for (const auto& [x, c] : samples.histogram()) domain_index(domain, x);
  return samples.map([&](Element x) { return domain[perm[domain_index(domain, x)]]; });
}

std::size_t support_index(const std::vector<Output>& support, const Output& y) {
  const auto it = std::lower_bound(support.begin(), support.end(), y);
  if (it == support.end() || *it != y) {
    throw InternalError("output " + y.to_string() + " missing from the enumerated output space");
  }
  return static_cast<std::size_t>(it - support.begin());
}

}  // namespace

Output label_invariant_wrap(const ReplicableAlgorithm& alg, std::span<const Element> domain,
                            const SampleSet& samples, const SeedKey& key) {
  checked_domain(domain);
  const auto perm = random_permutation(key.derive("r'"), domain.size());
  return alg(Dataset{relabel(samples, domain, perm)}, key.derive("r"));
}

Output pointwise_label_invariant_wrap(
    const std::function<OutputDistribution(const SampleSet&)>& oracle, const SampleSet& samples,
    const SeedKey& key) {
  return correlated_sample(oracle(samples), key);
}

bool exact_label_oracle_feasible(const ReplicableAlgorithm& alg, std::size_t domain_size) {
  if (!alg.atoms || alg.atoms->count == 0) return false;
  std::size_t total = alg.atoms->count;
  for (std::size_t i = 2; i <= domain_size; ++i) {
    if (total > kExactOracleAtomLimit / i) return false;
    total *= i;
  }
  return total <= kExactOracleAtomLimit;
}

OutputDistribution label_invariant_output_distribution(const ReplicableAlgorithm& alg,
                                                       std::span<const Element> domain,
                                                       const SampleSet& samples,
                                                       const SeedKey& mc_key,
                                                       std::size_t inner_trials, bool* exact) {
  checked_domain(domain);
  if (!alg.output_space.enumerable()) {
    throw ConfigError("pointwise label invariance needs an enumerable output space");
  }
  const auto& support = alg.output_space.elements;
  std::vector<double> mass(support.size(), 0.0);
  double total = 0.0;

  if (exact_label_oracle_feasible(alg, domain.size())) {
    std::vector<std::size_t> perm(domain.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    do {
      const Dataset relabelled{relabel(samples, domain, perm)};
      for (std::size_t a = 0; a < alg.atoms->count; ++a) {
        mass[support_index(support, alg.atoms->run_atom(relabelled, a))] += 1.0;
        total += 1.0;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    if (exact) *exact = true;
  } else {
    if (inner_trials == 0) throw ParameterError("label oracle: inner_trials must be positive");
    for (std::size_t j = 0; j < inner_trials; ++j) {
      mass[support_index(support, label_invariant_wrap(alg, domain, samples, mc_key.split(j)))] += 1.0;
    }
    total = static_cast<double>(inner_trials);
    if (exact) *exact = false;
  }
  for (double& m : mass) m /= total;
  return OutputDistribution{support, std::move(mass)};
}

ReplicableAlgorithm make_suff_stat_wrapped(const ReplicableAlgorithm& alg, SufficientStatistic stat) {
  if (alg.shape.parts.size() != 1) throw ConfigError("wrappers need a single-part algorithm");
  ReplicableAlgorithm out = alg;
  out.name = "suff_stat[" + stat.name + "](" + alg.name + ")";
  out.atoms.reset();
  out.run = [alg, stat](const Dataset& data, const SeedKey& key) {
    return suff_stat_wrap(alg, stat, data.at(0), key);
  };
  return out;
}

ReplicableAlgorithm make_order_invariant(const ReplicableAlgorithm& alg) {
  if (alg.shape.parts.size() != 1) throw ConfigError("wrappers need a single-part algorithm");
  ReplicableAlgorithm out = alg;
  out.name = "order_invariant(" + alg.name + ")";
  out.atoms.reset();
  out.run = [alg](const Dataset& data, const SeedKey& key) {
    return order_invariant_wrap(alg, data.at(0), key);
  };
  return out;
}

ReplicableAlgorithm make_label_invariant(const ReplicableAlgorithm& alg, std::vector<Element> domain) {
  if (alg.shape.parts.size() != 1) throw ConfigError("wrappers need a single-part algorithm");
  checked_domain(domain);
  ReplicableAlgorithm out = alg;
  out.name = "label_invariant(" + alg.name + ")";
  out.atoms.reset();
  out.run = [alg, domain](const Dataset& data, const SeedKey& key) {
    return label_invariant_wrap(alg, domain, data.at(0), key);
  };
  return out;
}

ReplicableAlgorithm make_pointwise_label_invariant(const ReplicableAlgorithm& alg,
                                                   std::vector<Element> domain,
                                                   std::size_t inner_trials) {
  if (alg.shape.parts.size() != 1) throw ConfigError("wrappers need a single-part algorithm");
  checked_domain(domain);
  if (!alg.output_space.enumerable()) {
    throw ConfigError("pointwise label invariance needs an enumerable output space");
  }
  ReplicableAlgorithm out = alg;
  out.name = "pointwise_label_invariant(" + alg.name + ")";
  out.atoms.reset();
  out.run = [alg, domain, inner_trials](const Dataset& data, const SeedKey& key) {
    const SeedKey mc_key = key.derive("oracle");
    auto oracle = [&](const SampleSet& s) {
      return label_invariant_output_distribution(alg, domain, s, mc_key, inner_trials);
    };
    return pointwise_label_invariant_wrap(oracle, data.at(0), key);
  };
  return out;
}

}  // namespace replicalab
