#include "replicalab/composition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "replicalab/correlated_sampling.hpp"

namespace replicalab {

namespace {

void require_open_unit(double x, const char* what) {
  if (!(x > 0.0 && x < 1.0)) throw ParameterError(std::string(what) + " must lie in (0,1)");
}

void require_same_shape(std::span<const ReplicableAlgorithm> algs, const char* who) {
  if (algs.empty()) throw ParameterError(std::string(who) + ": no algorithms");
  for (const auto& a : algs) {
    if (a.shape != algs.front().shape) {
      throw ParameterError(std::string(who) + ": algorithms read different input shapes (" +
                           algs.front().name + " vs " + a.name + ")");
    }
  }
}

std::size_t support_index(const std::vector<Output>& support, const Output& y) {
  const auto it = std::lower_bound(support.begin(), support.end(), y);
  if (it == support.end() || *it != y) {
    throw InternalError("output " + y.to_string() + " missing from the enumerated output space");
  }
  return static_cast<std::size_t>(it - support.begin());
}

struct Schedule {
  std::vector<double> eps;
  std::vector<double> delta;
  double delta_prime = 0.0;
  double log_term = 0.0;
};

// the per-algorithm eps/delta schedule; well defined for any k >= 1
Schedule theorem1_schedule(std::span<const double> n_list, double rho, double beta0, double c) {
  require_open_unit(rho, "rho");
  require_open_unit(beta0, "beta0");
  require_open_unit(c, "c");
  const auto k = static_cast<double>(n_list.size());
  double total = 0.0;
  for (double n : n_list) {
    if (!(n >= 1.0)) throw ParameterError("every sample size n_i must be at least 1");
    total += n;
  }
  Schedule s;
  s.log_term = std::log(k / (rho * beta0));
  double sum10 = 0.0;
  for (double n : n_list) {
    const double e = c * rho * std::sqrt((n / total + 1.0 / k) / s.log_term);
    s.eps.push_back(e);
    s.delta.push_back(beta0 * std::pow(e, 10));
    sum10 += std::pow(e, 10);
  }
  s.delta_prime = beta0 * sum10 / k;
  return s;
}

}  // namespace

// --- naive composition -----------------------------------------------------------

Output naive_compose(std::span<const ReplicableAlgorithm> algs, const Dataset& data,
                     const SeedKey& key) {
  require_same_shape(algs, "naive_compose");
  std::vector<Output> outs;
  outs.reserve(algs.size());
  for (std::size_t i = 0; i < algs.size(); ++i) outs.push_back(algs[i](data, key.derive("alg", i)));
  return Output::tuple(outs);
}

ReplicableAlgorithm make_naive_composition(std::vector<ReplicableAlgorithm> algs) {
  require_same_shape(algs, "naive_compose");
  ReplicableAlgorithm out;
  out.name = "naive_compose";
  out.shape = algs.front().shape;
  out.output_space = OutputSpace::predicate([k = algs.size()](const Output& y) {
    try {
      return y.components().size() == k;
    } catch (const DomainError&) {
      return false;
    }
  });
  out.run = [algs](const Dataset& data, const SeedKey& key) { return naive_compose(algs, data, key); };
  return out;
}

// --- simplified bound ----------------------------------------------------------------

bool pg_simple_preconditions_hold(std::span<const double> eps, std::span<const double> delta,
                                  double delta_prime, const PgConstants& c) {
  if (eps.empty() || eps.size() != delta.size()) return false;
  if (!(delta_prime > 0.0 && delta_prime < c.c3)) return false;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0 && eps[i] <= c.c1)) return false;
    if (!(delta[i] >= 0.0 && delta[i] <= c.c1 * eps[i] * eps[i])) return false;
  }
  return true;
}

SimpleComposition pg_compose_simple(std::span<const double> eps, std::span<const double> delta,
                                    double delta_prime, const PgConstants& c, bool enforce) {
  if (eps.empty()) throw ParameterError("pg_compose_simple: no algorithms");
  if (eps.size() != delta.size()) throw ParameterError("pg_compose_simple: eps and delta differ in length");
  if (!(delta_prime > 0.0 && delta_prime < 1.0)) throw ParameterError("pg_compose_simple: delta' must lie in (0,1)");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0.0)) throw ParameterError("pg_compose_simple: every eps_i must be positive");
    if (!(delta[i] >= 0.0)) throw ParameterError("pg_compose_simple: every delta_i must be non-negative");
  }
  if (enforce) {
    if (!(delta_prime < c.c3)) {
      throw ParameterError("pg_compose_simple: delta' must be below c3 = " + std::to_string(c.c3));
    }
    for (std::size_t i = 0; i < eps.size(); ++i) {
      if (eps[i] > c.c1) {
        throw ParameterError("pg_compose_simple: eps_" + std::to_string(i) + " exceeds c1 = " + std::to_string(c.c1));
      }
      if (delta[i] > c.c1 * eps[i] * eps[i]) {
        throw ParameterError("pg_compose_simple: delta_" + std::to_string(i) + "/eps_" + std::to_string(i) +
                             "^2 exceeds c1 = " + std::to_string(c.c1));
      }
    }
  }
  double sum_sq = 0.0, ratio = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    sum_sq += eps[i] * eps[i];
    ratio += delta[i] / eps[i];
  }
  SimpleComposition out;
  out.eps_star = c.c2 * (std::sqrt(std::log(1.0 / delta_prime) * sum_sq) + sum_sq);
  const double k = static_cast<double>(eps.size());
  out.delta_star = c.c4 * std::sqrt((k * delta_prime + ratio) / out.eps_star);
  return out;
}

CompositionParams theorem1_params(std::span<const double> n_list, double rho, double beta0, double c,
                                  const PgConstants& constants) {
  if (n_list.size() < 2) throw ParameterError("theorem1_params: needs k >= 2 algorithms");
  const Schedule s = theorem1_schedule(n_list, rho, beta0, c);
  CompositionParams p;
  p.eps_i = s.eps;
  p.delta_i = s.delta;
  p.delta_prime = s.delta_prime;
  for (double e : s.eps) p.sum_eps_sq += e * e;
  const auto simple = pg_compose_simple(s.eps, s.delta, s.delta_prime, constants, false);
  p.eps_star = simple.eps_star;
  p.delta_star = simple.delta_star;
  p.gamma_star = simple.delta_star;
  p.preconditions_hold = pg_simple_preconditions_hold(s.eps, s.delta, s.delta_prime, constants);
  const double total = std::accumulate(n_list.begin(), n_list.end(), 0.0);
  p.n_bound = total / (rho * rho) * std::pow(s.log_term, 3);
  p.beta_bound = static_cast<double>(n_list.size()) * std::sqrt(beta0) * s.log_term;
  return p;
}

// --- heterogeneous recurrences ------------------------------------------------------

HeterogeneousComposition pg_compose_het_params(std::span<const double> eps,
                                               std::span<const double> delta,
                                               std::span<const double> gamma, double delta_prime) {
  const std::size_t k = eps.size();
  if (k == 0) throw ParameterError("pg_compose_het_params: no algorithms");
  if (delta.size() != k || gamma.size() != k) {
    throw ParameterError("pg_compose_het_params: eps, delta and gamma differ in length");
  }
  if (!(delta_prime > 0.0 && delta_prime < 0.5)) {
    throw ParameterError("pg_compose_het_params: delta' must lie in (0, 1/2)");
  }
  for (std::size_t l = 0; l < k; ++l) {
    const std::string at = " (index " + std::to_string(l) + ")";
    if (!(eps[l] > 0.0 && eps[l] <= 1.0)) throw ParameterError("pg_compose_het_params: eps must lie in (0,1]" + at);
    if (!(delta[l] > 0.0 && delta[l] <= eps[l] / 50.0)) {
      throw ParameterError("pg_compose_het_params: delta must lie in (0, eps/50]" + at);
    }
    if (!(gamma[l] > 0.0 && gamma[l] < 1.0)) throw ParameterError("pg_compose_het_params: gamma must lie in (0,1)" + at);
  }

  HeterogeneousComposition h;
  const double log_term = std::log(1.0 / delta_prime);
  double sum_sq = 0.0, drift = 0.0, sum_hat = 0.0, sum_gamma = 0.0;
  double eps_prev = 0.0;
  for (std::size_t l = 0; l < k; ++l) {
    const double e = eps[l], d = delta[l];
    const double d_hat = 2.0 * d / -std::expm1(-e);
    const double inner = 2.0 * std::exp(2.0 * e) / std::expm1(e) + 1.0;
    const double psi = d * (2.0 * std::exp(e) + 1.0) + 2.0 * d * d * inner * inner;
    // e^{2ε}/(1−δ̂) − 1 written to keep precision for small ε and δ̂
    const double excess = (std::expm1(2.0 * e) + d_hat) / (1.0 - d_hat);
    h.delta_hat.push_back(d_hat);
    h.psi.push_back(psi);

    sum_sq += e * e;
    drift += psi + 2.0 * e * excess;
    sum_hat += d_hat;
    sum_gamma += std::exp(eps_prev) * gamma[l];
    const double eps_j = 2.0 * std::sqrt(2.0 * log_term * sum_sq) + drift;
    h.eps_j.push_back(eps_j);
    h.delta_j.push_back(static_cast<double>(l + 1) * delta_prime + sum_hat + sum_gamma);
    eps_prev = eps_j;
  }
  h.eps_k = h.eps_j.back();
  h.delta_k = h.delta_j.back();
  h.eps_star = 3.0 * h.eps_k;
  h.delta_star = 5.0 * std::sqrt(h.delta_k / std::min(h.eps_k, 1.0));
  h.gamma_star = h.delta_star;
  return h;
}

// --- PG surrogate -----------------------------------------------------------------------

PgSurrogate::PgSurrogate(ReplicableAlgorithm base, double eps, double delta, std::size_t m_runs)
    : base_(std::move(base)), eps_(eps), delta_(delta), m_runs_(m_runs) {
  if (!base_.output_space.enumerable()) {
    throw ConfigError("replicability_to_pg: " + base_.name + " has no enumerated output space");
  }
  if (m_runs_ < 2) throw ParameterError("replicability_to_pg: m_runs must be at least 2");
  if (!(eps_ > 0.0)) throw ParameterError("replicability_to_pg: eps must be positive");
  if (!(delta_ >= 0.0 && delta_ < 1.0)) throw ParameterError("replicability_to_pg: delta must lie in [0,1)");
}

InputShape PgSurrogate::shape() const {
  InputShape out{{}, base_.shape.representation};
  for (std::size_t c = 0; c < m_runs_; ++c) {
    out.parts.insert(out.parts.end(), base_.shape.parts.begin(), base_.shape.parts.end());
  }
  return out;
}

std::vector<Dataset> PgSurrogate::chunks(const Dataset& data) const {
  const std::size_t per = base_.shape.parts.size();
  if (data.size() < per * m_runs_) {
    throw ParameterError("replicability_to_pg: " + std::to_string(data.size()) +
                         " sample parts cannot be split into " + std::to_string(m_runs_) + " chunks of " +
                         std::to_string(per));
  }
  std::vector<Dataset> out(m_runs_);
  for (std::size_t c = 0; c < m_runs_; ++c) {
    out[c].assign(data.begin() + static_cast<std::ptrdiff_t>(c * per),
                  data.begin() + static_cast<std::ptrdiff_t>((c + 1) * per));
    check_dataset(base_.shape, out[c], false, "replicability_to_pg chunk");
  }
  return out;
}

std::vector<double> PgSurrogate::mechanism(const std::vector<Dataset>& parts, const SeedKey& r) const {
  const auto& space = support();
  std::vector<double> tally(space.size(), 0.0);
  for (const auto& chunk : parts) tally[support_index(space, base_.run(chunk, r))] += 1.0;
  const double top = *std::max_element(tally.begin(), tally.end());
  double total = 0.0;
  for (double& t : tally) total += (t = std::exp(eps_ * (t - top) / 2.0));
  for (double& t : tally) t /= total;
  return tally;
}

Output PgSurrogate::run(const Dataset& data, const SeedKey& key) const {
  const auto probs = mechanism(chunks(data), key.derive("r"));
  const double u = uniform01(key.derive("mech"), 0);
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return support()[i];
  }
  // round-off: fall back to the last atom with positive mass
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return support()[i];
  }
  throw InternalError("exponential mechanism produced no mass");
}

OutputDistribution PgSurrogate::distribution(const Dataset& data, const SeedKey& inner_key,
                                             std::size_t inner_trials) const {
  if (inner_trials == 0) throw ParameterError("pipeline.inner_trials must be positive");
  const auto parts = chunks(data);
  std::vector<double> mass(support().size(), 0.0);
  for (std::size_t j = 0; j < inner_trials; ++j) {
    const auto p = mechanism(parts, inner_key.split(j));
    for (std::size_t i = 0; i < mass.size(); ++i) mass[i] += p[i];
  }
  double total = 0.0;
  for (double m : mass) total += m;
  for (double& m : mass) m /= total;
  return OutputDistribution{support(), std::move(mass)};
}

ReplicableAlgorithm PgSurrogate::as_algorithm() const {
  ReplicableAlgorithm alg;
  alg.name = "pg(" + base_.name + ")";
  alg.shape = shape();
  alg.output_space = base_.output_space;
  alg.run = [self = *this](const Dataset& data, const SeedKey& key) { return self.run(data, key); };
  return alg;
}

PgSurrogate replicability_to_pg(const ReplicableAlgorithm& alg, double eps, double delta,
                                std::size_t m_runs) {
  return PgSurrogate(alg, eps, delta, m_runs);
}

Output pg_to_replicable(const std::function<OutputDistribution(const Dataset&)>& oracle,
                        const Dataset& data, const SeedKey& key) {
  return correlated_sample(oracle(data), key);
}

// --- pipeline -------------------------------------------------------------------------------

ComposePipeline::ComposePipeline(std::vector<ReplicableAlgorithm> algs, double rho, double beta0,
                                 PipelineOptions options)
    : algs_(std::move(algs)), options_(options) {
  require_same_shape(algs_, "compose_pipeline");
  std::vector<double> n_list;
  for (const auto& a : algs_) {
    if (!a.output_space.enumerable()) {
      throw ConfigError("compose_pipeline: " + a.name + " has no enumerated output space");
    }
    n_list.push_back(static_cast<double>(a.sample_complexity()));
  }
  std::size_t atoms = 1;
  for (const auto& a : algs_) {
    const std::size_t m = a.output_space.elements.size();
    if (atoms > options_.max_atoms / m) {
      throw ScaleError("compose_pipeline: joint output space exceeds " + std::to_string(options_.max_atoms) +
                       " atoms; use naive_compose for large output spaces");
    }
    atoms *= m;
  }
  const Schedule s = theorem1_schedule(n_list, rho, beta0, options_.c);
  eps_ = s.eps;
  delta_ = s.delta;
  beta_bound_ = static_cast<double>(algs_.size()) * std::sqrt(beta0) * s.log_term;
  for (std::size_t i = 0; i < algs_.size(); ++i) {
    surrogates_.push_back(replicability_to_pg(algs_[i], eps_[i], delta_[i], options_.m_runs));
  }

  // lexicographic product of the component supports
  std::vector<std::size_t> digit(algs_.size(), 0);
  support_.reserve(atoms);
  for (std::size_t a = 0; a < atoms; ++a) {
    std::vector<Output> parts;
    for (std::size_t i = 0; i < algs_.size(); ++i) parts.push_back(algs_[i].output_space.elements[digit[i]]);
    support_.push_back(Output::tuple(parts));
    for (std::size_t i = algs_.size(); i-- > 0;) {
      if (++digit[i] < algs_[i].output_space.elements.size()) break;
      digit[i] = 0;
    }
  }
}

double ComposePipeline::estimation_error() const {
  return 0.5 / std::sqrt(static_cast<double>(options_.inner_trials));
}

InputShape ComposePipeline::shape() const { return surrogates_.front().shape(); }

OutputDistribution ComposePipeline::joint_distribution(const Dataset& data, const SeedKey& key) const {
  std::vector<std::vector<double>> marginals;
  for (std::size_t i = 0; i < surrogates_.size(); ++i) {
    marginals.push_back(
        surrogates_[i].distribution(data, key.derive("alg", i), options_.inner_trials).probs);
  }
  std::vector<double> joint(support_.size(), 1.0);
  std::vector<std::size_t> digit(marginals.size(), 0);
  for (std::size_t a = 0; a < joint.size(); ++a) {
    for (std::size_t i = 0; i < marginals.size(); ++i) joint[a] *= marginals[i][digit[i]];
    for (std::size_t i = marginals.size(); i-- > 0;) {
      if (++digit[i] < marginals[i].size()) break;
      digit[i] = 0;
    }
  }
  // renormalise away the product's round-off
  const double total = std::accumulate(joint.begin(), joint.end(), 0.0);
  for (double& p : joint) p /= total;
  return OutputDistribution{support_, std::move(joint)};
}

Output ComposePipeline::run(const Dataset& data, const SeedKey& key) const {
  check_dataset(shape(), data, false, "compose_pipeline");
  return pg_to_replicable([&](const Dataset& d) { return joint_distribution(d, key); }, data,
                          key.derive("cs"));
}

ReplicableAlgorithm ComposePipeline::as_algorithm() const {
  ReplicableAlgorithm alg;
  alg.name = "compose_pipeline";
  alg.shape = shape();
  alg.output_space = OutputSpace::of(support_);
  alg.run = [self = *this](const Dataset& data, const SeedKey& key) { return self.run(data, key); };
  return alg;
}

Output compose_pipeline(const std::vector<ReplicableAlgorithm>& algs, double rho, double beta0,
                        const Dataset& data, const SeedKey& key, const PipelineOptions& options) {
  return ComposePipeline(algs, rho, beta0, options).run(data, key);
}

}  // namespace replicalab
