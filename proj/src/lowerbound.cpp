#include "replicalab/lowerbound.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <map>

#include "replicalab/parallel.hpp"
#include "replicalab/replicable.hpp"

namespace replicalab {

void AdversaryDist::validate() const {
  if (!(tau > 0.0 && tau < 0.25)) throw ParameterError("adversary: tau must lie in (0, 1/4)");
}

double sample_theta(const AdversaryDist& adv, const SeedKey& key) {
  adv.validate();
  const double lo = 0.5 - adv.tau, hi = 0.5 + adv.tau;
  UniformStream s(key, 0);
  switch (s.below(3)) {
    case 0:
      return lo;
    case 1:
      return hi;
    default:
      for (;;) {
        const double theta = lo + 2.0 * adv.tau * s.uniform01();
        if (theta > lo && theta < hi) return theta;
      }
  }
}

AdaptiveAlgorithm canonical_sign_tester() {
  AdaptiveAlgorithm alg;
  alg.name = "sign_tester";
  alg.run = [](std::span<const Output>, const SampleSet& bits, const SeedKey& key) {
    return Output::scalar(replicable_sign_test(bits, key));
  };
  alg.run_on_count = [](std::span<const Output>, std::uint64_t ones, std::uint64_t m, const SeedKey&) {
    return Output::scalar(sign_rule(ones, m));
  };
  return alg;
}

AdaptiveAlgorithm history_free(const ReplicableAlgorithm& base) {
  if (base.shape.parts.size() != 1) throw ParameterError("history_free: algorithm must read one part");
  AdaptiveAlgorithm alg;
  alg.name = base.name;
  alg.representation = base.shape.representation;
  alg.run = [base](std::span<const Output>, const SampleSet& bits, const SeedKey& key) {
    return base.run(Dataset{bits}, key);
  };
  return alg;
}

bool GameTranscript::agree() const {
  return std::all_of(rounds.begin(), rounds.end(), [](const GameRound& r) { return r.agree_12; });
}

namespace {

void require_game(std::size_t k, std::size_t m) {
  if (k == 0 || m == 0) throw ParameterError("adaptive game: k and m must be at least 1");
}

// Round i reads its data from key.split(2i) (θ on lane 0, run r's bits on
// lane r) and hands the algorithm key.split(2i+1), shared by all runs.
Output play(const AdaptiveAlgorithm& alg, std::span<const Output> history, double theta,
            std::size_t m, const SeedKey& data_key, std::uint64_t lane, const SeedKey& alg_key) {
  if (alg.run_on_count) {
    // same draw as sample_counts(bernoulli(θ)): zeros first, ones take the rest
    UniformStream s(data_key, lane);
    const std::uint64_t ones = m - binomial(s, m, 1.0 - theta);
    return alg.run_on_count(history, ones, m, alg_key);
  }
  const SampleSet bits = alg.representation == Representation::counts
                             ? sample_counts(bernoulli(theta), m, data_key, lane)
                             : sample(bernoulli(theta), m, data_key, lane);
  return alg.run(history, bits, alg_key);
}

}  // namespace

GameTranscript run_adaptive_game(const AdaptiveAlgorithm& alg, std::size_t k, std::size_t m,
                                 const AdversaryDist& adv, const SeedKey& key) {
  require_game(k, m);
  adv.validate();
  GameTranscript t;
  t.k = k;
  t.m = m;
  std::vector<Output> h1, h2;
  for (std::size_t i = 0; i < k; ++i) {
    const SeedKey dk = key.split(2 * i), ak = key.split(2 * i + 1);
    GameRound r;
    r.theta = sample_theta(adv, dk);
    r.outputs[0] = play(alg, h1, r.theta, m, dk, 1, ak);
    r.outputs[1] = play(alg, h2, r.theta, m, dk, 2, ak);
    r.outputs[2] = play(alg, h2, r.theta, m, dk, 3, ak);
    r.agree_12 = r.outputs[0] == r.outputs[1];
    h1.push_back(r.outputs[0]);
    h2.push_back(r.outputs[1]);
    t.rounds.push_back(std::move(r));
  }
  return t;
}

bool game_disagrees(const AdaptiveAlgorithm& alg, std::size_t k, std::size_t m,
                    const AdversaryDist& adv, const SeedKey& key) {
  require_game(k, m);
  std::vector<Output> history;  // identical for both runs until they part
  for (std::size_t i = 0; i < k; ++i) {
    const SeedKey dk = key.split(2 * i), ak = key.split(2 * i + 1);
    const double theta = sample_theta(adv, dk);
    Output y1 = play(alg, history, theta, m, dk, 1, ak);
    if (y1 != play(alg, history, theta, m, dk, 2, ak)) return true;
    history.push_back(std::move(y1));
  }
  return false;
}

DivergenceEstimate measure_round_divergence(const AdaptiveAlgorithm& alg, std::size_t m,
                                            const AdversaryDist& adv, std::uint64_t trials,
                                            const SeedKey& key, const MeterOptions& opts) {
  if (trials < kMinDivergenceTrials) {
    throw ParameterError("measure_round_divergence: needs at least 1000 trials");
  }
  require_game(1, m);
  adv.validate();
  const auto tally = parallel_tally<1>(trials, opts.threads, [&](std::uint64_t t) {
    return std::array<std::uint64_t, 1>{game_disagrees(alg, 1, m, adv, key.split(t)) ? 1u : 0u};
  });
  DivergenceEstimate e;
  e.m = m;
  e.trials = trials;
  e.disagreements = tally[0];
  e.p_hat = static_cast<double>(tally[0]) / static_cast<double>(trials);
  e.ci = wilson_ci(tally[0], trials, opts.level);
  return e;
}

double sign_tester_divergence_m1(const AdversaryDist& adv) {
  adv.validate();
  auto divergence = [](double theta) {
    double plus = 0.0;
    for (std::uint64_t ones = 0; ones <= 1; ++ones) {
      if (sign_rule(ones, 1) == 1) plus += ones == 1 ? theta : 1.0 - theta;
    }
    return 2.0 * plus * (1.0 - plus);
  };
  const double lo = 0.5 - adv.tau, hi = 0.5 + adv.tau;
  const double window =
      boost::math::quadrature::gauss<double, 20>::integrate(divergence, lo, hi) / (hi - lo);
  return (divergence(lo) + divergence(hi) + window) / 3.0;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ParameterError("loglog_slope: length mismatch");
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && y[i] > 0.0)) throw DomainError("loglog_slope: values must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

namespace {

// Increasing integer grid with ratio `growth`: m_j = max(m_{j-1} + 1, ceil(growth^j)).
std::vector<std::size_t> geometric_grid(double growth, std::size_t ceiling) {
  std::vector<std::size_t> grid{1};
  for (int j = 1; grid.back() < ceiling; ++j) {
    const auto g = static_cast<std::size_t>(std::ceil(std::pow(growth, j) - 1e-9));
    grid.push_back(std::max(grid.back() + 1, g));
  }
  return grid;
}

void fit(ScalingTable& table) {
  std::vector<double> x, y;
  for (const auto& r : table.rows) {
    x.push_back(static_cast<double>(r.k));
    y.push_back(r.m_min);
  }
  table.exponent = loglog_slope(x, y);
}

}  // namespace

ScalingTable scaling_experiment(const AdaptiveAlgorithm& alg, std::span<const std::size_t> ks,
                                double rho_target, const AdversaryDist& adv, const SeedKey& key,
                                const ScalingOptions& options) {
  adv.validate();
  if (ks.empty()) throw ParameterError("scaling_experiment: ks is empty");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] == 0 || (i > 0 && ks[i] <= ks[i - 1])) {
      throw ParameterError("scaling_experiment: ks must be strictly ascending and >= 1");
    }
  }
  if (!(rho_target > 0.0 && rho_target < 1.0)) throw ParameterError("scaling_experiment: rho_target must lie in (0,1)");
  if (!(options.growth > 1.0)) throw ParameterError("scaling_experiment: growth must exceed 1");
  if (options.games < kMinDivergenceTrials) throw ParameterError("scaling_experiment: needs at least 1000 games per probe");
  if (options.chunk == 0) throw ParameterError("scaling_experiment: chunk must be positive");

  const std::vector<std::size_t> grid = geometric_grid(options.growth, options.m_ceiling);
  const auto allowed = static_cast<std::uint64_t>(std::floor(rho_target * static_cast<double>(options.games)));

  ScalingTable table;
  std::ptrdiff_t start = 0;
  for (std::size_t k : ks) {
    const SeedKey probe_key = key.derive("k", k);
    std::map<std::ptrdiff_t, std::uint64_t> seen;  // index -> disagreements (complete probes only)
    auto passes = [&](std::ptrdiff_t j) {
      if (auto it = seen.find(j); it != seen.end()) return it->second <= allowed;
      const std::size_t m = grid[static_cast<std::size_t>(j)];
      std::uint64_t bad = 0;
      for (std::uint64_t begin = 0; begin < options.games; begin += options.chunk) {
        const std::uint64_t len = std::min(options.chunk, options.games - begin);
        bad += parallel_tally<1>(len, options.meter.threads, [&](std::uint64_t t) {
          return std::array<std::uint64_t, 1>{game_disagrees(alg, k, m, adv, probe_key.split(begin + t)) ? 1u : 0u};
        })[0];
        if (bad > allowed) break;
      }
      seen[j] = bad;
      return bad <= allowed;
    };
    auto exhausted = [&] {
      fit(table);
      throw ScalingExhausted("scaling_experiment: no m up to " + std::to_string(options.m_ceiling) +
                                 " meets rho_target at k = " + std::to_string(k),
                             table);
    };

    const auto last = static_cast<std::ptrdiff_t>(grid.size()) - 1;
    std::ptrdiff_t lo = -1, hi = std::min(start, last);  // lo fails (or -1), hi passes
    if (passes(hi)) {
      for (std::ptrdiff_t step = 1; hi > 0;) {
        const std::ptrdiff_t j = std::max<std::ptrdiff_t>(hi - step, 0);
        if (!passes(j)) {
          lo = j;
          break;
        }
        hi = j;
        step *= 2;
      }
    } else {
      lo = hi;
      for (std::ptrdiff_t step = 1;;) {
        if (lo == last) exhausted();
        const std::ptrdiff_t j = std::min(lo + step, last);
        if (passes(j)) {
          hi = j;
          break;
        }
        lo = j;
        step *= 2;
      }
    }
    while (hi - lo > 1) {
      const std::ptrdiff_t mid = lo + (hi - lo) / 2;
      (passes(mid) ? hi : lo) = mid;
    }

    ScalingRow row;
    row.k = k;
    row.m_pass = grid[static_cast<std::size_t>(hi)];
    row.m_fail = lo >= 0 ? grid[static_cast<std::size_t>(lo)] : 0;
    row.m_min = row.m_fail > 0 ? std::sqrt(static_cast<double>(row.m_fail) * static_cast<double>(row.m_pass))
                               : static_cast<double>(row.m_pass);
    row.rho_at_pass = static_cast<double>(seen.at(hi)) / static_cast<double>(options.games);
    table.rows.push_back(row);
    start = hi;
  }
  fit(table);
  return table;
}

double NaiveTightness::independent_prediction() const {
  return 1.0 - std::pow(1.0 - per_coord, static_cast<double>(k));
}

NaiveTightness naive_tightness_experiment(std::size_t k, const ReplicableAlgorithm& per_coord_alg,
                                          std::uint64_t trials, const SeedKey& key,
                                          const DiscreteDistribution& source, const MeterOptions& opts) {
  if (k == 0) throw ParameterError("naive_tightness: k must be at least 1");
  if (trials < kMinDivergenceTrials) throw ParameterError("naive_tightness: needs at least 1000 trials");
  validate_discrete(source);
  const Population population = population_of(source);

  const auto tally = parallel_tally<2>(trials, opts.threads, [&](std::uint64_t t) {
    const SeedKey tk = key.derive("trial", t);
    std::uint64_t coord = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const SeedKey cj = tk.split(j);
      const SeedKey r = cj.split(0);
      const Output y1 = per_coord_alg(draw_dataset(population, per_coord_alg.shape, cj.split(1)), r);
      const Output y2 = per_coord_alg(draw_dataset(population, per_coord_alg.shape, cj.split(2)), r);
      if (y1 != y2) ++coord;
    }
    return std::array<std::uint64_t, 2>{coord, coord > 0 ? 1u : 0u};
  });

  NaiveTightness out;
  out.k = k;
  out.trials = trials;
  const std::uint64_t runs = trials * k;
  out.per_coord = static_cast<double>(tally[0]) / static_cast<double>(runs);
  out.joint = static_cast<double>(tally[1]) / static_cast<double>(trials);
  out.bound = std::min(static_cast<double>(k) * out.per_coord, 1.0) / 2.0;
  out.per_coord_ci = wilson_ci(tally[0], runs, opts.level);
  out.joint_ci = wilson_ci(tally[1], trials, opts.level);
  return out;
}

}  // namespace replicalab
