#include "replicalab/meter.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "replicalab/parallel.hpp"

namespace replicalab {

Interval wilson_ci(std::uint64_t successes, std::uint64_t trials, double level) {
  if (trials == 0) throw ParameterError("wilson_ci: trials must be at least 1");
  if (successes > trials) throw ParameterError("wilson_ci: successes exceed trials");
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("wilson_ci: level must lie in (0,1)");
  const double z = boost::math::quantile(boost::math::normal(), 1.0 - (1.0 - level) / 2.0);
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
  Interval ci{std::max(0.0, centre - half), std::min(1.0, centre + half)};
  // the closed form lands on the boundary only up to round-off
  if (successes == 0) ci.lo = 0.0;
  if (successes == trials) ci.hi = 1.0;
  ci.lo = std::min(ci.lo, p);
  ci.hi = std::max(ci.hi, p);
  return ci;
}

TrialReport TrialReport::from_counts(std::uint64_t trials, std::uint64_t disagreements,
                                     std::uint64_t failures, double level) {
  TrialReport r;
  r.trials = trials;
  r.disagreements = disagreements;
  r.failures = failures;
  r.level = level;
  r.rho_hat = static_cast<double>(disagreements) / static_cast<double>(trials);
  r.beta_hat = static_cast<double>(failures) / static_cast<double>(trials);
  r.rho_ci = wilson_ci(disagreements, trials, level);
  r.beta_ci = wilson_ci(failures, trials, level);
  return r;
}

bool within_tolerance(double point, const Interval& ci, double target, double k) {
  return point <= target + k * ci.half_width();
}

namespace {

void require_trials(std::uint64_t trials) {
  if (trials < kMinMeterTrials) {
    throw ParameterError("meter: at least " + std::to_string(kMinMeterTrials) + " trials required");
  }
}

}  // namespace

TrialReport estimate_replicability(const ReplicableAlgorithm& alg, const Population& population,
                                   std::uint64_t trials, const SeedKey& key,
                                   const MeterOptions& opts,
                                   const std::optional<ValidityCheck>& check) {
  require_trials(trials);
  const auto tally = parallel_tally<2>(trials, opts.threads, [&](std::uint64_t t) {
    const SeedKey tk = key.derive("trial", t);
    const SeedKey r = tk.derive("r");
    const Output y1 = alg(draw_dataset(population, alg.shape, tk.derive("S", 1)), r);
    const Output y2 = alg(draw_dataset(population, alg.shape, tk.derive("S", 2)), r);
    const std::uint64_t failed = check && !is_valid(check->problem, check->truth, y1) ? 1 : 0;
    return std::array<std::uint64_t, 2>{y1 != y2 ? 1u : 0u, failed};
  });
  return TrialReport::from_counts(trials, tally[0], tally[1], opts.level);
}

TrialReport estimate_failure(const ReplicableAlgorithm& alg, const StatProblem& problem,
                             const GroundTruth& truth, const Population& population,
                             std::uint64_t trials, const SeedKey& key, const MeterOptions& opts) {
  require_trials(trials);
  const auto tally = parallel_tally<1>(trials, opts.threads, [&](std::uint64_t t) {
    const SeedKey tk = key.derive("trial", t);
    const Output y = alg(draw_dataset(population, alg.shape, tk.derive("S", 1)), tk.derive("r"));
    return std::array<std::uint64_t, 1>{is_valid(problem, truth, y) ? 0u : 1u};
  });
  return TrialReport::from_counts(trials, 0, tally[0], opts.level);
}

CoordinateReport estimate_coordinatewise(const ReplicableAlgorithm& alg, const Population& population,
                                         const std::vector<double>& means, double alpha,
                                         std::uint64_t trials, const SeedKey& key,
                                         const MeterOptions& opts) {
  require_trials(trials);
  if (means.empty()) throw ParameterError("estimate_coordinatewise: no coordinates");
  const std::size_t k = means.size();
  // slots: disagreements, joint failures, then one per coordinate
  const auto tally = parallel_tally_n(trials, k + 2, opts.threads, [&](std::uint64_t t) {
    const SeedKey tk = key.derive("trial", t);
    const SeedKey r = tk.derive("r");
    const Output y1 = alg(draw_dataset(population, alg.shape, tk.derive("S", 1)), r);
    const Output y2 = alg(draw_dataset(population, alg.shape, tk.derive("S", 2)), r);
    const std::vector<Output> parts = y1.components();
    if (parts.size() != k) throw DomainError("estimate_coordinatewise: output has the wrong arity");
    std::vector<std::uint64_t> row(k + 2, 0);
    row[0] = y1 != y2 ? 1 : 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (std::abs(parts[i].as_scalar() - means[i]) > alpha) row[2 + i] = row[1] = 1;
    }
    return row;
  });
  CoordinateReport out;
  out.joint = TrialReport::from_counts(trials, tally[0], tally[1], opts.level);
  for (std::size_t i = 0; i < k; ++i) {
    out.invalid.push_back(tally[2 + i]);
    out.validity_rate.push_back(1.0 - static_cast<double>(tally[2 + i]) / static_cast<double>(trials));
    out.validity_ci.push_back(wilson_ci(trials - tally[2 + i], trials, opts.level));
  }
  return out;
}

std::string trial_report_csv_header() {
  return "experiment,trials,disagreements,failures,rho_hat,rho_lo,rho_hi,beta_hat,beta_lo,beta_hi";
}

std::string csv_row(const std::string& experiment, const TrialReport& r) {
  std::ostringstream os;
  os << std::setprecision(10) << experiment << ',' << r.trials << ',' << r.disagreements << ','
     << r.failures << ',' << r.rho_hat << ',' << r.rho_ci.lo << ',' << r.rho_ci.hi << ','
     << r.beta_hat << ',' << r.beta_ci.lo << ',' << r.beta_ci.hi;
  return os.str();
}

}  // namespace replicalab
