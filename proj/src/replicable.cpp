#include "replicalab/replicable.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "replicalab/correlated_sampling.hpp"

namespace replicalab {

namespace {

void require_unit(double x, const char* what) {
  if (!(x > 0.0 && x < 1.0)) throw ParameterError(std::string(what) + " must lie in (0,1)");
}

void require_unit_interval_values(const SampleSet& s, const char* who) {
  const auto& h = s.histogram();
  if (!h.empty() && (h.front().first < 0.0 || h.back().first > 1.0)) {
    throw DomainError(std::string(who) + ": sample values must lie in [0,1]");
  }
}

std::size_t ceil_to_size(double x) {
  if (!std::isfinite(x) || x > 1e15) throw ScaleError("sample budget overflows");
  return static_cast<std::size_t>(std::ceil(x));
}

}  // namespace

// --- statistical queries ----------------------------------------------------

std::size_t sq_sample_budget(double rho, double alpha, double beta, double C) {
  require_unit(rho, "rho");
  require_unit(alpha, "alpha");
  require_unit(beta, "beta");
  if (!(C > 0.0)) throw ParameterError("sq.C must be positive");
  return ceil_to_size(C * std::log(1.0 / std::min(rho, beta)) / (alpha * alpha * rho * rho));
}

SqEstimateConfig SqEstimateConfig::make(double rho, double alpha, double beta, double C) {
  return SqEstimateConfig{rho, alpha, beta, alpha, sq_sample_budget(rho, alpha, beta, C)};
}

void SqEstimateConfig::validate() const {
  require_unit(rho, "rho");
  require_unit(alpha, "alpha");
  require_unit(beta, "beta");
  if (spacing != alpha) throw ParameterError("SQ grid spacing must equal alpha");
  if (n == 0) throw ParameterError("SQ sample budget must be positive");
}

double round_to_offset_grid(double mean, double spacing, double offset) {
  const double j = std::floor((mean - offset) / spacing + 0.5);
  return std::clamp(offset + j * spacing, 0.0, 1.0);
}

double sq_offset(const SeedKey& key, double spacing) { return spacing * uniform01(key, 0); }

double replicable_sq_estimate(const SampleSet& samples, const SqEstimateConfig& cfg,
                              const SeedKey& key) {
  cfg.validate();
  if (samples.size() != cfg.n) {
    throw ParameterError("replicable_sq_estimate: expected " + std::to_string(cfg.n) +
                         " samples, got " + std::to_string(samples.size()));
  }
  require_unit_interval_values(samples, "replicable_sq_estimate");
  return round_to_offset_grid(samples.mean(), cfg.spacing, sq_offset(key, cfg.spacing));
}

// --- sign test ---------------------------------------------------------------

int sign_rule(std::uint64_t ones, std::uint64_t m) { return 2 * ones >= m ? 1 : -1; }

int replicable_sign_test(const SampleSet& samples, const SeedKey&) {
  if (samples.empty()) throw ParameterError("replicable_sign_test: needs at least one sample");
  return sign_rule(samples.count(1.0), samples.size());
}

// --- heavy hitters -------------------------------------------------------------

namespace {

void require_hh_params(double nu, double eps) {
  if (!(nu > 0.0 && nu <= 1.0)) throw ParameterError("heavy hitters: nu must lie in (0,1]");
  if (!(eps > 0.0 && eps <= nu / 2.0)) throw ParameterError("heavy hitters: need 0 < eps <= nu/2");
}

}  // namespace

std::size_t heavy_hitters_sample_budget(double nu, double eps, double rho, double beta, double C) {
  require_hh_params(nu, eps);
  require_unit(rho, "rho");
  require_unit(beta, "beta");
  if (!(C > 0.0)) throw ParameterError("hh.C must be positive");
  return ceil_to_size(C * std::log(1.0 / std::min(rho, beta)) / (nu * eps * eps * rho * rho));
}

std::vector<Element> replicable_heavy_hitters(const SampleSet& samples, double nu, double eps,
                                              double rho, double beta, const SeedKey& key) {
  require_hh_params(nu, eps);
  require_unit(rho, "rho");
  require_unit(beta, "beta");
  if (samples.empty()) throw ParameterError("replicable_heavy_hitters: no samples");
  const double v = (nu - eps / 2.0) + (eps / 2.0) * uniform01(key, 0);
  const double n = static_cast<double>(samples.size());
  std::vector<Element> out;
  for (const auto& [x, c] : samples.histogram()) {
    if (static_cast<double>(c) >= v * n) out.push_back(x);
  }
  return out;
}

// --- best arm ----------------------------------------------------------------

std::size_t best_arm_sample_budget(std::size_t arms, double alpha, double rho, double beta,
                                   double C) {
  if (arms == 0) throw DomainError("best arm: no arms");
  require_unit(alpha, "alpha");
  require_unit(rho, "rho");
  require_unit(beta, "beta");
  if (!(C > 0.0)) throw ParameterError("bestarm.C must be positive");
  const double l = std::log(static_cast<double>(std::max<std::size_t>(arms, 2)) / std::min(rho, beta));
  return ceil_to_size(C * l * l * l / (alpha * alpha * rho * rho));
}

std::vector<double> best_arm_gibbs(std::span<const SampleSet> arm_samples, double alpha,
                                   double rho, double lambda_scale) {
  if (arm_samples.empty()) throw DomainError("best arm: no arms");
  require_unit(alpha, "alpha");
  require_unit(rho, "rho");
  if (!(lambda_scale > 0.0)) throw ParameterError("bestarm.lambda_scale must be positive");
  const double arms = static_cast<double>(arm_samples.size());
  const double lambda = lambda_scale * (2.0 / alpha) * std::log(std::max(arms, 2.0) / rho);

  std::vector<double> mu(arm_samples.size());
  for (std::size_t a = 0; a < mu.size(); ++a) mu[a] = arm_samples[a].mean();
  const double top = *std::max_element(mu.begin(), mu.end());
  std::vector<double> w(mu.size());
  double total = 0.0;
  for (std::size_t a = 0; a < mu.size(); ++a) total += (w[a] = std::exp(lambda * (mu[a] - top)));
  for (double& x : w) x /= total;
  return w;
}

std::size_t replicable_best_arm(std::span<const SampleSet> arm_samples, double alpha, double rho,
                                double beta, const SeedKey& key, double lambda_scale) {
  require_unit(beta, "beta");
  const auto p = best_arm_gibbs(arm_samples, alpha, rho, lambda_scale);
  return correlated_sample_index(p, key);
}

// --- packaged algorithms --------------------------------------------------------

ReplicableAlgorithm make_sq_algorithm(const SqEstimateConfig& cfg, Representation rep) {
  cfg.validate();
  ReplicableAlgorithm alg;
  alg.name = "sq_estimate";
  alg.shape = single_part(cfg.n, rep);
  alg.output_space = OutputSpace::predicate([](const Output& y) {
    return y.size() == 1 && y.as_scalar() >= 0.0 && y.as_scalar() <= 1.0;
  });
  alg.run = [cfg](const Dataset& data, const SeedKey& key) {
    return Output::scalar(replicable_sq_estimate(data.at(0), cfg, key));
  };
  return alg;
}

namespace {

ReplicableAlgorithm grid_rounding(double h, std::size_t n, std::size_t offset_atoms, Representation rep,
                                  std::size_t coordinate, std::size_t coordinates) {
  if (!(h > 0.0 && h <= 1.0)) throw ParameterError("grid rounding: h must lie in (0,1]");
  const double cells = std::round(1.0 / h);
  if (std::abs(cells * h - 1.0) > 1e-9) throw ParameterError("grid rounding: 1/h must be an integer");
  if (n == 0) throw ParameterError("grid rounding: n must be positive");
  const auto top = static_cast<std::int64_t>(cells);
  const double step = 1.0 / cells;

  auto round_with = [top, step, coordinate](const Dataset& data, double u) {
    const SampleSet& s = data.at(coordinate);
    require_unit_interval_values(s, "grid rounding");
    const auto j = static_cast<std::int64_t>(std::floor(s.mean() / step + u));
    return Output::scalar(static_cast<double>(std::clamp<std::int64_t>(j, 0, top)) * step);
  };

  std::vector<Output> grid;
  for (std::int64_t j = 0; j <= top; ++j) grid.push_back(Output::scalar(static_cast<double>(j) * step));

  ReplicableAlgorithm alg;
  alg.name = "grid_rounding";
  alg.shape = per_source_parts(coordinates, n, rep);
  alg.output_space = OutputSpace::of(std::move(grid));
  if (offset_atoms == 0) {
    alg.run = [round_with](const Dataset& data, const SeedKey& key) {
      return round_with(data, uniform01(key, 0));
    };
  } else {
    const double K = static_cast<double>(offset_atoms);
    auto run_atom = [round_with, K](const Dataset& data, std::size_t a) {
      return round_with(data, static_cast<double>(a) / K);
    };
    alg.atoms = RandomnessAtoms{offset_atoms, run_atom};
    alg.run = [run_atom, offset_atoms](const Dataset& data, const SeedKey& key) {
      return run_atom(data, static_cast<std::size_t>(UniformStream(key).below(offset_atoms)));
    };
  }
  return alg;
}

}  // namespace

ReplicableAlgorithm make_grid_rounding_algorithm(double h, std::size_t n, std::size_t offset_atoms,
                                                 Representation rep) {
  return grid_rounding(h, n, offset_atoms, rep, 0, 1);
}

ReplicableAlgorithm make_coordinate_grid_rounding(double h, std::size_t n, std::size_t coordinate,
                                                  std::size_t coordinates, std::size_t offset_atoms,
                                                  Representation rep) {
  if (coordinate >= coordinates) throw ParameterError("grid rounding: coordinate out of range");
  auto alg = grid_rounding(h, n, offset_atoms, rep, coordinate, coordinates);
  alg.name = "grid_rounding[" + std::to_string(coordinate) + "]";
  return alg;
}

ReplicableAlgorithm make_sign_test_algorithm(std::size_t m, Representation rep) {
  if (m == 0) throw ParameterError("sign test: m must be positive");
  ReplicableAlgorithm alg;
  alg.name = "sign_test";
  alg.shape = single_part(m, rep);
  alg.output_space = OutputSpace::of({Output::scalar(-1.0), Output::scalar(1.0)});
  alg.run = [](const Dataset& data, const SeedKey& key) {
    return Output::scalar(replicable_sign_test(data.at(0), key));
  };
  alg.atoms = RandomnessAtoms{1, [](const Dataset& data, std::size_t) {
                                return Output::scalar(replicable_sign_test(data.at(0), SeedKey{}));
                              }};
  return alg;
}

ReplicableAlgorithm make_heavy_hitters_algorithm(double nu, double eps, double rho, double beta,
                                                 double C) {
  const std::size_t n = heavy_hitters_sample_budget(nu, eps, rho, beta, C);
  ReplicableAlgorithm alg;
  alg.name = "heavy_hitters";
  alg.shape = single_part(n, Representation::counts);
  alg.output_space = OutputSpace::predicate([](const Output& y) {
    return std::is_sorted(y.values().begin(), y.values().end());
  });
  alg.run = [=](const Dataset& data, const SeedKey& key) {
    return Output::list(replicable_heavy_hitters(data.at(0), nu, eps, rho, beta, key));
  };
  return alg;
}

ReplicableAlgorithm make_best_arm_algorithm(std::size_t arms, double alpha, double rho, double beta,
                                            double C, double lambda_scale) {
  const std::size_t n = best_arm_sample_budget(arms, alpha, rho, beta, C);
  ReplicableAlgorithm alg;
  alg.name = "best_arm";
  alg.shape = per_source_parts(arms, n, Representation::counts);
  std::vector<Output> space;
  for (std::size_t a = 0; a < arms; ++a) space.push_back(Output::scalar(static_cast<double>(a)));
  alg.output_space = OutputSpace::of(std::move(space));
  alg.run = [=](const Dataset& data, const SeedKey& key) {
    return Output::scalar(static_cast<double>(
        replicable_best_arm(data, alpha, rho, beta, key, lambda_scale)));
  };
  return alg;
}

}  // namespace replicalab
