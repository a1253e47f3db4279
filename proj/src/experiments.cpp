#include "replicalab/experiments.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "replicalab/composition.hpp"
#include "replicalab/lowerbound.hpp"
#include "replicalab/meter.hpp"
#include "replicalab/replicable.hpp"
#include "replicalab/transforms.hpp"

namespace replicalab {

using Json = nlohmann::ordered_json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ScaleError*>(&e)) return kExitScale;
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParameterError*>(&e) ||
      dynamic_cast<const DomainError*>(&e) || dynamic_cast<const ValidationError*>(&e)) {
    return kExitValidation;
  }
  return kExitFailure;
}

namespace {

struct Context {
  const ExperimentConfig& cfg;
  SeedKey root;
  MeterOptions opts;
  Json results = Json::object();
  std::map<std::string, std::string> csv;
};

Json interval_json(const Interval& ci) { return Json{{"lo", ci.lo}, {"hi", ci.hi}}; }

Json report_json(const TrialReport& r) {
  return Json{{"trials", r.trials},
              {"disagreements", r.disagreements},
              {"failures", r.failures},
              {"rho_hat", r.rho_hat},
              {"rho_ci", interval_json(r.rho_ci)},
              {"beta_hat", r.beta_hat},
              {"beta_ci", interval_json(r.beta_ci)},
              {"level", r.level}};
}

Json param_json(const ParamValue& v) {
  return std::visit([](const auto& x) { return Json(x); }, v);
}

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  return format_real(x);
}

std::uint64_t trials_of(const Context& c) { return static_cast<std::uint64_t>(c.cfg.integer("trials")); }

std::size_t size_param(const ExperimentConfig& cfg, const std::string& key) {
  return static_cast<std::size_t>(cfg.integer(key));
}

DiscreteDistribution categorical(const std::vector<double>& probs) {
  DiscreteDistribution d;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    d.support.push_back(static_cast<double>(i));
    d.probs.push_back(probs[i]);
  }
  return d;
}

Population arm_population(const std::vector<double>& means) {
  Population pop;
  for (double m : means) pop.push_back(bernoulli(m));
  return pop;
}

std::string trials_csv(const std::vector<std::pair<std::string, TrialReport>>& rows) {
  std::string out = trial_report_csv_header() + "\n";
  for (const auto& [name, r] : rows) out += csv_row(name, r) + "\n";
  return out;
}

// --- meter / boost ---

struct Subject {
  ReplicableAlgorithm alg;
  Population population;
  std::optional<ValidityCheck> check;
};

Subject meter_subject(const ExperimentConfig& cfg) {
  const std::string& name = cfg.text("algorithm");
  const double p = cfg.real("source.p");
  const auto n = size_param(cfg, "n");
  Subject s;
  s.population = population_of(bernoulli(p));
  if (name == "constant") {
    s.alg = make_constant_algorithm(Output::scalar(cfg.real("constant.value")), single_part(n, Representation::counts));
  } else if (name == "sq") {
    s.alg = make_sq_algorithm(SqEstimateConfig::make(cfg.real("rho"), cfg.real("alpha"), cfg.real("beta"), cfg.real("sq.C")));
    s.check = ValidityCheck{mean_estimation_problem(cfg.real("alpha")), GroundTruth{{p}, std::nullopt}};
  } else if (name == "grid_rounding") {
    s.alg = make_grid_rounding_algorithm(cfg.real("grid.h"), n);
    s.check = ValidityCheck{mean_estimation_problem(cfg.real("alpha")), GroundTruth{{p}, std::nullopt}};
  } else if (name == "sign_test") {
    s.alg = make_sign_test_algorithm(n);
    s.check = ValidityCheck{threshold_sign_problem(cfg.real("tau")), GroundTruth{{p}, std::nullopt}};
  } else if (name == "heavy_hitters") {
    const auto dist = categorical(cfg.reals("source.probs"));
    s.alg = make_heavy_hitters_algorithm(cfg.real("hh.nu"), cfg.real("hh.eps"), cfg.real("rho"), cfg.real("beta"),
                                         cfg.real("hh.C"));
    s.population = population_of(dist);
    s.check = ValidityCheck{heavy_hitters_problem(cfg.real("hh.nu"), cfg.real("hh.eps")), GroundTruth{{}, dist}};
  } else {
    const auto& means = cfg.reals("arms.means");
    s.alg = make_best_arm_algorithm(means.size(), cfg.real("alpha"), cfg.real("rho"), cfg.real("beta"),
                                    cfg.real("bestarm.C"), cfg.real("bestarm.lambda_scale"));
    s.population = arm_population(means);
    s.check = ValidityCheck{best_arm_problem(cfg.real("alpha")), GroundTruth{means, std::nullopt}};
  }
  return s;
}

void run_meter(Context& c) {
  const Subject s = meter_subject(c.cfg);
  const auto r = estimate_replicability(s.alg, s.population, trials_of(c), c.root.derive("meter"), c.opts, s.check);
  c.results["algorithm"] = s.alg.name;
  c.results["sample_complexity"] = s.alg.sample_complexity();
  c.results["validity_checked"] = s.check.has_value();
  c.results["report"] = report_json(r);
  c.csv["trials.csv"] = trials_csv({{s.alg.name, r}});
}

void run_boost(Context& c) {
  const auto& cfg = c.cfg;
  const std::string& name = cfg.text("algorithm");
  const double rho = cfg.real("rho"), alpha = cfg.real("alpha"), beta = cfg.real("beta");
  BoostComponents comps;
  Population population;
  ValidityCheck check;
  if (name == "sq") {
    const double p = cfg.real("source.p");
    comps = sq_boost_components(cfg.real("sq.C"));
    population = population_of(bernoulli(p));
    check = ValidityCheck{mean_estimation_problem(alpha), GroundTruth{{p}, std::nullopt}};
  } else if (name == "heavy_hitters") {
    const auto dist = categorical(cfg.reals("source.probs"));
    comps = heavy_hitters_boost_components(cfg.real("hh.nu"), cfg.real("hh.eps"), cfg.real("hh.C"));
    population = population_of(dist);
    check = ValidityCheck{heavy_hitters_problem(cfg.real("hh.nu"), cfg.real("hh.eps")), GroundTruth{{}, dist}};
  } else {
    const auto& means = cfg.reals("arms.means");
    comps = best_arm_boost_components(means.size(), cfg.real("bestarm.C"), cfg.real("bestarm.lambda_scale"));
    population = arm_population(means);
    check = ValidityCheck{best_arm_problem(alpha), GroundTruth{means, std::nullopt}};
  }
  const BoostPlan plan = boost_plan(comps, rho, alpha, beta);
  const ReplicableAlgorithm alg = make_boosted(plan);
  const auto r = estimate_replicability(alg, population, trials_of(c), c.root.derive("boost"), c.opts, check);
  c.results["algorithm"] = name;
  c.results["stage_samples"] = Json{{"replicable", plan.replicable.sample_complexity()},
                                    {"tester", plan.tester.sample_complexity()},
                                    {"fallback", plan.fallback.sample_complexity()}};
  c.results["report"] = report_json(r);
  c.csv["trials.csv"] = trials_csv({{"boosted_" + name, r}});
}

// --- composition ---

std::string coordinates_csv(const std::vector<double>& means, const CoordinateReport& r) {
  std::string out = std::string(kCoordinatesCsvHeader) + "\n";
  for (std::size_t i = 0; i < means.size(); ++i) {
    out += std::to_string(i) + "," + num(means[i]) + "," + std::to_string(r.invalid[i]) + "," +
           num(r.validity_rate[i]) + "," + num(r.validity_ci[i].lo) + "," + num(r.validity_ci[i].hi) + "\n";
  }
  return out;
}

Json coordinate_json(const CoordinateReport& r) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < r.invalid.size(); ++i) {
    rows.push_back(Json{{"invalid", r.invalid[i]},
                        {"validity_rate", r.validity_rate[i]},
                        {"validity_ci", interval_json(r.validity_ci[i])}});
  }
  return rows;
}

void run_compose_naive(Context& c) {
  const auto& cfg = c.cfg;
  const auto& means = cfg.reals("means");
  const std::size_t k = means.size();
  std::vector<ReplicableAlgorithm> algs;
  for (std::size_t i = 0; i < k; ++i) {
    if (cfg.text("algorithm") == "sq") {
      const auto base = make_sq_algorithm(
          SqEstimateConfig::make(cfg.real("rho"), cfg.real("alpha"), cfg.real("beta"), cfg.real("sq.C")));
      algs.push_back(coordinate_algorithm(base, i, k));
    } else {
      algs.push_back(make_coordinate_grid_rounding(cfg.real("grid.h"), size_param(cfg, "n"), i, k));
    }
  }
  const auto alg = make_naive_composition(algs);
  const auto r = estimate_coordinatewise(alg, arm_population(means), means, cfg.real("alpha"), trials_of(c),
                                         c.root.derive("compose"), c.opts);
  c.results["k"] = k;
  c.results["algorithm"] = cfg.text("algorithm");
  c.results["report"] = report_json(r.joint);
  c.results["coordinates"] = coordinate_json(r);
  c.csv["trials.csv"] = trials_csv({{"compose_naive", r.joint}});
  c.csv["coordinates.csv"] = coordinates_csv(means, r);
}

void run_compose_pipeline(Context& c) {
  const auto& cfg = c.cfg;
  const auto& means = cfg.reals("means");
  const std::size_t k = means.size();
  std::vector<ReplicableAlgorithm> algs;
  for (std::size_t i = 0; i < k; ++i) {
    algs.push_back(make_coordinate_grid_rounding(cfg.real("grid.h"), size_param(cfg, "n"), i, k));
  }
  PipelineOptions po;
  po.c = cfg.real("c");
  po.m_runs = size_param(cfg, "m_runs");
  po.inner_trials = size_param(cfg, "inner_trials");
  po.max_atoms = size_param(cfg, "max_atoms");
  const double rho = cfg.real("rho");
  const ComposePipeline pipe(algs, rho, cfg.real("beta0"), po);
  c.results["k"] = k;
  c.results["eps_i"] = pipe.eps();
  c.results["delta_i"] = pipe.delta();
  c.results["beta_bound"] = pipe.beta_bound();
  c.results["atoms"] = pipe.atoms();
  c.results["estimation_error"] = pipe.estimation_error();
  c.results["sample_complexity"] = pipe.shape().total_size();

  const auto r = estimate_coordinatewise(pipe.as_algorithm(), arm_population(means), means, cfg.real("alpha"),
                                         trials_of(c), c.root.derive("pipeline"), c.opts);
  c.results["report"] = report_json(r.joint);
  c.results["coordinates"] = coordinate_json(r);
  c.results["validity_threshold"] = 1.0 - pipe.beta_bound() - 0.05;
  c.results["disagreement_threshold"] = rho + 0.05;
  c.csv["trials.csv"] = trials_csv({{"compose_pipeline", r.joint}});
  c.csv["coordinates.csv"] = coordinates_csv(means, r);
}

void run_calc_theorem1(Context& c) {
  const auto& n = c.cfg.reals("n_list");
  const auto p = theorem1_params(n, c.cfg.real("rho"), c.cfg.real("beta0"), c.cfg.real("c"));
  c.results["eps_i"] = p.eps_i;
  c.results["delta_i"] = p.delta_i;
  c.results["delta_prime"] = p.delta_prime;
  c.results["eps_star"] = p.eps_star;
  c.results["delta_star"] = p.delta_star;
  c.results["gamma_star"] = p.gamma_star;
  c.results["n_bound"] = p.n_bound;
  c.results["beta_bound"] = p.beta_bound;
  c.results["sum_eps_sq"] = p.sum_eps_sq;
  c.results["simple_bound_preconditions_hold"] = p.preconditions_hold;
  std::string out = std::string(kTheorem1CsvHeader) + "\n";
  for (std::size_t i = 0; i < n.size(); ++i) {
    out += std::to_string(i) + "," + num(n[i]) + "," + num(p.eps_i[i]) + "," + num(p.delta_i[i]) + "\n";
  }
  c.csv["theorem1.csv"] = out;
}

void run_calc_pg(Context& c) {
  const auto& eps = c.cfg.reals("eps");
  const auto& delta = c.cfg.reals("delta");
  const auto& gamma = c.cfg.reals("gamma");
  const double dp = c.cfg.real("delta_prime");
  const auto h = pg_compose_het_params(eps, delta, gamma, dp);
  c.results["eps_k"] = h.eps_k;
  c.results["delta_k"] = h.delta_k;
  c.results["eps_star"] = h.eps_star;
  c.results["delta_star"] = h.delta_star;
  c.results["gamma_star"] = h.gamma_star;
  if (pg_simple_preconditions_hold(eps, delta, dp)) {
    const auto s = pg_compose_simple(eps, delta, dp);
    c.results["simple"] = Json{{"eps_star", s.eps_star}, {"delta_star", s.delta_star}};
  } else {
    c.results["simple"] = nullptr;
  }
  std::string out = std::string(kPgCsvHeader) + "\n";
  for (std::size_t j = 0; j < eps.size(); ++j) {
    out += std::to_string(j + 1) + "," + num(eps[j]) + "," + num(delta[j]) + "," + num(gamma[j]) + "," +
           num(h.delta_hat[j]) + "," + num(h.psi[j]) + "," + num(h.eps_j[j]) + "," + num(h.delta_j[j]) + "\n";
  }
  c.csv["pg.csv"] = out;
}

// --- lower bound ---

void run_divergence(Context& c) {
  const AdversaryDist adv{c.cfg.real("tau")};
  const auto alg = canonical_sign_tester();
  Json rows = Json::array();
  std::string out = std::string(kDivergenceCsvHeader) + "\n";
  for (auto m64 : c.cfg.integers("m_list")) {
    const auto m = static_cast<std::size_t>(m64);
    const auto e = measure_round_divergence(alg, m, adv, trials_of(c), c.root.derive("m", m), c.opts);
    out += std::to_string(m) + "," + num(e.p_hat) + "," + num(e.ci.lo) + "," + num(e.ci.hi) + "\n";
    Json row{{"m", m},
             {"trials", e.trials},
             {"disagreements", e.disagreements},
             {"p_hat", e.p_hat},
             {"ci", interval_json(e.ci)},
             {"scaled", e.p_hat * adv.tau * std::sqrt(static_cast<double>(m))}};
    if (m == 1) row["exact"] = sign_tester_divergence_m1(adv);
    rows.push_back(row);
  }
  c.results["rows"] = rows;
  c.csv["divergence.csv"] = out;
}

void record_scaling(Context& c, const ScalingTable& t) {
  Json rows = Json::array();
  std::string out = std::string(kScalingCsvHeader) + "\n";
  for (const auto& r : t.rows) {
    out += std::to_string(r.k) + "," + num(r.m_min) + "," + num(t.exponent) + "\n";
    rows.push_back(Json{{"k", r.k},
                        {"m_min", r.m_min},
                        {"m_pass", r.m_pass},
                        {"m_fail", r.m_fail},
                        {"rho_at_pass", r.rho_at_pass}});
  }
  c.results["rows"] = rows;
  c.results["exponent"] = std::isnan(t.exponent) ? Json(nullptr) : Json(t.exponent);
  c.csv["scaling.csv"] = out;
}

void run_scaling(Context& c) {
  const auto& cfg = c.cfg;
  std::vector<std::size_t> ks;
  for (auto k : cfg.integers("ks")) ks.push_back(static_cast<std::size_t>(k));
  ScalingOptions o;
  o.games = static_cast<std::uint64_t>(cfg.integer("games"));
  o.growth = cfg.real("growth");
  o.m_ceiling = size_param(cfg, "m_ceiling");
  o.meter = c.opts;
  try {
    record_scaling(c, scaling_experiment(canonical_sign_tester(), ks, cfg.real("rho_target"),
                                         AdversaryDist{cfg.real("tau")}, c.root, o));
  } catch (const ScalingExhausted& e) {
    record_scaling(c, e.partial());
    c.results["partial"] = true;
    throw;
  }
}

void run_naive_tightness(Context& c) {
  const auto& cfg = c.cfg;
  const auto alg = make_grid_rounding_algorithm(cfg.real("grid.h"), size_param(cfg, "n"));
  Json rows = Json::array();
  std::string out = std::string(kNaiveCsvHeader) + "\n";
  for (auto k64 : cfg.integers("ks")) {
    const auto k = static_cast<std::size_t>(k64);
    const auto r = naive_tightness_experiment(k, alg, trials_of(c), c.root.derive("k", k),
                                              bernoulli(cfg.real("source.p")), c.opts);
    out += std::to_string(k) + "," + num(r.per_coord) + "," + num(r.joint) + "," + num(r.bound) + "\n";
    rows.push_back(Json{{"k", k},
                        {"p0", r.per_coord},
                        {"p0_ci", interval_json(r.per_coord_ci)},
                        {"joint", r.joint},
                        {"joint_ci", interval_json(r.joint_ci)},
                        {"bound", r.bound},
                        {"independent_prediction", r.independent_prediction()}});
  }
  c.results["rows"] = rows;
  c.csv["naive.csv"] = out;
}

void run_invariance(Context& c) {
  const auto& cfg = c.cfg;
  const auto n = size_param(cfg, "n");
  const auto base = make_grid_rounding_algorithm(cfg.real("grid.h"), n, 0, Representation::items);
  const std::string& wrapper = cfg.text("wrapper");
  ReplicableAlgorithm wrapped;
  if (wrapper == "order") {
    wrapped = make_order_invariant(base);
  } else if (wrapper == "label") {
    wrapped = make_label_invariant(base, {0.0, 1.0});
  } else {
    wrapped = make_suff_stat_wrapped(base, bernoulli_sum_statistic(n));
  }
  const Population pop = population_of(bernoulli(cfg.real("source.p")));
  const auto rb = estimate_replicability(base, pop, trials_of(c), c.root.derive("base"), c.opts);
  const auto rw = estimate_replicability(wrapped, pop, trials_of(c), c.root.derive("wrapped"), c.opts);
  c.results["wrapper"] = wrapper;
  c.results["base"] = report_json(rb);
  c.results["wrapped"] = report_json(rw);
  c.csv["trials.csv"] = trials_csv({{"base", rb}, {"wrapped_" + wrapper, rw}});
}

void dispatch(Context& c) {
  using K = ExperimentKind;
  switch (c.cfg.experiment) {
    case K::meter: return run_meter(c);
    case K::boost: return run_boost(c);
    case K::compose_naive: return run_compose_naive(c);
    case K::compose_pipeline: return run_compose_pipeline(c);
    case K::calc_theorem1: return run_calc_theorem1(c);
    case K::calc_pg: return run_calc_pg(c);
    case K::lowerbound_divergence: return run_divergence(c);
    case K::lowerbound_scaling: return run_scaling(c);
    case K::naive_tightness: return run_naive_tightness(c);
    case K::invariance: return run_invariance(c);
  }
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << contents;
  f.close();
  if (!f) throw IoError("failed writing " + path.string());
}

}  // namespace

RunOutcome compute_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  Context c{cfg, SeedKey::from_hex(cfg.root_seed).derive(to_string(cfg.experiment)), MeterOptions{}, {}, {}};
  c.opts.threads = cfg.threads;
  if (cfg.params.count("level")) c.opts.level = cfg.real("level");

  RunOutcome out;
  std::string status = "ok";
  try {
    dispatch(c);
  } catch (const std::exception& e) {
    out.exit_code = exit_code_for(e);
    out.message = e.what();
    status = out.exit_code == kExitScale ? "scale_error" : "error";
  }

  Json config = Json::object();
  config["experiment"] = std::string(to_string(cfg.experiment));
  config["root_seed"] = cfg.root_seed;
  config["output_dir"] = cfg.output_dir;
  config["threads"] = cfg.threads;
  Json params = Json::object();
  for (const auto& [key, value] : cfg.params) params[key] = param_json(value);
  config["params"] = params;

  Json report;
  report["experiment"] = std::string(to_string(cfg.experiment));
  report["status"] = status;
  if (out.exit_code != kExitOk) report["error"] = out.message;
  report["exit_code"] = out.exit_code;
  report["config"] = config;
  report["warnings"] = cfg.warnings;
  report["results"] = c.results;
  Json files = Json::array();
  for (const auto& [name, contents] : c.csv) files.push_back(name);
  report["files"] = files;
  report["wall_time_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  out.report_json = report.dump(2) + "\n";
  out.csv = std::move(c.csv);
  return out;
}

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  namespace fs = std::filesystem;
  const fs::path dir(cfg.output_dir);
  try {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
      throw IoError("cannot create output directory " + dir.string() + (ec ? ": " + ec.message() : ""));
    }
    // fail before computing when the directory is not writable
    write_file(dir / "report.json", "{}\n");
  } catch (const IoError& e) {
    RunOutcome out;
    out.exit_code = kExitIo;
    out.message = e.what();
    return out;
  }

  RunOutcome out = compute_experiment(cfg);
  try {
    for (const auto& [name, contents] : out.csv) {
      write_file(dir / name, contents);
      out.files.push_back((dir / name).string());
    }
    write_file(dir / "report.json", out.report_json);
    out.files.push_back((dir / "report.json").string());
  } catch (const IoError& e) {
    out.exit_code = kExitIo;
    out.message = e.what();
  }
  return out;
}

}  // namespace replicalab
