// Python bindings: seed keys, correlated sampling, the calculators and the
// config-driven experiment runner.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "replicalab/composition.hpp"
#include "replicalab/config.hpp"
#include "replicalab/correlated_sampling.hpp"
#include "replicalab/errors.hpp"
#include "replicalab/experiments.hpp"
#include "replicalab/seedstream.hpp"

namespace py = pybind11;
using namespace replicalab;

namespace {

py::dict outcome_dict(const RunOutcome& r) {
  py::dict d;
  d["exit_code"] = r.exit_code;
  d["message"] = r.message;
  d["report_json"] = r.report_json;
  d["csv"] = r.csv;
  d["files"] = r.files;
  return d;
}

}  // namespace

PYBIND11_MODULE(_replicalab, m) {
  m.doc() = "replicalab core";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base);
  py::register_exception<ParameterError>(m, "ParameterError", base);
  py::register_exception<DomainError>(m, "DomainError", base);
  py::register_exception<ValidationError>(m, "ValidationError", base);
  py::register_exception<ScaleError>(m, "ScaleError", base);
  py::register_exception<IoError>(m, "IoError", base);

  py::class_<SeedKey>(m, "SeedKey")
      .def_static("from_hex", &SeedKey::from_hex, py::arg("hex"))
      .def("hex", &SeedKey::to_hex)
      .def("derive", &SeedKey::derive, py::arg("label"), py::arg("index") = 0)
      .def("split", &SeedKey::split, py::arg("index"))
      .def("uniform", [](const SeedKey& k, std::uint64_t counter) { return uniform01(k, counter); },
           py::arg("counter") = 0)
      .def("__eq__", [](const SeedKey& a, const SeedKey& b) { return a == b; })
      .def("__repr__", [](const SeedKey& k) { return "SeedKey('" + k.to_hex() + "')"; });
  m.attr("DEFAULT_ROOT_SEED") = std::string(kDefaultRootSeed);

  m.def("correlated_sample_index",
        [](const std::vector<double>& p, const SeedKey& key) { return correlated_sample_index(p, key); },
        py::arg("probs"), py::arg("key"));
  m.def("disagreement_bound", &disagreement_bound, py::arg("tv"));

  m.def(
      "theorem1_params",
      [](const std::vector<double>& n, double rho, double beta0, double c) {
        const auto p = theorem1_params(n, rho, beta0, c);
        py::dict d;
        d["eps_i"] = p.eps_i;
        d["delta_i"] = p.delta_i;
        d["delta_prime"] = p.delta_prime;
        d["eps_star"] = p.eps_star;
        d["delta_star"] = p.delta_star;
        d["gamma_star"] = p.gamma_star;
        d["n_bound"] = p.n_bound;
        d["beta_bound"] = p.beta_bound;
        d["sum_eps_sq"] = p.sum_eps_sq;
        d["preconditions_hold"] = p.preconditions_hold;
        return d;
      },
      py::arg("n_list"), py::arg("rho"), py::arg("beta0"), py::arg("c") = 0.1);

  m.def(
      "pg_compose_simple",
      [](const std::vector<double>& eps, const std::vector<double>& delta, double delta_prime, bool enforce) {
        const auto s = pg_compose_simple(eps, delta, delta_prime, {}, enforce);
        return py::make_tuple(s.eps_star, s.delta_star);
      },
      py::arg("eps"), py::arg("delta"), py::arg("delta_prime"), py::arg("enforce") = true);

  m.def(
      "pg_compose_het_params",
      [](const std::vector<double>& eps, const std::vector<double>& delta, const std::vector<double>& gamma,
         double delta_prime) {
        const auto h = pg_compose_het_params(eps, delta, gamma, delta_prime);
        py::dict d;
        d["delta_hat"] = h.delta_hat;
        d["psi"] = h.psi;
        d["eps_j"] = h.eps_j;
        d["delta_j"] = h.delta_j;
        d["eps_k"] = h.eps_k;
        d["delta_k"] = h.delta_k;
        d["eps_star"] = h.eps_star;
        d["delta_star"] = h.delta_star;
        d["gamma_star"] = h.gamma_star;
        return d;
      },
      py::arg("eps"), py::arg("delta"), py::arg("gamma"), py::arg("delta_prime"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_property_readonly("experiment", [](const ExperimentConfig& c) { return std::string(to_string(c.experiment)); })
      .def_readonly("root_seed", &ExperimentConfig::root_seed)
      .def_readwrite("output_dir", &ExperimentConfig::output_dir)
      .def_readwrite("threads", &ExperimentConfig::threads)
      .def_readonly("warnings", &ExperimentConfig::warnings)
      .def("serialize", [](const ExperimentConfig& c) { return serialize(c); });

  m.def("validate_config", &validate_config, py::arg("text"),
        py::arg("overrides") = std::vector<std::string>{});
  m.def("experiment_kinds", [] {
    std::vector<std::string> out;
    for (auto k : all_experiment_kinds()) out.emplace_back(to_string(k));
    return out;
  });
  m.def(
      "compute_experiment",
      [](const ExperimentConfig& c) {
        RunOutcome r;
        {
          py::gil_scoped_release nogil;
          r = compute_experiment(c);
        }
        return outcome_dict(r);
      },
      py::arg("config"));
  m.def(
      "run_experiment",
      [](const ExperimentConfig& c) {
        RunOutcome r;
        {
          py::gil_scoped_release nogil;
          r = run_experiment(c);
        }
        return outcome_dict(r);
      },
      py::arg("config"));
}
