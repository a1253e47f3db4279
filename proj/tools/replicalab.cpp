// replicalab: run configured experiments and emit report.json plus CSVs.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "replicalab/config.hpp"
#include "replicalab/experiments.hpp"
#include "replicalab/seedstream.hpp"

using namespace replicalab;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read config " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

ExperimentConfig load(const std::string& path, const std::vector<std::string>& overrides) {
  ExperimentConfig cfg = validate_config(read_file(path), overrides);
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
  return cfg;
}

std::string_view type_name(ParamType t) {
  switch (t) {
    case ParamType::real: return "real";
    case ParamType::integer: return "integer";
    case ParamType::text: return "text";
    case ParamType::real_list: return "real list";
    case ParamType::integer_list: return "integer list";
  }
  return "?";
}

int print_keys(const std::string& name) {
  const auto kind = parse_experiment_kind(name);
  std::cout << "# " << name << "\n";
  std::cout << "experiment = " << name << "\nroot_seed = " << kDefaultRootSeed
            << "\noutput_dir = replicalab_out\nthreads = 0\n";
  for (const auto& spec : experiment_schema(kind)) {
    std::cout << spec.key << " = " << spec.default_text << "  # " << type_name(spec.type) << "; " << spec.doc;
    if (!spec.choices.empty()) {
      std::cout << " {";
      for (std::size_t i = 0; i < spec.choices.size(); ++i) std::cout << (i ? ", " : "") << spec.choices[i];
      std::cout << "}";
    }
    std::cout << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"replicalab: replicability experiments driven by key = value configs"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;

  auto* run = app.add_subcommand("run", "run the experiment described by a config file");
  run->add_option("config", config_path, "config path")->required();
  run->add_option("--override", overrides, "key=value applied on top of the file (repeatable)");

  auto* check = app.add_subcommand("validate", "check a config and print its canonical form");
  check->add_option("config", config_path, "config path")->required();
  check->add_option("--override", overrides, "key=value applied on top of the file (repeatable)");

  std::string kind;
  auto* keys = app.add_subcommand("keys", "print every key of an experiment with its default");
  keys->add_option("experiment", kind, "experiment name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*keys) return print_keys(kind);
    const ExperimentConfig cfg = load(config_path, overrides);
    if (*check) {
      std::cout << serialize(cfg);
      return kExitOk;
    }
    const RunOutcome out = run_experiment(cfg);
    for (const auto& f : out.files) std::cout << f << "\n";
    if (out.exit_code != kExitOk) std::cerr << "error: " << out.message << "\n";
    return out.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}
