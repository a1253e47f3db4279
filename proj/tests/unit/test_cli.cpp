#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "replicalab/config.hpp"
#include "replicalab/experiments.hpp"
#include "replicalab/meter.hpp"

using namespace replicalab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("replicalab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

int cli(const std::string& args, std::string* err = nullptr) {
  if (std::string(REPLICALAB_CLI_PATH) == "false") return -1;
  const fs::path log = fs::temp_directory_path() / "replicalab_cli_stderr.txt";
  const std::string cmd = std::string(REPLICALAB_CLI_PATH) + " " + args + " >/dev/null 2>" + log.string();
  const int status = std::system(cmd.c_str());
  if (err) *err = slurp(log);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "exp.cfg";
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Experiments, ConstantMeterReportsZero) {
  const auto dir = scratch("constant");
  const auto cfg = validate_config("experiment = meter\nalgorithm = constant\ntrials = 200\noutput_dir = " +
                                   (dir / "out").string() + "\n");
  const auto out = run_experiment(cfg);
  ASSERT_EQ(out.exit_code, 0) << out.message;
  const auto report = nlohmann::json::parse(slurp(dir / "out" / "report.json"));
  EXPECT_EQ(report["results"]["report"]["rho_hat"], 0.0);
  EXPECT_EQ(report["status"], "ok");
  EXPECT_EQ(report["config"]["params"]["algorithm"], "constant");
  EXPECT_TRUE(report.contains("wall_time_seconds"));
  EXPECT_EQ(slurp(dir / "out" / "trials.csv").substr(0, trial_report_csv_header().size()), trial_report_csv_header());
}

TEST(Experiments, CsvHeaders) {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"experiment = lowerbound_divergence\nm_list = 1, 4\ntrials = 1000\n", "divergence.csv"},
      {"experiment = lowerbound_scaling\nks = 1, 2\ngames = 1000\n", "scaling.csv"},
      {"experiment = naive_tightness\nks = 1, 2\ntrials = 1000\nn = 50\n", "naive.csv"},
      {"experiment = calc_theorem1\n", "theorem1.csv"},
      {"experiment = calc_pg\n", "pg.csv"},
  };
  const std::vector<std::string> headers = {kDivergenceCsvHeader, kScalingCsvHeader, kNaiveCsvHeader,
                                            kTheorem1CsvHeader, kPgCsvHeader};
  EXPECT_EQ(std::string(kDivergenceCsvHeader), "m,p_hat,lo,hi");
  EXPECT_EQ(std::string(kScalingCsvHeader), "k,m_min,exponent");
  EXPECT_EQ(std::string(kNaiveCsvHeader), "k,p0,joint,bound");
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto out = compute_experiment(validate_config(cases[i].first));
    ASSERT_EQ(out.exit_code, 0) << out.message;
    const std::string& csv = out.csv.at(cases[i].second);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), headers[i]);
  }
}

TEST(Experiments, DeterministicAcrossThreadCounts) {
  const std::vector<std::string> configs = {
      "experiment = meter\nalgorithm = grid_rounding\ntrials = 500\n",
      "experiment = compose_naive\nalgorithm = grid_rounding\ntrials = 300\n",
      "experiment = lowerbound_scaling\nks = 1, 2\ngames = 3000\n",
      "experiment = naive_tightness\nks = 3\ntrials = 1000\nn = 100\n",
  };
  for (const auto& text : configs) {
    const auto a = compute_experiment(validate_config(text, {"threads=1"}));
    const auto b = compute_experiment(validate_config(text, {"threads=3"}));
    ASSERT_EQ(a.exit_code, 0) << a.message;
    EXPECT_EQ(a.csv, b.csv) << text;
  }
}

TEST(Experiments, ScaleErrorsMapToThree) {
  const auto pipe = compute_experiment(validate_config("experiment = compose_pipeline\nmeans = 0.1, 0.2, 0.3\ngrid.h = 0.01\n"));
  EXPECT_EQ(pipe.exit_code, kExitScale);
  const auto scaling = compute_experiment(
      validate_config("experiment = lowerbound_scaling\nks = 1, 8\ngames = 1000\nm_ceiling = 300\n"));
  EXPECT_EQ(scaling.exit_code, kExitScale);
  const std::string& csv = scaling.csv.at("scaling.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);  // header + k = 1
  EXPECT_NE(scaling.report_json.find("\"partial\": true"), std::string::npos);
}

TEST(Experiments, ExitCodeMapping) {
  EXPECT_EQ(exit_code_for(ConfigError("x")), 2);
  EXPECT_EQ(exit_code_for(ParameterError("x")), 2);
  EXPECT_EQ(exit_code_for(ScaleError("x")), 3);
  EXPECT_EQ(exit_code_for(IoError("x")), 4);
  EXPECT_EQ(exit_code_for(std::runtime_error("x")), 1);
}

TEST(Cli, RunWritesFilesAndIsRepeatable) {
  if (std::string(REPLICALAB_CLI_PATH) == "false") GTEST_SKIP() << "CLI not built";
  const auto dir = scratch("repeat");
  const auto cfg = write_config(dir, "experiment = naive_tightness\nks = 1, 3\ntrials = 1000\nn = 200\noutput_dir = " +
                                         (dir / "out").string() + "\n");
  std::string err;
  ASSERT_EQ(cli("run " + cfg.string(), &err), 0) << err;
  EXPECT_NE(err.find("warning: root_seed"), std::string::npos);
  const std::string first = slurp(dir / "out" / "naive.csv");
  ASSERT_EQ(cli("run " + cfg.string() + " --override threads=2"), 0);
  EXPECT_EQ(slurp(dir / "out" / "naive.csv"), first);
}

TEST(Cli, ExitCodes) {
  if (std::string(REPLICALAB_CLI_PATH) == "false") GTEST_SKIP() << "CLI not built";
  const auto dir = scratch("codes");
  std::string err;
  EXPECT_EQ(cli("run " + write_config(dir, "experiment = meter\nmystery = 1\n").string(), &err), 2);
  EXPECT_NE(err.find("mystery"), std::string::npos);
  EXPECT_EQ(cli("run " + write_config(dir, "experiment = unheard_of\n").string()), 2);
  EXPECT_EQ(cli("run " + write_config(dir, "experiment = meter\nrho = 1.5\n").string(), &err), 2);
  EXPECT_NE(err.find("rho"), std::string::npos);
  EXPECT_EQ(cli("run " + write_config(dir, "experiment = compose_pipeline\nmeans = 0.1, 0.2, 0.3\ngrid.h = 0.01\n"
                                           "output_dir = " + (dir / "scale").string() + "\n").string()),
            3);
  std::ofstream(dir / "blocker") << "file";
  EXPECT_EQ(cli("run " + write_config(dir, "experiment = calc_theorem1\noutput_dir = " +
                                               (dir / "blocker" / "sub").string() + "\n").string()),
            4);
  EXPECT_EQ(cli("run " + (dir / "missing.cfg").string()), 4);
  EXPECT_EQ(cli("frobnicate"), 2);
  EXPECT_EQ(cli("validate " + write_config(dir, "experiment = calc_pg\n").string()), 0);
  EXPECT_EQ(cli("keys meter"), 0);
}
