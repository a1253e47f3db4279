#include <gtest/gtest.h>

#include "replicalab/config.hpp"
#include "replicalab/seedstream.hpp"

using namespace replicalab;

namespace {

std::vector<ConfigIssue> issues_of(const std::string& text, const std::vector<std::string>& overrides = {}) {
  try {
    validate_config(text, overrides);
  } catch (const ConfigValidationError& e) {
    return e.issues();
  }
  return {};
}

bool names_key(const std::vector<ConfigIssue>& issues, const std::string& key) {
  for (const auto& i : issues) {
    if (i.key == key) return true;
  }
  return false;
}

}  // namespace

TEST(Config, DefaultsFilledAndTyped) {
  const auto cfg = validate_config("experiment = meter\nroot_seed = " + std::string(kDefaultRootSeed) + "\n");
  EXPECT_EQ(cfg.experiment, ExperimentKind::meter);
  EXPECT_EQ(cfg.text("algorithm"), "sq");
  EXPECT_EQ(cfg.integer("trials"), 10000);
  EXPECT_EQ(cfg.real("rho"), 0.1);
  EXPECT_EQ(cfg.reals("arms.means"), (std::vector<double>{0.9, 0.5, 0.4}));
  EXPECT_TRUE(cfg.warnings.empty());
  EXPECT_THROW(cfg.real("trials"), ConfigError);
  EXPECT_THROW(cfg.real("nope"), ConfigError);
}

TEST(Config, CommentsBlankLinesAndSpacing) {
  const auto cfg = validate_config(
      "# a comment\n\n  experiment=lowerbound_scaling   # trailing\r\n"
      "ks = 1,2 , 4\nthreads = 3\noutput_dir = out dir\ngames = 1e4\n");
  EXPECT_EQ(cfg.integers("ks"), (std::vector<std::int64_t>{1, 2, 4}));
  EXPECT_EQ(cfg.threads, 3u);
  EXPECT_EQ(cfg.output_dir, "out dir");
  EXPECT_EQ(cfg.integer("games"), 10000);
}

TEST(Config, RoundTrip) {
  for (ExperimentKind kind : all_experiment_kinds()) {
    const auto cfg = validate_config("experiment = " + std::string(to_string(kind)) + "\nroot_seed = " +
                                     std::string(64, 'A') + "\n");
    const std::string text = serialize(cfg);
    EXPECT_EQ(serialize(validate_config(text)), text) << to_string(kind);
    EXPECT_NE(text.find(std::string(64, 'a')), std::string::npos);
  }
  const auto odd = validate_config("experiment = calc_pg\neps = 0.1, 0.30000000000000004\ndelta = 1e-3, 2e-3\n"
                                   "gamma = 0.1, 0.2\ndelta_prime = 0.012345678901234567\n");
  const std::string text = serialize(odd);
  EXPECT_EQ(validate_config(text).reals("eps"), odd.reals("eps"));
  EXPECT_EQ(serialize(validate_config(text)), text);
}

TEST(Config, RangeErrorNamesKey) {
  const auto issues = issues_of("experiment = meter\nrho = 1.5\n");
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].key, "rho");
  EXPECT_EQ(issues[0].line, 2u);
  EXPECT_NE(issues[0].describe().find("rho"), std::string::npos);
}

TEST(Config, UnknownKeyAndExperiment) {
  auto issues = issues_of("experiment = meter\nbogus.key = 3\n");
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_EQ(issues[0].key, "bogus.key");
  issues = issues_of("experiment = nonsense\n");
  EXPECT_TRUE(names_key(issues, "experiment"));
  issues = issues_of("rho = 0.1\n");
  EXPECT_TRUE(names_key(issues, "experiment"));
}

TEST(Config, AllErrorsAtOnce) {
  const auto issues = issues_of(
      "experiment = meter\nrho = 2\nalpha = x\nalgorithm = magic\ntrials = 5\nwhat = 1\nroot_seed = 12\n");
  EXPECT_EQ(issues.size(), 6u);
  for (const char* key : {"rho", "alpha", "algorithm", "trials", "what", "root_seed"}) {
    EXPECT_TRUE(names_key(issues, key)) << key;
  }
}

TEST(Config, PositionedParseErrors) {
  const auto issues = issues_of("experiment = meter\n\n   no equals sign\nbad key! = 1\nrho = 0.2\nrho = 0.3\n");
  ASSERT_EQ(issues.size(), 3u);
  EXPECT_EQ(issues[0].line, 3u);
  EXPECT_EQ(issues[0].column, 4u);
  EXPECT_EQ(issues[1].line, 4u);
  EXPECT_EQ(issues[2].line, 6u);
  EXPECT_NE(issues[2].message.find("duplicate"), std::string::npos);
}

TEST(Config, MissingSeedWarnsWithDefault) {
  const auto cfg = validate_config("experiment = calc_theorem1\n");
  EXPECT_EQ(cfg.root_seed, std::string(kDefaultRootSeed));
  ASSERT_EQ(cfg.warnings.size(), 1u);
  EXPECT_NE(cfg.warnings[0].find("root_seed"), std::string::npos);
}

TEST(Config, OverridesApplyLast) {
  const auto cfg = validate_config("experiment = meter\nrho = 0.2\n", {"rho=0.3", "trials = 500"});
  EXPECT_EQ(cfg.real("rho"), 0.3);
  EXPECT_EQ(cfg.integer("trials"), 500);
  EXPECT_TRUE(names_key(issues_of("experiment = meter\n", {"rho=7"}), "rho"));
  EXPECT_EQ(issues_of("experiment = meter\n", {"novalue"}).size(), 1u);
}

TEST(Config, CrossKeyChecks) {
  EXPECT_TRUE(names_key(issues_of("experiment = meter\ngrid.h = 0.3\n"), "grid.h"));
  EXPECT_TRUE(names_key(issues_of("experiment = meter\nsource.probs = 0.5, 0.4\n"), "source.probs"));
  EXPECT_TRUE(names_key(issues_of("experiment = meter\nhh.nu = 0.1\nhh.eps = 0.06\n"), "hh.eps"));
  EXPECT_TRUE(names_key(issues_of("experiment = lowerbound_scaling\nks = 1, 4, 2\n"), "ks"));
  EXPECT_TRUE(names_key(issues_of("experiment = calc_pg\ndelta = 0.001\n"), "delta"));
  EXPECT_TRUE(names_key(issues_of("experiment = calc_theorem1\nn_list = 5\n"), "n_list"));
}
