#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "replicalab/errors.hpp"

namespace replicalab {

enum class ExperimentKind {
  meter,
  boost,
  compose_naive,
  compose_pipeline,
  calc_theorem1,
  calc_pg,
  lowerbound_divergence,
  lowerbound_scaling,
  naive_tightness,
  invariance,
};

std::string_view to_string(ExperimentKind kind);
/// ConfigError for unknown names.
ExperimentKind parse_experiment_kind(std::string_view name);
const std::vector<ExperimentKind>& all_experiment_kinds();

enum class ParamType { real, integer, text, real_list, integer_list };

using ParamValue =
    std::variant<double, std::int64_t, std::string, std::vector<double>, std::vector<std::int64_t>>;

/// One typed key of an experiment's schema. Ranges apply to every list
/// element; `choices` restricts text values.
struct ParamSpec {
  std::string key;
  ParamType type = ParamType::real;
  std::string default_text;
  double lo = -1e308;
  double hi = 1e308;
  bool lo_open = false;
  bool hi_open = false;
  std::vector<std::string> choices;
  std::string doc;
};

/// Keys accepted by an experiment besides the top-level ones.
const std::vector<ParamSpec>& experiment_schema(ExperimentKind kind);

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::meter;
  std::string root_seed;   ///< 64 hex characters
  std::string output_dir = "replicalab_out";
  unsigned threads = 0;    ///< 0: REPLICALAB_THREADS, then hardware concurrency
  std::map<std::string, ParamValue> params;  ///< every schema key, defaults filled
  std::vector<std::string> warnings;

  double real(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  const std::string& text(const std::string& key) const;
  const std::vector<double>& reals(const std::string& key) const;
  const std::vector<std::int64_t>& integers(const std::string& key) const;
};

struct ConfigIssue {
  std::size_t line = 0;    ///< 1-based; 0 when not tied to a line
  std::size_t column = 0;  ///< 1-based; 0 when not tied to a column
  std::string key;
  std::string message;

  std::string describe() const;
};

/// Every problem found in a config document.
class ConfigValidationError : public ConfigError {
 public:
  explicit ConfigValidationError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

/// Parses `key = value` lines (`#` starts a comment, blank lines ignored),
/// applies `overrides` ("key=value") on top, then type- and range-checks
/// against the experiment's schema. Throws ConfigValidationError listing
/// every issue. A missing root_seed falls back to the documented default
/// and adds a warning.
ExperimentConfig validate_config(std::string_view text,
                                 const std::vector<std::string>& overrides = {});

/// Canonical text form: top-level keys first, then params sorted by key.
/// Reals use the shortest representation that round-trips.
std::string serialize(const ExperimentConfig& cfg);

std::string format_real(double x);

}  // namespace replicalab
