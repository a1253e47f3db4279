#include "replicalab/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "replicalab/seedstream.hpp"

namespace replicalab {

namespace {

constexpr double kInf = 1e308;

const std::vector<std::pair<ExperimentKind, std::string_view>> kKindNames = {
    {ExperimentKind::meter, "meter"},
    {ExperimentKind::boost, "boost"},
    {ExperimentKind::compose_naive, "compose_naive"},
    {ExperimentKind::compose_pipeline, "compose_pipeline"},
    {ExperimentKind::calc_theorem1, "calc_theorem1"},
    {ExperimentKind::calc_pg, "calc_pg"},
    {ExperimentKind::lowerbound_divergence, "lowerbound_divergence"},
    {ExperimentKind::lowerbound_scaling, "lowerbound_scaling"},
    {ExperimentKind::naive_tightness, "naive_tightness"},
    {ExperimentKind::invariance, "invariance"},
};

// --- schema builders ---

ParamSpec real_in(std::string key, std::string def, double lo, double hi, bool lo_open, bool hi_open,
                  std::string doc) {
  ParamSpec s;
  s.key = std::move(key);
  s.type = ParamType::real;
  s.default_text = std::move(def);
  s.lo = lo;
  s.hi = hi;
  s.lo_open = lo_open;
  s.hi_open = hi_open;
  s.doc = std::move(doc);
  return s;
}

ParamSpec open_unit(std::string key, std::string def, std::string doc) {
  return real_in(std::move(key), std::move(def), 0, 1, true, true, std::move(doc));
}

ParamSpec probability(std::string key, std::string def, std::string doc) {
  return real_in(std::move(key), std::move(def), 0, 1, false, false, std::move(doc));
}

ParamSpec positive(std::string key, std::string def, std::string doc) {
  return real_in(std::move(key), std::move(def), 0, kInf, true, false, std::move(doc));
}

ParamSpec count(std::string key, std::string def, double min, std::string doc) {
  ParamSpec s = real_in(std::move(key), std::move(def), min, kInf, false, false, std::move(doc));
  s.type = ParamType::integer;
  return s;
}

ParamSpec choice(std::string key, std::string def, std::vector<std::string> choices, std::string doc) {
  ParamSpec s;
  s.key = std::move(key);
  s.type = ParamType::text;
  s.default_text = std::move(def);
  s.choices = std::move(choices);
  s.doc = std::move(doc);
  return s;
}

ParamSpec list_of(ParamSpec s) {
  s.type = s.type == ParamType::integer ? ParamType::integer_list : ParamType::real_list;
  return s;
}

ParamSpec trials(std::string def, double min = 100) {
  return count("trials", std::move(def), min, "paired trials");
}
ParamSpec level() { return open_unit("level", "0.95", "Wilson interval confidence level"); }

std::vector<ParamSpec> operator+(std::vector<ParamSpec> a, const std::vector<ParamSpec>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

const std::vector<ParamSpec>& hh_keys() {
  static const std::vector<ParamSpec> keys = {
      open_unit("hh.nu", "0.2", "heavy-hitter threshold"),
      open_unit("hh.eps", "0.05", "heavy-hitter slack, at most nu/2"),
      positive("hh.C", "8", "heavy-hitter budget constant"),
      list_of(probability("source.probs", "0.5, 0.3, 0.2", "categorical source over 0..d-1")),
  };
  return keys;
}

const std::vector<ParamSpec>& arm_keys() {
  static const std::vector<ParamSpec> keys = {
      list_of(probability("arms.means", "0.9, 0.5, 0.4", "Bernoulli arm means")),
      positive("bestarm.C", "1", "best-arm budget constant"),
      positive("bestarm.lambda_scale", "1", "Gibbs temperature multiplier"),
  };
  return keys;
}

std::vector<ParamSpec> build_schema(ExperimentKind kind) {
  using K = ExperimentKind;
  switch (kind) {
    case K::meter:
      return std::vector<ParamSpec>{
                 choice("algorithm", "sq",
                        {"constant", "sq", "grid_rounding", "sign_test", "heavy_hitters", "best_arm"},
                        "algorithm under test"),
                 open_unit("rho", "0.1", "replicability parameter"),
                 open_unit("alpha", "0.1", "accuracy"),
                 open_unit("beta", "0.05", "failure probability"),
                 positive("sq.C", "8", "SQ budget constant"),
                 real_in("grid.h", "0.25", 0, 1, true, false, "grid step, 1/h integral"),
                 count("n", "100", 1, "sample size of constant, grid_rounding and sign_test"),
                 probability("source.p", "0.5", "Bernoulli source mean"),
                 real_in("tau", "0.1", 0, 0.25, true, true, "sign-problem window"),
                 probability("constant.value", "0.5", "output of the constant algorithm"),
                 trials("10000"),
                 level(),
             } +
             hh_keys() + arm_keys();
    case K::boost:
      return std::vector<ParamSpec>{
                 choice("algorithm", "sq", {"sq", "heavy_hitters", "best_arm"}, "boosted algorithm"),
                 open_unit("rho", "0.2", "replicability parameter"),
                 open_unit("alpha", "0.1", "accuracy"),
                 open_unit("beta", "0.001", "target failure probability"),
                 positive("sq.C", "8", "SQ budget constant"),
                 probability("source.p", "0.5", "Bernoulli source mean"),
                 trials("100000"),
                 level(),
             } +
             hh_keys() + arm_keys();
    case K::compose_naive:
      return {
          list_of(probability("means", "0.3, 0.6", "product-coin means, one per algorithm")),
          choice("algorithm", "sq", {"sq", "grid_rounding"}, "per-coordinate algorithm"),
          open_unit("rho", "0.1", "per-algorithm replicability"),
          open_unit("alpha", "0.1", "accuracy"),
          open_unit("beta", "0.05", "failure probability"),
          positive("sq.C", "8", "SQ budget constant"),
          real_in("grid.h", "0.25", 0, 1, true, false, "grid step"),
          count("n", "400", 1, "grid_rounding sample size"),
          trials("10000"),
          level(),
      };
    case K::compose_pipeline:
      return {
          list_of(probability("means", "0.3, 0.6", "product-coin means, one per algorithm")),
          real_in("grid.h", "0.25", 0, 1, true, false, "grid step of each coordinate algorithm"),
          count("n", "100", 1, "samples per chunk per coordinate"),
          open_unit("rho", "0.3", "target replicability"),
          open_unit("beta0", "0.000001", "base failure probability"),
          open_unit("c", "0.9", "schedule constant"),
          count("m_runs", "400", 2, "chunks per surrogate"),
          count("inner_trials", "50", 1, "Monte Carlo seeds per distribution estimate"),
          count("max_atoms", "10000", 1, "largest product output space"),
          open_unit("alpha", "0.25", "per-coordinate accuracy"),
          trials("10000"),
          level(),
      };
    case K::calc_theorem1:
      return {
          list_of(real_in("n_list", "100, 100", 1, kInf, false, false, "per-algorithm sample complexities")),
          open_unit("rho", "0.5", "target replicability"),
          open_unit("beta0", "0.01", "base failure probability"),
          open_unit("c", "0.1", "schedule constant"),
      };
    case K::calc_pg:
      return {
          list_of(real_in("eps", "0.05, 0.05, 0.05", 0, 1, true, false, "per-algorithm epsilon")),
          list_of(real_in("delta", "0.0001, 0.0001, 0.0001", 0, 1, true, false, "per-algorithm delta")),
          list_of(open_unit("gamma", "0.0001, 0.0001, 0.0001", "per-algorithm gamma")),
          real_in("delta_prime", "0.001", 0, 0.5, true, true, "slack delta'"),
      };
    case K::lowerbound_divergence:
      return {
          real_in("tau", "0.1", 0, 0.25, true, true, "prior half-width"),
          list_of(count("m_list", "1, 100, 1000, 10000", 1, "sample sizes")),
          trials("100000", 1000),
          level(),
      };
    case K::lowerbound_scaling:
      return {
          real_in("tau", "0.1", 0, 0.25, true, true, "prior half-width"),
          list_of(count("ks", "1, 2, 4, 8", 1, "rounds, ascending")),
          open_unit("rho_target", "0.1", "full-game disagreement target"),
          count("games", "200000", 1000, "games per probe"),
          real_in("growth", "1.25", 1, kInf, true, false, "m grid ratio"),
          count("m_ceiling", "4194304", 1, "largest m searched"),
      };
    case K::naive_tightness:
      return {
          list_of(count("ks", "1, 2, 5, 10", 1, "coordinate counts")),
          real_in("grid.h", "0.25", 0, 1, true, false, "grid step of the per-coordinate algorithm"),
          count("n", "1600", 1, "samples per coordinate"),
          probability("source.p", "0.5", "coin mean of every coordinate"),
          trials("100000", 1000),
          level(),
      };
    case K::invariance:
      return {
          choice("wrapper", "order", {"order", "label", "suff_stat"}, "wrapper under test"),
          real_in("grid.h", "0.25", 0, 1, true, false, "grid step of the base algorithm"),
          count("n", "400", 1, "sample size"),
          probability("source.p", "0.3", "Bernoulli source mean"),
          trials("10000"),
          level(),
      };
  }
  throw InternalError("unhandled experiment kind");
}

// --- parsing ---

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool valid_key(std::string_view key) {
  if (key.empty()) return false;
  return std::all_of(key.begin(), key.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  });
}

struct RawEntry {
  std::string value;
  std::size_t line = 0;
};

bool parse_double(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end && std::isfinite(out);
}

bool parse_int(const std::string& s, std::int64_t& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  if (ec == std::errc() && ptr == end) return true;
  double d = 0;  // accept integral scientific forms such as 1e5
  if (parse_double(s, d) && d == std::floor(d) && std::abs(d) < 9e15) {
    out = static_cast<std::int64_t>(d);
    return true;
  }
  return false;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  if (!s.empty() && s.back() == ',') out.push_back("");
  return out;
}

std::string range_text(const ParamSpec& s) {
  std::string lo = s.lo <= -kInf ? "-inf" : format_real(s.lo);
  std::string hi = s.hi >= kInf ? "inf" : format_real(s.hi);
  return std::string(s.lo_open ? "(" : "[") + lo + ", " + hi + (s.hi_open ? ")" : "]");
}

bool in_range(const ParamSpec& s, double x) {
  if (s.lo_open ? !(x > s.lo) : !(x >= s.lo)) return false;
  if (s.hi_open ? !(x < s.hi) : !(x <= s.hi)) return false;
  return true;
}

// Converts one raw value; appends issues and returns false on failure.
bool convert(const ParamSpec& spec, const std::string& raw, std::size_t line, ParamValue& out,
             std::vector<ConfigIssue>& issues) {
  auto issue = [&](std::string msg) {
    issues.push_back({line, 0, spec.key, std::move(msg)});
    return false;
  };
  switch (spec.type) {
    case ParamType::text:
      if (!spec.choices.empty() &&
          std::find(spec.choices.begin(), spec.choices.end(), raw) == spec.choices.end()) {
        std::string all;
        for (const auto& c : spec.choices) all += (all.empty() ? "" : ", ") + c;
        return issue("'" + raw + "' is not one of {" + all + "}");
      }
      out = raw;
      return true;
    case ParamType::real: {
      double x = 0;
      if (!parse_double(raw, x)) return issue("'" + raw + "' is not a real number");
      if (!in_range(spec, x)) return issue(raw + " is outside " + range_text(spec));
      out = x;
      return true;
    }
    case ParamType::integer: {
      std::int64_t x = 0;
      if (!parse_int(raw, x)) return issue("'" + raw + "' is not an integer");
      if (!in_range(spec, static_cast<double>(x))) return issue(raw + " is outside " + range_text(spec));
      out = x;
      return true;
    }
    case ParamType::real_list: {
      std::vector<double> xs;
      for (const auto& item : split_list(raw)) {
        double x = 0;
        if (!parse_double(item, x)) return issue("list element '" + item + "' is not a real number");
        if (!in_range(spec, x)) return issue("list element " + item + " is outside " + range_text(spec));
        xs.push_back(x);
      }
      if (xs.empty()) return issue("list is empty");
      out = std::move(xs);
      return true;
    }
    case ParamType::integer_list: {
      std::vector<std::int64_t> xs;
      for (const auto& item : split_list(raw)) {
        std::int64_t x = 0;
        if (!parse_int(item, x)) return issue("list element '" + item + "' is not an integer");
        if (!in_range(spec, static_cast<double>(x))) {
          return issue("list element " + item + " is outside " + range_text(spec));
        }
        xs.push_back(x);
      }
      if (xs.empty()) return issue("list is empty");
      out = std::move(xs);
      return true;
    }
  }
  return false;
}

// Cross-key constraints that single-key ranges cannot express.
void cross_check(ExperimentConfig& cfg, std::vector<ConfigIssue>& issues) {
  using K = ExperimentKind;
  auto has = [&](const char* key) { return cfg.params.count(key) > 0; };
  auto issue = [&](std::string key, std::string msg) { issues.push_back({0, 0, std::move(key), std::move(msg)}); };
  auto grid_integral = [&] {
    if (!has("grid.h")) return;
    const double h = cfg.real("grid.h");
    if (std::abs(std::round(1.0 / h) * h - 1.0) > 1e-9) issue("grid.h", "1/grid.h must be an integer");
  };
  auto sums_to_one = [&](const char* key) {
    if (!has(key)) return;
    double total = 0;
    for (double p : cfg.reals(key)) total += p;
    if (std::abs(total - 1.0) > 1e-9) issue(key, "probabilities must sum to 1");
  };
  auto hh_slack = [&] {
    if (has("hh.nu") && has("hh.eps") && cfg.real("hh.eps") > cfg.real("hh.nu") / 2) {
      issue("hh.eps", "hh.eps must be at most hh.nu/2");
    }
  };
  auto ascending = [&](const char* key) {
    if (!has(key)) return;
    const auto& ks = cfg.integers(key);
    for (std::size_t i = 1; i < ks.size(); ++i) {
      if (ks[i] <= ks[i - 1]) {
        issue(key, "must be strictly ascending");
        return;
      }
    }
  };
  auto same_length = [&](const char* a, const char* b) {
    if (has(a) && has(b) && cfg.reals(a).size() != cfg.reals(b).size()) {
      issue(b, std::string(b) + " must have as many entries as " + a);
    }
  };

  switch (cfg.experiment) {
    case K::meter:
    case K::boost:
      grid_integral();
      sums_to_one("source.probs");
      hh_slack();
      break;
    case K::compose_naive:
    case K::compose_pipeline:
    case K::naive_tightness:
    case K::invariance:
      grid_integral();
      break;
    case K::calc_theorem1:
      if (has("n_list") && cfg.reals("n_list").size() < 2) issue("n_list", "needs at least 2 entries");
      break;
    case K::calc_pg:
      same_length("eps", "delta");
      same_length("eps", "gamma");
      break;
    case K::lowerbound_scaling:
      ascending("ks");
      break;
    case K::lowerbound_divergence:
      break;
  }
}

template <class T>
const T& get(const ExperimentConfig& cfg, const std::string& key) {
  auto it = cfg.params.find(key);
  if (it == cfg.params.end()) throw ConfigError("config has no key '" + key + "'");
  const T* v = std::get_if<T>(&it->second);
  if (!v) throw ConfigError("config key '" + key + "' has a different type");
  return *v;
}

std::string value_text(const ParamValue& v) {
  struct {
    std::string operator()(double x) const { return format_real(x); }
    std::string operator()(std::int64_t x) const { return std::to_string(x); }
    std::string operator()(const std::string& x) const { return x; }
    std::string operator()(const std::vector<double>& xs) const {
      std::string out;
      for (double x : xs) out += (out.empty() ? "" : ", ") + format_real(x);
      return out;
    }
    std::string operator()(const std::vector<std::int64_t>& xs) const {
      std::string out;
      for (auto x : xs) out += (out.empty() ? "" : ", ") + std::to_string(x);
      return out;
    }
  } visitor;
  return std::visit(visitor, v);
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  throw InternalError("unhandled experiment kind");
}

ExperimentKind parse_experiment_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  throw ConfigError("unknown experiment '" + std::string(name) + "'");
}

const std::vector<ExperimentKind>& all_experiment_kinds() {
  static const std::vector<ExperimentKind> kinds = [] {
    std::vector<ExperimentKind> out;
    for (const auto& [k, n] : kKindNames) out.push_back(k);
    return out;
  }();
  return kinds;
}

const std::vector<ParamSpec>& experiment_schema(ExperimentKind kind) {
  static const std::map<ExperimentKind, std::vector<ParamSpec>> schemas = [] {
    std::map<ExperimentKind, std::vector<ParamSpec>> out;
    for (const auto& [k, n] : kKindNames) out[k] = build_schema(k);
    return out;
  }();
  return schemas.at(kind);
}

double ExperimentConfig::real(const std::string& key) const { return get<double>(*this, key); }
std::int64_t ExperimentConfig::integer(const std::string& key) const { return get<std::int64_t>(*this, key); }
const std::string& ExperimentConfig::text(const std::string& key) const { return get<std::string>(*this, key); }
const std::vector<double>& ExperimentConfig::reals(const std::string& key) const {
  return get<std::vector<double>>(*this, key);
}
const std::vector<std::int64_t>& ExperimentConfig::integers(const std::string& key) const {
  return get<std::vector<std::int64_t>>(*this, key);
}

std::string ConfigIssue::describe() const {
  std::string where;
  if (line > 0) where = "line " + std::to_string(line) + (column > 0 ? ", column " + std::to_string(column) : "") + ": ";
  return where + (key.empty() ? "" : "'" + key + "': ") + message;
}

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::string out = "invalid configuration (" + std::to_string(issues.size()) + " issue" +
                    (issues.size() == 1 ? "" : "s") + ")";
  for (const auto& i : issues) out += "\n  " + i.describe();
  return out;
}

}  // namespace

ConfigValidationError::ConfigValidationError(std::vector<ConfigIssue> issues)
    : ConfigError(join_issues(issues)), issues_(std::move(issues)) {}

ExperimentConfig validate_config(std::string_view text, const std::vector<std::string>& overrides) {
  std::vector<ConfigIssue> issues;
  std::map<std::string, RawEntry> raw;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      const auto col = line.find_first_not_of(" \t");
      issues.push_back({line_no, col + 1, "", "expected 'key = value'"});
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    if (!valid_key(key)) {
      const auto col = line.find_first_not_of(" \t");
      issues.push_back({line_no, (col == std::string_view::npos ? 0 : col) + 1, key,
                        "malformed key (letters, digits, '_' and '.' only)"});
      continue;
    }
    if (raw.count(key)) {
      issues.push_back({line_no, 1, key, "duplicate key (first set on line " + std::to_string(raw[key].line) + ")"});
      continue;
    }
    raw[key] = RawEntry{trim(line.substr(eq + 1)), line_no};
  }

  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(std::string_view(o).substr(0, eq));
    if (eq == std::string::npos || !valid_key(key)) {
      issues.push_back({0, 0, "", "override '" + o + "' is not key=value"});
      continue;
    }
    raw[key] = RawEntry{trim(std::string_view(o).substr(eq + 1)), 0};
  }

  ExperimentConfig cfg;
  bool have_kind = false;
  if (auto it = raw.find("experiment"); it == raw.end()) {
    issues.push_back({0, 0, "experiment", "missing required key"});
  } else {
    try {
      cfg.experiment = parse_experiment_kind(it->second.value);
      have_kind = true;
    } catch (const ConfigError& e) {
      issues.push_back({it->second.line, 0, "experiment", e.what()});
    }
    raw.erase(it);
  }

  if (auto it = raw.find("root_seed"); it == raw.end()) {
    cfg.root_seed = std::string(kDefaultRootSeed);
    cfg.warnings.push_back("root_seed not set; using the documented default " + cfg.root_seed);
  } else {
    std::string seed = it->second.value;
    std::transform(seed.begin(), seed.end(), seed.begin(), [](unsigned char c) { return std::tolower(c); });
    try {
      SeedKey::from_hex(seed);
      cfg.root_seed = seed;
    } catch (const ConfigError& e) {
      issues.push_back({it->second.line, 0, "root_seed", e.what()});
    }
    raw.erase(it);
  }

  if (auto it = raw.find("output_dir"); it != raw.end()) {
    if (it->second.value.empty()) issues.push_back({it->second.line, 0, "output_dir", "must not be empty"});
    cfg.output_dir = it->second.value;
    raw.erase(it);
  }

  if (auto it = raw.find("threads"); it != raw.end()) {
    std::int64_t t = 0;
    if (!parse_int(it->second.value, t) || t < 0 || t > 4096) {
      issues.push_back({it->second.line, 0, "threads", "'" + it->second.value + "' is not an integer in [0, 4096]"});
    } else {
      cfg.threads = static_cast<unsigned>(t);
    }
    raw.erase(it);
  }

  if (have_kind) {
    const auto& schema = experiment_schema(cfg.experiment);
    for (const auto& spec : schema) {
      auto it = raw.find(spec.key);
      ParamValue v;
      if (it == raw.end()) {
        if (convert(spec, spec.default_text, 0, v, issues)) cfg.params[spec.key] = std::move(v);
      } else {
        if (convert(spec, it->second.value, it->second.line, v, issues)) cfg.params[spec.key] = std::move(v);
        raw.erase(it);
      }
    }
    for (const auto& [key, entry] : raw) {
      issues.push_back({entry.line, 0, key,
                        "unknown key for experiment " + std::string(to_string(cfg.experiment))});
    }
    cross_check(cfg, issues);
  }

  if (!issues.empty()) throw ConfigValidationError(std::move(issues));
  return cfg;
}

std::string format_real(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw InternalError("format_real failed");
  return std::string(buf, ptr);
}

std::string serialize(const ExperimentConfig& cfg) {
  std::string out;
  out += "experiment = " + std::string(to_string(cfg.experiment)) + "\n";
  out += "root_seed = " + cfg.root_seed + "\n";
  out += "output_dir = " + cfg.output_dir + "\n";
  out += "threads = " + std::to_string(cfg.threads) + "\n";
  for (const auto& [key, value] : cfg.params) out += key + " = " + value_text(value) + "\n";
  return out;
}

}  // namespace replicalab
