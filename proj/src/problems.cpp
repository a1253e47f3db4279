#include "replicalab/problems.hpp"

#include <algorithm>
#include <boost/random/binomial_distribution.hpp>
#include <cmath>
#include <functional>
#include <map>
#include <numeric>

namespace replicalab {

void validate_probabilities(std::span<const double> probs) {
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw ValidationError("probabilities must be finite and non-negative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw ValidationError("probabilities sum to " + std::to_string(total) + ", not 1");
  }
}

void validate_discrete(const DiscreteDistribution& dist) {
  dist.validate();
  std::vector<Element> sorted = dist.support;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ValidationError("distribution support elements must be distinct");
  }
}

DiscreteDistribution point_mass(Element x) { return {{x}, {1.0}}; }

DiscreteDistribution bernoulli(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("Bernoulli mean outside [0,1]");
  return {{0.0, 1.0}, {1.0 - p, p}};
}

void BernoulliProduct::validate() const {
  if (p.empty()) throw ValidationError("Bernoulli product needs at least one coordinate");
  for (double v : p) {
    if (!(v >= 0.0 && v <= 1.0)) throw ValidationError("Bernoulli product mean outside [0,1]");
  }
}

Population population_of(const DiscreteDistribution& dist) {
  validate_discrete(dist);
  return {dist};
}

Population population_of(const BernoulliProduct& product) {
  product.validate();
  Population pop;
  pop.reserve(product.p.size());
  for (double p : product.p) pop.push_back(bernoulli(p));
  return pop;
}

// --- SampleSet -------------------------------------------------------------

SampleSet SampleSet::from_items(std::vector<Element> items) {
  SampleSet s;
  s.items_ = std::move(items);
  s.size_ = s.items_.size();
  s.has_items_ = true;
  s.build_histogram();
  return s;
}

SampleSet SampleSet::from_counts(std::vector<Element> values, std::vector<std::uint64_t> counts) {
  if (values.size() != counts.size()) {
    throw DomainError("SampleSet::from_counts: values and counts differ in length");
  }
  SampleSet s;
  if (std::adjacent_find(values.begin(), values.end(), std::greater_equal<>()) == values.end()) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (counts[i] > 0) s.histogram_.emplace_back(values[i], counts[i]);
    }
  } else {
    std::map<Element, std::uint64_t> merged;
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (counts[i] > 0) merged[values[i]] += counts[i];
    }
    s.histogram_.assign(merged.begin(), merged.end());
  }
  for (const auto& [v, c] : s.histogram_) s.size_ += c;
  return s;
}

void SampleSet::build_histogram() {
  std::vector<Element> sorted = items_;
  std::sort(sorted.begin(), sorted.end());
  histogram_.clear();
  for (Element x : sorted) {
    if (!histogram_.empty() && histogram_.back().first == x) {
      ++histogram_.back().second;
    } else {
      histogram_.emplace_back(x, 1);
    }
  }
}

std::span<const Element> SampleSet::items() const {
  if (!has_items_) throw DomainError("sample set holds only a histogram; item order unavailable");
  return items_;
}

std::vector<Element> SampleSet::materialize() const {
  if (has_items_) return items_;
  std::vector<Element> out;
  out.reserve(size_);
  for (const auto& [v, c] : histogram_) out.insert(out.end(), c, v);
  return out;
}

std::uint64_t SampleSet::count(Element x) const {
  auto it = std::lower_bound(histogram_.begin(), histogram_.end(), x,
                             [](const auto& entry, Element v) { return entry.first < v; });
  return (it != histogram_.end() && it->first == x) ? it->second : 0;
}

double SampleSet::frequency(Element x) const {
  if (size_ == 0) throw DomainError("frequency of an empty sample set");
  return static_cast<double>(count(x)) / static_cast<double>(size_);
}

double SampleSet::mean() const {
  if (size_ == 0) throw DomainError("mean of an empty sample set");
  // histogram order makes the sum independent of the representation
  double total = 0.0;
  for (const auto& [v, c] : histogram_) total += v * static_cast<double>(c);
  return total / static_cast<double>(size_);
}

SampleSet SampleSet::map(const std::function<Element(Element)>& f) const {
  if (has_items_) {
    std::vector<Element> mapped(items_.size());
    std::transform(items_.begin(), items_.end(), mapped.begin(), f);
    return from_items(std::move(mapped));
  }
  std::vector<Element> values;
  std::vector<std::uint64_t> counts;
  for (const auto& [v, c] : histogram_) {
    values.push_back(f(v));
    counts.push_back(c);
  }
  return from_counts(std::move(values), std::move(counts));
}

// --- sampling --------------------------------------------------------------

std::uint64_t binomial(UniformStream& stream, std::uint64_t n, double p) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  boost::random::binomial_distribution<long long, double> dist(static_cast<long long>(n), p);
  return static_cast<std::uint64_t>(dist(stream));
}

SampleSet sample(const DiscreteDistribution& dist, std::size_t n, const SeedKey& key,
                 std::uint64_t lane) {
  if (n == 0) throw ParameterError("sample: n must be at least 1");
  validate_discrete(dist);
  std::vector<double> cumulative(dist.size());
  std::partial_sum(dist.probs.begin(), dist.probs.end(), cumulative.begin());
  // last element with positive mass absorbs the rounding slack of the cumulative sum
  std::size_t last = dist.size() - 1;
  while (last > 0 && dist.probs[last] == 0.0) --last;

  std::vector<Element> items(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = static_cast<double>(random_bits(key, lane, i) >> 11) * 0x1.0p-53;
    auto it = std::upper_bound(cumulative.begin(), cumulative.begin() + static_cast<std::ptrdiff_t>(last), u);
    items[i] = dist.support[static_cast<std::size_t>(it - cumulative.begin())];
  }
  return SampleSet::from_items(std::move(items));
}

SampleSet sample_counts(const DiscreteDistribution& dist, std::size_t n, const SeedKey& key,
                        std::uint64_t lane) {
  if (n == 0) throw ParameterError("sample_counts: n must be at least 1");
  validate_discrete(dist);
  UniformStream stream(key, lane);
  std::vector<std::uint64_t> counts(dist.size(), 0);
  std::uint64_t remaining = n;
  double mass_left = 1.0;
  for (std::size_t i = 0; i < dist.size() && remaining > 0; ++i) {
    if (i + 1 == dist.size() || mass_left <= dist.probs[i]) {
      counts[i] = remaining;
      remaining = 0;
      break;
    }
    const double p = std::clamp(dist.probs[i] / mass_left, 0.0, 1.0);
    counts[i] = binomial(stream, remaining, p);
    remaining -= counts[i];
    mass_left -= dist.probs[i];
  }
  return SampleSet::from_counts(dist.support, std::move(counts));
}

Dataset sample(const BernoulliProduct& product, std::size_t n, const SeedKey& key) {
  product.validate();
  Dataset parts;
  parts.reserve(product.p.size());
  for (std::size_t j = 0; j < product.p.size(); ++j) {
    parts.push_back(sample(bernoulli(product.p[j]), n, key, j));
  }
  return parts;
}

// --- problems --------------------------------------------------------------

namespace {

bool all_in_unit_interval(const Output& out) {
  return !out.empty() && std::all_of(out.values().begin(), out.values().end(),
                                     [](double v) { return v >= 0.0 && v <= 1.0; });
}

}  // namespace

StatProblem mean_estimation_problem(double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("mean estimation: alpha must be positive");
  StatProblem p;
  p.name = "mean_estimation";
  p.accuracy_params = {{"alpha", alpha}};
  p.in_output_space = all_in_unit_interval;
  p.validity = [alpha](const GroundTruth& truth, const Output& out) {
    if (truth.means.size() != out.size()) {
      throw DomainError("mean estimation: output dimension differs from ground truth");
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
      // slack for decimal round-off
      if (std::abs(out.values()[i] - truth.means[i]) > alpha + 1e-12) return false;
    }
    return true;
  };
  return p;
}

StatProblem heavy_hitters_problem(double nu, double eps) {
  if (!(nu > 0.0 && nu <= 1.0) || !(eps > 0.0 && eps < nu)) {
    throw ParameterError("heavy hitters: need 0 < eps < nu <= 1");
  }
  StatProblem p;
  p.name = "heavy_hitters";
  p.accuracy_params = {{"nu", nu}, {"eps", eps}};
  p.in_output_space = [](const Output& out) {
    return std::is_sorted(out.values().begin(), out.values().end()) &&
           std::adjacent_find(out.values().begin(), out.values().end()) == out.values().end();
  };
  p.validity = [nu, eps](const GroundTruth& truth, const Output& out) {
    if (!truth.dist) throw DomainError("heavy hitters validity needs the true masses");
    const auto& d = *truth.dist;
    auto listed = [&](Element x) {
      return std::binary_search(out.values().begin(), out.values().end(), x);
    };
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (d.probs[i] >= nu && !listed(d.support[i])) return false;
      if (d.probs[i] <= nu - eps && listed(d.support[i])) return false;
    }
    // elements outside the support have mass 0 <= nu - eps
    for (double x : out.values()) {
      if (std::find(d.support.begin(), d.support.end(), x) == d.support.end()) return false;
    }
    return true;
  };
  return p;
}

StatProblem best_arm_problem(double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("best arm: alpha must be positive");
  StatProblem p;
  p.name = "best_arm";
  p.accuracy_params = {{"alpha", alpha}};
  p.in_output_space = [](const Output& out) {
    return out.size() == 1 && out.as_scalar() >= 0 && out.as_scalar() == std::floor(out.as_scalar());
  };
  p.validity = [alpha](const GroundTruth& truth, const Output& out) {
    const auto arm = static_cast<std::size_t>(out.as_scalar());
    if (arm >= truth.means.size()) throw DomainError("best arm: arm index out of range");
    const double best = *std::max_element(truth.means.begin(), truth.means.end());
    return truth.means[arm] >= best - alpha - 1e-12;
  };
  return p;
}

StatProblem threshold_sign_problem(double tau) {
  if (!(tau > 0.0 && tau < 0.25)) throw ParameterError("threshold sign: tau must lie in (0, 1/4)");
  StatProblem p;
  p.name = "threshold_sign";
  p.accuracy_params = {{"tau", tau}};
  p.in_output_space = [](const Output& out) {
    return out.size() == 1 && (out.as_scalar() == 1.0 || out.as_scalar() == -1.0);
  };
  p.validity = [tau](const GroundTruth& truth, const Output& out) {
    const double theta = truth.means.at(0);
    if (theta <= 0.5 - tau) return out.as_scalar() < 0;
    if (theta >= 0.5 + tau) return out.as_scalar() > 0;
    return true;
  };
  return p;
}

bool is_valid(const StatProblem& problem, const GroundTruth& truth, const Output& output) {
  if (!problem.in_output_space(output)) {
    throw DomainError(problem.name + ": output " + output.to_string() + " outside the output space");
  }
  return problem.validity(truth, output);
}

}  // namespace replicalab
