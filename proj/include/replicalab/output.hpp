#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace replicalab {

/// Value produced by an algorithm: a scalar, a sorted element list, an arm
/// index, a sign, or a tuple of those. Stored as a flat vector of doubles so
/// outputs compare, hash and sort uniformly; tuples carry per-component
/// length prefixes so different splits never compare equal.
class Output {
 public:
  Output() = default;
  explicit Output(std::vector<double> values) : values_(std::move(values)) {}

  static Output scalar(double v) { return Output({v}); }
  static Output list(std::vector<double> items) { return Output(std::move(items)); }
  static Output tuple(std::span<const Output> parts);
  static Output tuple(std::initializer_list<Output> parts) {
    return tuple(std::span<const Output>(parts.begin(), parts.size()));
  }

  /// Inverse of tuple(); throws DomainError on a malformed encoding.
  std::vector<Output> components() const;

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  /// First value; throws DomainError when empty.
  double as_scalar() const;

  std::string to_string() const;

  friend bool operator==(const Output&, const Output&) = default;
  friend auto operator<=>(const Output&, const Output&) = default;

 private:
  std::vector<double> values_;
};

}  // namespace replicalab
