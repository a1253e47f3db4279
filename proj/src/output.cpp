#include "replicalab/output.hpp"

#include <cmath>
#include <sstream>

#include "replicalab/errors.hpp"

namespace replicalab {

Output Output::tuple(std::span<const Output> parts) {
  std::vector<double> flat;
  for (const Output& part : parts) {
    flat.push_back(static_cast<double>(part.size()));
    flat.insert(flat.end(), part.values_.begin(), part.values_.end());
  }
  return Output(std::move(flat));
}

std::vector<Output> Output::components() const {
  std::vector<Output> parts;
  std::size_t i = 0;
  while (i < values_.size()) {
    const double len = values_[i];
    if (len < 0 || len != std::floor(len) || i + 1 + static_cast<std::size_t>(len) > values_.size()) {
      throw DomainError("Output::components: not a tuple encoding");
    }
    const auto n = static_cast<std::size_t>(len);
    parts.emplace_back(std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(i + 1),
                                           values_.begin() + static_cast<std::ptrdiff_t>(i + 1 + n)));
    i += 1 + n;
  }
  return parts;
}

double Output::as_scalar() const {
  if (values_.empty()) throw DomainError("Output::as_scalar on empty output");
  return values_.front();
}

std::string Output::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (i) os << ' ';
    os << values_[i];
  }
  os << ']';
  return os.str();
}

}  // namespace replicalab
