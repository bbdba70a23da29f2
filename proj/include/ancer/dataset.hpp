#pragma once

#include <cstddef>
#include <vector>

namespace ancer {

struct Dataset {
  std::vector<std::vector<double>> inputs;
  std::vector<std::size_t> labels;

  std::size_t size() const noexcept { return inputs.size(); }
  bool empty() const noexcept { return inputs.empty(); }
  std::size_t dim() const noexcept { return inputs.empty() ? 0 : inputs.front().size(); }
  // One past the largest label; 0 for an empty set.
  std::size_t num_classes() const noexcept;
};

// Checks equal input dimensions, matching label count and, when num_classes
// is non-zero, that every label is below it. Throws InvalidInputError.
void validate(const Dataset& data, std::size_t num_classes = 0);

}  // namespace ancer
