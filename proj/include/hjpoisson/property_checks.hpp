#pragma once

#include "hjpoisson/genfunc_net.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hjpoisson {

struct PropertyResult {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double threshold = 0.0;
};

/// Training-independent structural properties, measured on random inputs and random networks.
/// When `model` is given, the identity-at-zero and Casimir checks are repeated on it.
std::vector<PropertyResult> run_property_checks(const GeneratingFunctionNet* model, std::uint64_t seed);

}  // namespace hjpoisson
