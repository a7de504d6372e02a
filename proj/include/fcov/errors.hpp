#pragma once

#include <stdexcept>
#include <string>

namespace fcov {

// Input is structurally valid but not invertible / has no usable spectrum.
struct SingularInput : std::runtime_error {
  explicit SingularInput(const std::string& what) : std::runtime_error(what) {}
};

// A computation produced values outside its guaranteed range (beyond
// round-off tolerances), indicating a logic or conditioning problem.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A configuration is syntactically valid but describes a degenerate problem.
struct DegenerateConfig : std::invalid_argument {
  explicit DegenerateConfig(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace fcov
