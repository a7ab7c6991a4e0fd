#pragma once

#include <stdexcept>
#include <string>

namespace sketchattn {

/// Dimension mismatch between matrix operands.
struct ShapeError : std::invalid_argument {
  explicit ShapeError(const std::string& what) : std::invalid_argument(what) {}
};

/// exp() argument beyond the double range; raised instead of clamping so the
/// scale blow-up of the softmax kernel stays visible.
struct OverflowError : std::runtime_error {
  explicit OverflowError(const std::string& what) : std::runtime_error(what) {}
};

/// Iterative inverse residual stopped decreasing.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// Matrix file or CSV content could not be parsed.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Bad command line or config file input.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sketchattn
