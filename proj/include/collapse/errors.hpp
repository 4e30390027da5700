#pragma once

#include <stdexcept>
#include <string>

namespace collapse {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shape or factor mismatch between operands.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A state or amplitude tuple violates a normalization constraint.
class NormalizationError : public Error {
 public:
  using Error::Error;
};

// Projection onto a subspace carrying (numerically) zero probability.
class ZeroProbabilityError : public Error {
 public:
  using Error::Error;
};

// Summands of a projector sum fail pairwise orthogonality.
class OrthogonalityError : public Error {
 public:
  using Error::Error;
};

// Grid construction or grid compatibility violation.
class GridError : public Error {
 public:
  using Error::Error;
};

// Bad experiment configuration (CLI / config file level).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace collapse
