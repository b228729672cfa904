#pragma once

#include <stdexcept>
#include <string>

namespace sbpfdtd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Vector or matrix sizes that do not match the operator they are applied to.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Component, face or axis combinations that are not part of the staggered layout.
class LayoutError : public Error {
public:
  using Error::Error;
};

/// Invalid user configuration (grid, materials, boundaries, scenario values).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Numerical failure, e.g. a non-converged eigen-solve.
class NumericalError : public Error {
public:
  using Error::Error;
};

} // namespace sbpfdtd
