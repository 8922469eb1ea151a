#pragma once

#include <stdexcept>

namespace bdbc {

/// Bad input data, arguments or configuration.
class InputError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown: failed factorization, degenerate mixture component,
/// diverging iteration.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace bdbc
