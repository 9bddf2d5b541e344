#pragma once

#include <stdexcept>
#include <string>

namespace ccl {

// Bad input: malformed files, invalid flags, inconsistent shapes.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation produced NaN/inf or otherwise left the valid numeric range.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ccl
