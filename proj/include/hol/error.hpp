#pragma once

#include <stdexcept>
#include <string>

namespace hol {

// Bad input: malformed files, out-of-range labels, invalid parameters.
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// The optimizer could not produce a usable solution.
class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace hol
