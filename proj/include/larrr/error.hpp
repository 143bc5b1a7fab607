#pragma once

#include <stdexcept>
#include <string>

namespace larrr {

/// Bad input: malformed files, invalid parameters, violated preconditions.
/// The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation that could not be completed (singular systems, eigensolver
/// failure, simulation blow-up). The CLI maps this to exit code 1.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace larrr
