#pragma once

#include <stdexcept>
#include <string>

namespace ccst {

/// Invalid user input: out-of-range parameters, malformed configs, bad tags.
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Numerical failure inside a solver (singular factorization, no convergence).
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ccst
