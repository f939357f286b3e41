#pragma once

#include <stdexcept>
#include <string>

namespace ncarl {

// Invalid specs, hyper-parameters, or dimension mismatches.
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// File parsing / writing failures.
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failures (singular subsystems, non-convergence).
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ncarl
