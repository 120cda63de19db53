// SPDX-License-Identifier: MIT
#pragma once

/// @file errors.hpp
/// @brief Exception hierarchy. Each class maps to a process exit code so the
///        CLI can report failures uniformly.

#include <stdexcept>
#include <string>

namespace smot {

/// Base class for all library errors.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Bad input: malformed config, out-of-domain argument, violated precondition.
/// CLI exit code 2.
class validation_error : public error {
 public:
  explicit validation_error(const std::string& what) : error(what) {}
};

/// A numerical routine failed to converge (root not bracketed, iteration cap
/// hit, quadrature error estimate too large). CLI exit code 3.
class convergence_error : public error {
 public:
  explicit convergence_error(const std::string& what) : error(what) {}
};

/// A configured acceptance threshold was exceeded (e.g. hedge violation
/// fraction). CLI exit code 4.
class threshold_error : public error {
 public:
  explicit threshold_error(const std::string& what) : error(what) {}
};

/// Exit codes used by the CLI front end.
enum exit_code : int {
  exit_ok = 0,
  exit_validation = 2,
  exit_convergence = 3,
  exit_threshold = 4,
};

}  // namespace smot
