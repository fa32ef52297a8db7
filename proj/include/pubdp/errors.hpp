#ifndef PUBDP_ERRORS_HPP
#define PUBDP_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pubdp {

/// Invalid algorithm parameter (budgets, radii, fractions out of range, ...).
class ParameterError : public std::invalid_argument {
 public:
  explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// Rejected input data (non-finite values, asymmetric matrices, ...).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Dataset has the wrong number of rows for the operation.
class ArityError : public std::invalid_argument {
 public:
  explicit ArityError(const std::string& what) : std::invalid_argument(what) {}
};

/// Public data too degenerate to build a usable preconditioner.
class DegenerateDataError : public std::runtime_error {
 public:
  explicit DegenerateDataError(const std::string& what) : std::runtime_error(what) {}
};

/// Configuration file failed validation (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pubdp

#endif  // PUBDP_ERRORS_HPP
