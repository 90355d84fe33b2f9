#ifndef CTMC_TYPES_HPP
#define CTMC_TYPES_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ctmc {

using State = std::uint32_t;

/// Raised when a model file or model construction violates a structural
/// constraint (sign conditions, row-sum conditions, unknown fields).
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised for incompatible run configuration (mismatched windows, grids,
/// memory budget, unavailable rows).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when a solver detects it cannot continue (instability, term
/// budget exceeded). Non-converged-but-usable results are returned with a
/// flag instead of throwing.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Row accessor called beyond the support bound of a matrix.
class UndefinedRowError : public std::runtime_error {
 public:
  explicit UndefinedRowError(State i)
      : std::runtime_error("undefined row " + std::to_string(i)),
        row_(i) {}
  State row() const { return row_; }

 private:
  State row_;
};

}  // namespace ctmc

#endif
