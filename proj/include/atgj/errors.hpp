#pragma once

#include <stdexcept>
#include <string>

namespace atgj {

/// Base class for all library errors.
class error : public std::runtime_error {
 public:
  explicit error(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid user-supplied parameter (counts, ranges, unknown presets).
class parameter_error : public error {
 public:
  using error::error;
};

/// Argument outside the mathematical domain of an operation.
class domain_error : public error {
 public:
  using error::error;
};

/// A numerical routine failed (eigensolver non-convergence, node at a pole).
class numerical_error : public error {
 public:
  using error::error;
};

/// Macroscopic state became unphysical (rho <= 0 or T <= 0).
class state_error : public error {
 public:
  using error::error;
};

/// Solver blow-up: non-finite values or unrecoverable state during advance.
class divergence_error : public error {
 public:
  divergence_error(const std::string& what, long step) : error(what), step_index(step) {}
  long step_index;
};

/// Inconsistent run configuration (bad boundary coverage, unsupported mirror, ...).
class config_error : public error {
 public:
  using error::error;
};

/// Requested geometry (extraction line etc.) lies outside the fluid region.
class geometry_error : public error {
 public:
  using error::error;
};

/// Non-finite integrand value detected during quadrature evaluation.
class evaluation_error : public error {
 public:
  using error::error;
};

}  // namespace atgj
