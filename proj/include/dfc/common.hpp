#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace dfc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Error hierarchy. Everything the library throws derives from dfc::Error so
// callers (the CLI in particular) can map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input outside the mathematical domain of an operation (non-PD matrix,
// |rho| >= 1, singular scale, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Iterative routine failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Matrix does not have the block structure a BlockSpec promises.
class StructureError : public Error {
 public:
  using Error::Error;
};

// Invalid model specification (partition mismatch, unsupported combination).
class SpecError : public Error {
 public:
  using Error::Error;
};

// Recursion produced a non-finite value.
class FilterDivergence : public Error {
 public:
  FilterDivergence(const std::string& what, Index step) : Error(what), step_(step) {}
  Index step() const { return step_; }

 private:
  Index step_;
};

// Bad user input: files, configs, command-line values.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace dfc
