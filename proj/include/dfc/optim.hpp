#pragma once

// Quasi-Newton minimization with finite-difference gradients.

#include "dfc/common.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dfc {

struct BfgsOptions {
  int max_iter = 200;
  double grad_tol = 1e-5;  // infinity norm of the gradient
  double rel_tol = 1e-8;   // relative decrease of the objective
  double fd_step = 1e-5;
  bool central = true;     // central or forward differences
  double max_step = 5.0;   // cap on the first trial step length
};

struct BfgsResult {
  Vector x;
  double f = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
  std::vector<double> trace;  // objective after each accepted step
};

using Objective = std::function<double(const Vector&)>;

// Finite-difference gradient; non-finite side values fall back to the other side.
Vector numeric_gradient(const Objective& f, const Vector& x, double fx, double step, bool central, int* evals = nullptr);

// Minimizes f. Non-finite objective values are treated as rejected points.
BfgsResult minimize_bfgs(const Objective& f, const Vector& x0, const BfgsOptions& opt = {});

// Parameter maps onto constrained ranges.
double softplus(double x);
double softplus_inv(double y);
inline double nu_of(double x) { return 2.0 + softplus(x); }
double nu_inv(double nu);

}  // namespace dfc
