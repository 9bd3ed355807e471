#pragma once

// Factor-loading parametrization: rho_i (correlations of asset i with the
// orthogonalized factors, rho'rho < 1) is mapped to an unconstrained tau_i by
// rescaling its norm through artanh.

#include "dfc/common.hpp"

namespace dfc {

Vector tau_of_rho(const Vector& rho);
Vector rho_of_tau(const Vector& tau);
// d rho / d tau' (symmetric, positive definite).
Matrix tau_jacobian(const Vector& tau);

struct LoadingState {
  Vector tau;
  Vector rho;
  double omega = 1.0;
  Matrix jac;  // d rho / d tau'

  static LoadingState from_tau(const Vector& tau);
  static LoadingState from_rho(const Vector& rho);
  Index r() const { return tau.size(); }
};

inline constexpr double kOmegaFloor = 1e-8;

// M = [d mu/d tau'; d omega/d tau'] = [U'; -rho'/omega] J  (2 x r).
Matrix sensitivity_M(const LoadingState& s, const Vector& u);
// Closed-form Moore-Penrose inverse of M (r x 2). Throws DomainError when U
// and rho are (numerically) parallel.
Matrix moore_penrose_Mplus(const LoadingState& s, const Vector& u);
// M'(MM' + lambda I)^+ with an SVD-based pseudo-inverse (cutoff 1e-12).
Matrix tikhonov_Mplus(const Matrix& m, double lambda);
inline Matrix tikhonov_Mplus(const LoadingState& s, const Vector& u, double lambda) {
  return tikhonov_Mplus(sensitivity_M(s, u), lambda);
}

}  // namespace dfc
