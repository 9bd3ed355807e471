#include "dfc/loadings.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dfc {

namespace {

constexpr double kSeries = 1e-6;

// tanh(x)/x and artanh(x)/x with their removable singularities.
double tanh_ratio(double x) { return x < kSeries ? 1.0 - x * x / 3.0 : std::tanh(x) / x; }
double artanh_ratio(double x) { return x < kSeries ? 1.0 + x * x / 3.0 : std::atanh(x) / x; }

}  // namespace

Vector tau_of_rho(const Vector& rho) {
  const double rr = rho.squaredNorm();
  if (!(rr < 1.0)) {
    std::ostringstream os;
    os << "tau_of_rho: rho'rho = " << rr << " is not below 1";
    throw DomainError(os.str());
  }
  return artanh_ratio(std::sqrt(rr)) * rho;
}

Vector rho_of_tau(const Vector& tau) {
  if (!tau.allFinite()) throw DomainError("rho_of_tau: non-finite tau");
  return tanh_ratio(tau.norm()) * tau;
}

Matrix tau_jacobian(const Vector& tau) {
  const Index r = tau.size();
  const double t = tau.norm();
  if (t < kSeries) {
    // expansion to second order around the origin
    return Matrix::Identity(r, r) * (1.0 - t * t / 3.0) - (2.0 / 3.0) * tau * tau.transpose();
  }
  const double th = std::tanh(t);
  const double perp = th / t;
  const double par = 1.0 - th * th;
  const Vector u = tau / t;
  Matrix p = u * u.transpose();
  return perp * (Matrix::Identity(r, r) - p) + par * p;
}

LoadingState LoadingState::from_tau(const Vector& tau) {
  LoadingState s;
  s.tau = tau;
  s.rho = rho_of_tau(tau);
  // 1 - tanh^2 computed as sech^2 avoids cancellation for large |tau|
  const double t = tau.norm();
  const double c = std::cosh(std::min(t, 350.0));
  s.omega = 1.0 / c;
  s.jac = tau_jacobian(tau);
  return s;
}

LoadingState LoadingState::from_rho(const Vector& rho) {
  return from_tau(tau_of_rho(rho));
}

Matrix sensitivity_M(const LoadingState& s, const Vector& u) {
  if (s.omega < kOmegaFloor) throw DomainError("sensitivity_M: omega below floor (loading on the boundary)");
  Matrix m(2, s.r());
  m.row(0) = u.transpose() * s.jac;
  m.row(1) = -(s.rho.transpose() * s.jac) / s.omega;
  return m;
}

Matrix moore_penrose_Mplus(const LoadingState& s, const Vector& u) {
  if (s.omega < kOmegaFloor) throw DomainError("moore_penrose_Mplus: omega below floor");
  const double uu = u.squaredNorm();
  const double rr = s.rho.squaredNorm();
  const double ur = u.dot(s.rho);
  const double den = uu * rr - ur * ur;
  if (!(den > 1e-14 * std::max(1.0, uu * rr))) {
    std::ostringstream os;
    os << "moore_penrose_Mplus: U and rho are parallel (U'U rho'rho - (U'rho)^2 = " << den << ")";
    throw DomainError(os.str());
  }
  Matrix rhs(s.r(), 2);
  rhs.col(0) = rr * u - ur * s.rho;
  rhs.col(1) = s.omega * (u * ur - uu * s.rho);
  return s.jac.ldlt().solve(rhs) / den;
}

Matrix tikhonov_Mplus(const Matrix& m, double lambda) {
  if (lambda < 0.0) throw DomainError("tikhonov_Mplus: negative penalty");
  Matrix g = m * m.transpose();
  g.diagonal().array() += lambda;
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  const Vector& ev = es.eigenvalues();
  const double cutoff = 1e-12 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  Vector inv = ev.unaryExpr([cutoff](double x) { return x > cutoff ? 1.0 / x : 0.0; });
  const Matrix ginv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
  return m.transpose() * ginv;
}

}  // namespace dfc
