#include "dfc/optim.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace dfc {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double softplus_inv(double y) {
  if (!(y > 0.0)) throw DomainError("softplus_inv: argument must be positive");
  return y > 30.0 ? y : std::log(std::expm1(y));
}

double nu_inv(double nu) {
  if (!(nu > 2.0)) throw DomainError("nu_inv: degrees of freedom must exceed 2");
  return softplus_inv(std::min(nu, 1e6) - 2.0);
}

Vector numeric_gradient(const Objective& f, const Vector& x, double fx, double step, bool central, int* evals) {
  const Index k = x.size();
  Vector g(k);
  Vector xp = x;
  int count = 0;
  for (Index j = 0; j < k; ++j) {
    const double h = step * std::max(1.0, std::abs(x(j)));
    xp(j) = x(j) + h;
    const double fp = f(xp);
    ++count;
    double fm = std::numeric_limits<double>::quiet_NaN();
    if (central || !std::isfinite(fp)) {
      xp(j) = x(j) - h;
      fm = f(xp);
      ++count;
    }
    xp(j) = x(j);
    if (std::isfinite(fp) && std::isfinite(fm))
      g(j) = (fp - fm) / (2.0 * h);
    else if (std::isfinite(fp))
      g(j) = (fp - fx) / h;
    else if (std::isfinite(fm))
      g(j) = (fx - fm) / h;
    else
      g(j) = 0.0;
  }
  if (evals) *evals += count;
  return g;
}

BfgsResult minimize_bfgs(const Objective& f, const Vector& x0, const BfgsOptions& opt) {
  BfgsResult res;
  const Index k = x0.size();
  Vector x = x0;
  double fx = f(x);
  res.evaluations = 1;
  if (!std::isfinite(fx)) throw ConvergenceError("minimize_bfgs: objective is not finite at the starting point", fx);
  res.trace.push_back(fx);
  if (k == 0) {
    res.x = x;
    res.f = fx;
    res.converged = true;
    res.message = "no free parameters";
    return res;
  }
  Vector g = numeric_gradient(f, x, fx, opt.fd_step, opt.central, &res.evaluations);
  Matrix h = Matrix::Identity(k, k);
  int small_steps = 0;
  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it;
    if (g.lpNorm<Eigen::Infinity>() < opt.grad_tol) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      break;
    }
    Vector d = -h * g;
    if (!(g.dot(d) < 0.0)) {
      h.setIdentity();
      d = -g;
    }
    double t = 1.0;
    const double dn = d.norm();
    if (dn > opt.max_step) t = opt.max_step / dn;
    const double slope = g.dot(d);
    double f_new = std::numeric_limits<double>::infinity();
    Vector x_new;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      x_new = x + t * d;
      f_new = f(x_new);
      ++res.evaluations;
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (h.isIdentity(0.0)) {
        res.converged = g.lpNorm<Eigen::Infinity>() < 100.0 * opt.grad_tol;
        res.message = "line search failed";
        break;
      }
      h.setIdentity();
      continue;
    }
    const Vector g_new = numeric_gradient(f, x_new, f_new, opt.fd_step, opt.central, &res.evaluations);
    const Vector s = x_new - x;
    const Vector y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (it == 0) h *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Matrix a = Matrix::Identity(k, k) - rho * s * y.transpose();
      h = a * h * a.transpose() + rho * s * s.transpose();
    }
    const double rel = (fx - f_new) / std::max(1.0, std::abs(fx));
    x = x_new;
    fx = f_new;
    g = g_new;
    res.trace.push_back(fx);
    small_steps = rel < opt.rel_tol ? small_steps + 1 : 0;
    if (small_steps >= 2) {
      res.converged = true;
      res.message = "relative tolerance reached";
      res.iterations = it + 1;
      break;
    }
    res.iterations = it + 1;
  }
  if (res.message.empty()) res.message = "iteration limit reached";
  res.x = x;
  res.f = fx;
  res.grad_norm = g.lpNorm<Eigen::Infinity>();
  return res;
}

}  // namespace dfc
