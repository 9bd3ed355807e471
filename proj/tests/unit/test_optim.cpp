#include "dfc/optim.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace dfc;
using namespace dfc::testing;

TEST_CASE("minimizes a quadratic and the Rosenbrock function") {
  Matrix a(3, 3);
  a << 4, 1, 0, 1, 3, 0.5, 0, 0.5, 2;
  Vector b(3);
  b << 1, -2, 0.5;
  const Objective quad = [&](const Vector& x) { return 0.5 * x.dot(a * x) - b.dot(x); };
  const BfgsResult q = minimize_bfgs(quad, Vector::Zero(3));
  CHECK(q.converged);
  CHECK(max_abs(q.x - a.ldlt().solve(b)) < 1e-5);

  const Objective rosen = [](const Vector& x) {
    return 100.0 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1.0 - x(0), 2);
  };
  BfgsOptions opt;
  opt.max_iter = 500;
  Vector x0(2);
  x0 << -1.2, 1.0;
  const BfgsResult r = minimize_bfgs(rosen, x0, opt);
  CHECK(max_abs(r.x - Vector::Ones(2)) < 1e-4);
  for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k] <= r.trace[k - 1]);
}

TEST_CASE("non-finite values are rejected") {
  const Objective f = [](const Vector& x) {
    if (x(0) < 0.0) return std::numeric_limits<double>::quiet_NaN();
    return std::pow(x(0) - 0.5, 2);
  };
  const BfgsResult r = minimize_bfgs(f, Vector::Constant(1, 3.0));
  CHECK(std::abs(r.x(0) - 0.5) < 1e-4);
}

TEST_CASE("finite-difference gradient") {
  const Objective f = [](const Vector& x) { return std::sin(x(0)) * std::exp(x(1)); };
  Vector x(2);
  x << 0.3, -0.2;
  const Vector g = numeric_gradient(f, x, f(x), 1e-6, true);
  CHECK(std::abs(g(0) - std::cos(0.3) * std::exp(-0.2)) < 1e-8);
  CHECK(std::abs(g(1) - std::sin(0.3) * std::exp(-0.2)) < 1e-8);
}

TEST_CASE("parameter maps") {
  for (double y : {1e-6, 0.03, 1.0, 40.0}) CHECK(std::abs(softplus(softplus_inv(y)) - y) < 1e-10 * std::max(1.0, y));
  for (double nu : {2.5, 5.0, 30.0, 150.0}) CHECK(std::abs(nu_of(nu_inv(nu)) - nu) < 1e-9 * nu);
  CHECK(softplus(-800.0) >= 0.0);
  CHECK(std::isfinite(softplus(800.0)));
}
