#include "dfc/loadings.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <vector>

using namespace dfc;
using namespace dfc::testing;

TEST_CASE("tau and rho maps") {
  CHECK(max_abs(tau_of_rho(Vector::Zero(3))) == 0.0);
  CHECK(max_abs(rho_of_tau(Vector::Zero(3))) == 0.0);
  Vector rho(2);
  rho << 0.6, 0.0;
  const Vector tau = tau_of_rho(rho);
  CHECK(std::abs(tau(0) - 0.693147) < 1e-6);
  CHECK(tau(1) == 0.0);
  CHECK(max_abs(rho_of_tau(tau) - rho) < 1e-12);
  for (double r1 = -0.95; r1 < 0.96; r1 += 0.05) {
    Vector v(1);
    v << r1;
    CHECK(std::abs(tau_of_rho(v)(0) - std::atanh(r1)) < 1e-12);
  }
  Vector big(2);
  big << 30.0, 40.0;
  const Vector sat = rho_of_tau(big);
  CHECK(sat.allFinite());
  CHECK(sat.norm() <= 1.0);
  CHECK(LoadingState::from_tau(big).omega > 0.0);
  Vector out(2);
  out << 0.8, 0.6;
  CHECK_THROWS_AS(tau_of_rho(out), DomainError);
}

TEST_CASE("bijection over random points") {
  Rng rng(11);
  std::uniform_real_distribution<double> radius(0.0, 0.999);
  for (int rep = 0; rep < 1000; ++rep) {
    const Index r = 1 + rep % 15;
    const Vector tau = random_vector(r, rng);
    CHECK(max_abs(tau_of_rho(rho_of_tau(tau)) - tau) < 1e-10);
    Vector dir = random_vector(r, rng);
    const Vector rho = dir.normalized() * radius(rng);
    CHECK(max_abs(rho_of_tau(tau_of_rho(rho)) - rho) < 1e-10);
  }
  // tiny norms use the series branch
  const Vector tiny = Vector::Constant(3, 1e-9);
  CHECK(max_abs(rho_of_tau(tiny) - tiny) < 1e-20);
}

TEST_CASE("sparsity transfers through the map") {
  Vector rho(4);
  rho << 0.3, 0.0, -0.2, 0.0;
  const Vector tau = tau_of_rho(rho);
  CHECK(tau(1) == 0.0);
  CHECK(tau(3) == 0.0);
  CHECK(tau(0) != 0.0);
  CHECK(max_abs(tau_of_rho(rho) - tau) == 0.0);
}

TEST_CASE("tau jacobian") {
  CHECK(max_abs(tau_jacobian(Vector::Zero(4)) - Matrix::Identity(4, 4)) < 1e-14);
  Vector tau(2);
  tau << 0.693147, 0.0;
  const Matrix j = tau_jacobian(tau);
  CHECK(std::abs(j(0, 0) - 0.64) < 1e-6);
  CHECK(std::abs(j(1, 1) - 0.865617) < 1e-6);
  CHECK(std::abs(j(0, 1)) < 1e-15);

  Rng rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector t = random_vector(15, rng, 0.4);
    const Matrix jt = tau_jacobian(t);
    CHECK(rel_err(jt, fd_jacobian([](const Vector& x) { return rho_of_tau(x); }, t)) < 1e-6);
    CHECK(max_abs(jt - jt.transpose()) < 1e-14);
    CHECK(jt.llt().info() == Eigen::Success);
  }
}

TEST_CASE("sensitivity M") {
  Vector u(2);
  u << 1.0, 1.0;
  const Matrix m0 = sensitivity_M(LoadingState::from_tau(Vector::Zero(2)), u);
  CHECK(max_abs(m0.row(0).transpose() - u) < 1e-15);
  CHECK(max_abs(m0.row(1)) < 1e-15);

  Vector tau(2);
  tau << 0.693147, 0.0;
  const Matrix m = sensitivity_M(LoadingState::from_tau(tau), u);
  CHECK(std::abs(m(0, 0) - 0.64) < 1e-6);
  CHECK(std::abs(m(0, 1) - 0.865617) < 1e-6);
  CHECK(std::abs(m(1, 0) - -0.48) < 1e-6);
  CHECK(std::abs(m(1, 1)) < 1e-12);

  Rng rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const Vector t = random_vector(4, rng, 0.5);
    const Vector uu = random_vector(4, rng);
    auto mu_omega = [&](const Vector& x) {
      const Vector r = rho_of_tau(x);
      Vector out(2);
      out << r.dot(uu), std::sqrt(1.0 - r.squaredNorm());
      return out;
    };
    CHECK(rel_err(sensitivity_M(LoadingState::from_tau(t), uu), fd_jacobian(mu_omega, t)) < 1e-6);
  }
}

TEST_CASE("Moore-Penrose and Tikhonov inverses") {
  Rng rng(15);
  // r = 2: M is square and generically invertible
  for (int rep = 0; rep < 10; ++rep) {
    const LoadingState s = LoadingState::from_tau(random_vector(2, rng, 0.5));
    const Vector u = random_vector(2, rng);
    const Matrix m = sensitivity_M(s, u);
    CHECK(rel_err(moore_penrose_Mplus(s, u), m.inverse()) < 1e-9);
  }
  for (int rep = 0; rep < 20; ++rep) {
    const LoadingState s = LoadingState::from_tau(random_vector(5, rng, 0.5));
    const Vector u = random_vector(5, rng);
    const Matrix m = sensitivity_M(s, u);
    const Matrix mp = moore_penrose_Mplus(s, u);
    // Penrose conditions
    CHECK(max_abs(m * mp * m - m) < 1e-10);
    CHECK(max_abs(mp * m * mp - mp) < 1e-10);
    CHECK(max_abs((mp * m) - (mp * m).transpose()) < 1e-10);
    CHECK(max_abs(tikhonov_Mplus(m, 0.0) - mp) < 1e-10);
  }
  // orthonormal rows
  Matrix o = Matrix::Zero(2, 3);
  o(0, 0) = 1.0;
  o(1, 2) = 1.0;
  CHECK(max_abs(tikhonov_Mplus(o, 0.0) - o.transpose()) < 1e-14);
  // rank one with lambda = 1
  Matrix r1 = Matrix::Zero(2, 2);
  r1(0, 0) = 1.0;
  Matrix expect = Matrix::Zero(2, 2);
  expect(0, 0) = 0.5;
  CHECK(max_abs(tikhonov_Mplus(r1, 1.0) - expect) < 1e-14);
  // infinite penalty limit
  CHECK(max_abs(tikhonov_Mplus(o, 1e12)) < 1e-11);
}

TEST_CASE("Moore-Penrose blows up near parallel U and rho while Tikhonov stays bounded") {
  Rng rng(16);
  const Vector tau = random_vector(3, rng, 0.5);
  const LoadingState s = LoadingState::from_tau(tau);
  const Vector w = random_vector(3, rng);
  double prev = 0.0;
  for (double eps : {1e-1, 1e-2, 1e-4, 1e-6}) {
    const Vector u = 1.3 * s.rho + eps * w;
    const double mp = moore_penrose_Mplus(s, u).norm();
    const double tk = tikhonov_Mplus(s, u, std::exp(3.0)).norm();
    CHECK(mp > prev);
    CHECK(tk < 1.0);
    prev = mp;
  }
  CHECK(prev > 1e4);
  CHECK_THROWS_AS(moore_penrose_Mplus(s, Vector(2.0 * s.rho)), DomainError);
}
