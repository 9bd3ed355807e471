#include "dfc/matcorr.hpp"
#include "dfc/scoredriven.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>

using namespace dfc;
using namespace dfc::testing;

namespace {

ConvTSpec dist_for(DistKind kind, const BlockSpec& b, Rng& rng) {
  switch (kind) {
    case DistKind::Gauss: return ConvTSpec::gauss(b.n());
    case DistKind::MT: return ConvTSpec::mt(b.n(), uniform_vector(1, rng, 4.0, 15.0)(0));
    case DistKind::CT: return ConvTSpec::ct(b.group_sizes, uniform_vector(b.K(), rng, 4.0, 15.0));
    case DistKind::HT: return ConvTSpec::ht(uniform_vector(b.n(), rng, 4.0, 15.0));
  }
  return ConvTSpec::gauss(b.n());
}

Vector random_zeta(Index n, Index r, Index p, Rng& rng) {
  Vector zeta(r * n + p);
  zeta.head(r * n) = random_vector(r * n, rng, 0.25);
  zeta.tail(p) = uniform_vector(p, rng, -0.3, 0.3);
  return zeta;
}

}  // namespace

TEST_CASE("recursion contracts to its mean without innovations") {
  Rng rng(31);
  const Vector mean = random_vector(3, rng);
  const Recursion rec = Recursion::constant(mean, 0.9, 0.1);
  Vector x = mean + Vector::Ones(3);
  for (int t = 0; t < 50; ++t) x = rec.next(x, Vector::Zero(3));
  CHECK(max_abs(x - mean) <= std::pow(0.9, 50) + 1e-12);
  CHECK_THROWS_AS(Recursion::constant(mean, 1.0, 0.1), SpecError);
}

TEST_CASE("correlation score matches finite differences") {
  Rng rng(32);
  for (Structure s : {Structure::FullBlock, Structure::SparseBlock, Structure::DiagonalBlock}) {
    for (DistKind kind : {DistKind::Gauss, DistKind::MT, DistKind::CT, DistKind::HT}) {
      const BlockSpec b = random_block_spec(3, s, rng);
      if (eta_size(b) == 0) continue;
      const CorrScoreModel model(b, dist_for(kind, b, rng));
      const Vector eta = random_eta(b, rng);
      const Vector e = random_vector(b.n(), rng);
      const auto ev = model.evaluate(eta, e);
      const Vector fd = fd_gradient([&](const Vector& x) { return model.evaluate(x, e, false).loglik; }, eta);
      CHECK(rel_err(ev.score, fd) < 1e-5);
      CHECK(ev.info.ldlt().isPositive());
      // log-likelihood equals the dense density with Xi = C^{1/2}
      CHECK(std::abs(ev.loglik - loglik(e, Vector::Zero(b.n()), sym_sqrt(ev.corr), model.dist())) < 1e-10);
    }
  }
  for (Index n : {2, 3, 5}) {
    const CorrScoreModel model = CorrScoreModel::unrestricted(n, ConvTSpec::mt(n, 7.0));
    const Vector g = random_vector(vecl_size(n), rng, 0.3);
    const Vector e = random_vector(n, rng);
    const Vector fd = fd_gradient([&](const Vector& x) { return model.evaluate(x, e, false).loglik; }, g);
    CHECK(rel_err(model.evaluate(g, e).score, fd) < 1e-5);
  }
}

TEST_CASE("sector additivity of the correlation likelihood") {
  Rng rng(33);
  const BlockSpec b({2, 3, 2, 2}, {0, 0, 1, 1}, Structure::SparseBlock);
  const ConvTSpec d = ConvTSpec::ct(b.group_sizes, uniform_vector(4, rng, 4.0, 12.0));
  const CorrScoreModel whole(b, d);
  const Vector eta = random_eta(b, rng);
  const Vector e = random_vector(b.n(), rng);
  double sum = 0.0;
  Index eta_first = 0;
  for (Index s = 0; s < b.num_sectors(); ++s) {
    const BlockSpec sb = b.sector_spec(s);
    const auto [first, count] = b.sector_range(s);
    const CorrScoreModel part(sb, d.slice(first, count));
    sum += part.evaluate(eta.segment(eta_first, part.p()), e.segment(first, count), false).loglik;
    eta_first += part.p();
  }
  CHECK(std::abs(whole.evaluate(eta, e, false).loglik - sum) < 1e-12);
}

TEST_CASE("joint score matches finite differences") {
  Rng rng(34);
  const BlockSpec b({2, 2}, {}, Structure::FullBlock);
  for (int rep = 0; rep < 10; ++rep) {
    const Index r = 2;
    const CoreJointModel model(r, b, dist_for(DistKind::CT, b, rng));
    const Vector zeta = random_zeta(4, r, model.p(), rng);
    const Vector z = random_vector(4, rng);
    const Vector u = random_vector(r, rng);
    const auto ev = model.evaluate(zeta, z, u);
    const Vector fd = fd_gradient([&](const Vector& x) { return model.evaluate(x, z, u, false).loglik; }, zeta);
    CHECK(rel_err(ev.grad_zeta, fd) < 1e-5);
    // the eta block is the correlation score of the residuals
    const auto ce = model.corr_model().evaluate(zeta.tail(model.p()), ev.e, false);
    CHECK(max_abs(ev.grad_zeta.tail(model.p()) - ce.score) < 1e-10);
    // log-likelihood is the dense density of Z with Xi = Lambda_omega C^{1/2}
    Vector mu(4);
    for (Index i = 0; i < 4; ++i) mu(i) = ev.loadings[static_cast<std::size_t>(i)].rho.dot(u);
    const Matrix xi = ev.omega.asDiagonal() * sym_sqrt(ev.corr);
    CHECK(std::abs(ev.loglik - loglik(z, mu, xi, model.dist())) < 1e-10);
  }
}

TEST_CASE("joint score at the origin") {
  Rng rng(35);
  const Index n = 3, r = 2;
  const BlockSpec b({3}, {}, Structure::FullBlock);
  const CoreJointModel model(r, b, ConvTSpec::gauss(n));
  const Vector z = random_vector(n, rng);
  const Vector u = random_vector(r, rng);
  const auto ev = model.evaluate(Vector::Zero(r * n + model.p()), z, u);
  for (Index i = 0; i < n; ++i) CHECK(max_abs(ev.grad_zeta.segment(i * r, r) - u * z(i)) < 1e-12);
}

TEST_CASE("scaled innovations") {
  Rng rng(36);
  const BlockSpec b({2, 2}, {}, Structure::DiagonalBlock);
  const Index r = 3;
  const CoreJointModel model(r, b, ConvTSpec::mt(4, 8.0));
  const Vector zeta = random_zeta(4, r, model.p(), rng);
  const auto ev = model.evaluate(zeta, random_vector(4, rng), random_vector(r, rng));
  CHECK(max_abs(scaled_innovation(ev, r, Scaling::Identity, Vector::Zero(4)) - ev.grad_zeta) == 0.0);
  const Vector mp = scaled_innovation(ev, r, Scaling::MoorePenrose, Vector::Zero(4));
  const Vector tk0 = scaled_innovation(ev, r, Scaling::Tikhonov, Vector::Zero(4));
  CHECK(max_abs(mp - tk0) < 1e-10 * std::max(1.0, max_abs(mp)));
  const Vector tk = scaled_innovation(ev, r, Scaling::Tikhonov, Vector::Constant(4, std::exp(3.0)));
  CHECK(max_abs(tk.head(r * 4)) < max_abs(mp.head(r * 4)));
  // the eta part does not depend on the loading scaling
  CHECK(max_abs(tk.tail(model.p()) - mp.tail(model.p())) < 1e-12);
}

TEST_CASE("constant-parameter filter equals static evaluation") {
  Rng rng(37);
  const Index n = 4, r = 2, T = 30;
  const BlockSpec b({2, 2}, {}, Structure::FullBlock);
  const CoreJointModel model(r, b, ConvTSpec::ct({2, 2}, Vector::Constant(2, 6.0)));
  const Vector mean = random_zeta(n, r, model.p(), rng);
  const Recursion rec(mean, Vector::Constant(mean.size(), 0.9), Vector::Zero(mean.size()));
  Matrix z(T, n), u(T, r);
  for (Index t = 0; t < T; ++t) {
    z.row(t) = random_vector(n, rng).transpose();
    u.row(t) = random_vector(r, rng).transpose();
  }
  const CoreFilterResult res = filter_core_joint(z, u, rec, Vector::Ones(n), Scaling::Tikhonov, model);
  double sum = 0.0;
  for (Index t = 0; t < T; ++t) sum += model.evaluate(mean, z.row(t).transpose(), u.row(t).transpose(), false).loglik;
  CHECK(std::abs(res.loglik - sum) < 1e-9);
  for (Index t = 0; t < T; ++t) CHECK(max_abs(res.path.row(t).transpose() - mean) == 0.0);

  const Recursion frec = Recursion::constant(Vector::Constant(1, 0.2), 0.95, 0.0);
  const FactorFilterResult ff = filter_factor_corr(u, frec, ConvTSpec::gauss(2));
  CHECK(max_abs(ff.gamma.array() - 0.2) < 1e-15);
}

TEST_CASE("filters are deterministic and simulation is seeded") {
  const Index n = 4, r = 2, T = 200;
  const BlockSpec b({2, 2}, {}, Structure::DiagonalBlock);
  const CoreJointModel model(r, b, ConvTSpec::ct({2, 2}, Vector::Constant(2, 7.0)));
  Vector mean = Vector::Constant(r * n + model.p(), 0.2);
  const Recursion rec = Recursion::constant(mean, 0.95, 0.03);
  const Recursion frec = Recursion::constant(Vector::Constant(1, 0.3), 0.97, 0.03);
  const Matrix f = simulate_factor(frec, ConvTSpec::gauss(r), T, 1);
  CHECK(max_abs(f - simulate_factor(frec, ConvTSpec::gauss(r), T, 1)) == 0.0);
  CHECK(max_abs(f - simulate_factor(frec, ConvTSpec::gauss(r), T, 2)) > 0.0);
  const Matrix u = filter_factor_corr(f, frec, ConvTSpec::gauss(r)).u;
  const Matrix z = simulate_core_joint(model, rec, Vector::Ones(n), Scaling::Tikhonov, u, 3);
  CHECK(max_abs(z - simulate_core_joint(model, rec, Vector::Ones(n), Scaling::Tikhonov, u, 3)) == 0.0);
  const auto a = filter_core_joint(z, u, rec, Vector::Ones(n), Scaling::Tikhonov, model);
  const auto c = filter_core_joint(z, u, rec, Vector::Ones(n), Scaling::Tikhonov, model);
  CHECK(a.loglik == c.loglik);
  CHECK(max_abs(a.path - c.path) == 0.0);
}

TEST_CASE("Moore-Penrose and zero-penalty Tikhonov filters coincide") {
  Rng rng(38);
  const Index T = 100;
  for (Index r : {1, 3}) {
    Matrix u(T, r);
    Vector zi(T);
    for (Index t = 0; t < T; ++t) {
      u.row(t) = random_vector(r, rng).transpose();
      zi(t) = 0.3 * u(t, 0) + 0.9 * random_vector(1, rng)(0);
    }
    const Recursion rec = Recursion::constant(Vector::Constant(r, 0.2), 0.95, 0.02);
    const auto mp = filter_loading_decoupled(zi, u, rec, 0.0, 8.0, Scaling::MoorePenrose);
    const auto tk = filter_loading_decoupled(zi, u, rec, 0.0, 8.0, Scaling::Tikhonov);
    CHECK(max_abs(mp.tau - tk.tau) < 1e-8);
  }
}

TEST_CASE("loading step") {
  Rng rng(39);
  const Vector tau = random_vector(3, rng, 0.4);
  const Vector u = random_vector(3, rng);
  const LoadingState st = LoadingState::from_tau(tau);
  const double z0 = st.rho.dot(u);
  const LoadingStep s0 = loading_step(tau, z0, u, 6.0);
  CHECK(std::abs(s0.grad_xi(0)) < 1e-14);
  CHECK(std::abs(s0.grad_xi(1) + 1.0 / st.omega) < 1e-12);
  const LoadingStep s5 = loading_step(tau, 0.3, u, 5.0);
  const double om2 = st.omega * st.omega;
  CHECK(std::abs(s5.info_xi(0) - 1.25 / om2) < 1e-12);
  CHECK(std::abs(s5.info_xi(1) - 1.25 / om2) < 1e-12);

  for (int rep = 0; rep < 20; ++rep) {
    const Index r = 1 + rep % 5;
    const Vector t = random_vector(r, rng, 0.4);
    const Vector uu = random_vector(r, rng);
    const double z = random_vector(1, rng)(0);
    const double nu = rep % 3 == 0 ? kInf : 4.0 + rep;
    const Vector fd = fd_gradient([&](const Vector& x) { return loading_step(x, z, uu, nu).loglik; }, t);
    CHECK(rel_err(loading_step(t, z, uu, nu).grad_tau, fd) < 1e-5);
  }
}

TEST_CASE("equicorrelation steps") {
  CHECK(std::abs(equicorr_jacobian(0.6, 2) - 1.5625) < 1e-12);
  CHECK(std::abs(equicorr_mt_step(0.0, Vector::Zero(3), 8.0).score) < 1e-15);
  // X = 0: only the log-determinant bracket remains
  const double eta = 0.3;
  const Index n = 4;
  const double rho = equicorr_rho(eta, n);
  const double bracket = -0.5 * (3.0 / (1.0 + 3.0 * rho) - 3.0 / (1.0 - rho)) * (1.0 - rho) * (1.0 + 3.0 * rho);
  CHECK(std::abs(equicorr_ht_step(eta, Vector::Zero(n), Vector::Constant(n, 6.0)).score - bracket) < 1e-12);

  Rng rng(40);
  for (int rep = 0; rep < 20; ++rep) {
    const Index m = 2 + rep % 5;
    const double e0 = uniform_vector(1, rng, -0.2, 0.6)(0);
    const Vector x = random_vector(m, rng);
    const double nu = rep % 4 == 0 ? kInf : 4.0 + rep;
    const Vector nus = uniform_vector(m, rng, 4.0, 20.0);
    auto f_mt = [&](const Vector& v) { return equicorr_mt_step(v(0), x, nu).loglik; };
    auto f_ht = [&](const Vector& v) { return equicorr_ht_step(v(0), x, nus).loglik; };
    const Vector at = Vector::Constant(1, e0);
    CHECK(rel_err(Vector::Constant(1, equicorr_mt_step(e0, x, nu).score), fd_gradient(f_mt, at)) < 1e-5);
    CHECK(rel_err(Vector::Constant(1, equicorr_ht_step(e0, x, nus).score), fd_gradient(f_ht, at)) < 1e-5);
    // likelihoods equal the dense forms
    Matrix c = Matrix::Constant(m, m, equicorr_rho(e0, m));
    c.diagonal().setOnes();
    const Matrix xi = sym_sqrt(c);
    const ConvTSpec mt = std::isinf(nu) ? ConvTSpec::gauss(m) : ConvTSpec::mt(m, nu);
    CHECK(std::abs(equicorr_mt_step(e0, x, nu).loglik - loglik(x, Vector::Zero(m), xi, mt)) < 1e-10);
    CHECK(std::abs(equicorr_ht_step(e0, x, nus).loglik - loglik(x, Vector::Zero(m), xi, ConvTSpec::ht(nus))) < 1e-10);
    // information agrees with the general correlation model
    const BlockSpec one({m}, {}, Structure::FullBlock);
    const CorrScoreModel gen_ht(one, ConvTSpec::ht(nus));
    CHECK(std::abs(equicorr_ht_step(e0, x, nus).info - gen_ht.evaluate(Vector::Constant(1, e0), x).info(0, 0)) < 1e-9);
    const CorrScoreModel gen_mt(one, mt);
    CHECK(std::abs(equicorr_mt_step(e0, x, nu).info - gen_mt.evaluate(Vector::Constant(1, e0), x).info(0, 0)) < 1e-9);
  }
  // Gaussian limit of the HT step
  const Vector x = random_vector(3, rng);
  CHECK(std::abs(equicorr_ht_step(0.2, x, Vector::Constant(3, kInf)).score - equicorr_mt_step(0.2, x, kInf).score) <
        1e-12);
}

TEST_CASE("sector filter reduces to the equicorrelation filters") {
  Rng rng(41);
  const Index T = 150, m = 3;
  Matrix x(T, m);
  for (Index t = 0; t < T; ++t) x.row(t) = random_vector(m, rng).transpose();
  const BlockSpec one({m}, {}, Structure::FullBlock);
  const Recursion rec = Recursion::constant(Vector::Constant(1, 0.1), 0.95, 0.05);
  const Vector nus = Vector::Constant(m, 7.0);
  const auto ht = filter_equicorr_ht(x, rec, nus);
  const auto sec = filter_sector_block(x, rec, one, ConvTSpec::ht(nus));
  CHECK(std::abs(ht.loglik - sec.loglik) < 1e-9);
  CHECK(max_abs(ht.path - sec.path) < 1e-9);
  Vector one_nu(1);
  one_nu << 7.0;
  const auto mt = filter_equicorr_mt(x, rec, 7.0);
  const auto ct = filter_sector_block(x, rec, one, ConvTSpec::ct({m}, one_nu));
  CHECK(std::abs(mt.loglik - ct.loglik) < 1e-9);
  CHECK_THROWS_AS(filter_sector_block(x, rec, one, ConvTSpec::mt(m, 7.0)), SpecError);
}
