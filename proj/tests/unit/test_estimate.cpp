#include "dfc/estimate.hpp"
#include "dfc/matcorr.hpp"
#include "dfc/report_io.hpp"
#include "sim_support.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace dfc;
using namespace dfc::testing;

namespace {

FitOptions quick() {
  FitOptions o;
  o.bfgs.max_iter = 40;
  o.bfgs.rel_tol = 1e-7;
  return o;
}

struct Small {
  Universe uni;
  DecoupledFit fit;
};

// n = 6 in two sectors of one and two groups, CT, a short sample.
const Small& small_case() {
  static const Small s = [] {
    const BlockSpec b({2, 2, 2}, {0, 1, 1}, Structure::SparseBlock);
    Vector nu(3);
    nu << 6.0, 9.0, 12.0;
    Matrix cells = Matrix::Zero(3, 3);
    cells(0, 0) = 0.4;
    cells(1, 1) = 0.3;
    cells(2, 2) = 0.35;
    cells(2, 1) = cells(1, 2) = 0.1;
    UniverseOptions opt;
    opt.r = 2;
    opt.T = 600;
    opt.seed = 5;
    Small out;
    out.uni = simulate_universe(b, ConvTSpec::ct(b.group_sizes, nu), cells, opt);
    out.fit = fit_core_decoupled(out.uni.z, out.uni.u, b, DistKind::CT, Scaling::Tikhonov, quick());
    return out;
  }();
  return s;
}

}  // namespace

TEST_CASE("BIC and parameter counts") {
  CHECK(std::lround(bic(-36124.0, 85, 4278)) == 72959);
  CHECK(factor_param_count(8, DistKind::MT) == 85);
  const BlockSpec dbc({3, 3, 3, 3}, {0, 0, 1, 1}, Structure::DiagonalBlock);
  CHECK(core_param_count(12, 8, dbc, DistKind::Gauss, Scaling::Tikhonov) == 312);

  // small universe: n = 12, r = 4, four groups of three in two sectors
  const std::vector<Index> sizes{3, 3, 3, 3};
  const std::vector<Index> sectors{0, 0, 1, 1};
  const Structure structs[] = {Structure::Unrestricted, Structure::FullBlock, Structure::SparseBlock,
                               Structure::DiagonalBlock};
  const DistKind kinds[] = {DistKind::Gauss, DistKind::MT, DistKind::CT, DistKind::HT};
  // 3rn + n loadings/penalties, three per eta coordinate, then dof
  const Index eta_counts[] = {66, 10, 6, 4};
  const Index dof[] = {0, 1, 4, 12};
  for (int s = 0; s < 4; ++s)
    for (int k = 0; k < 4; ++k) {
      const BlockSpec b(sizes, sectors, structs[s]);
      CHECK(eta_size(b) == eta_counts[s]);
      CHECK(core_param_count(12, 4, b, kinds[k], Scaling::Tikhonov) == 144 + 12 + 3 * eta_counts[s] + dof[k]);
      CHECK(core_param_count(12, 4, b, kinds[k], Scaling::Identity) == 144 + 3 * eta_counts[s] + dof[k]);
    }
}

TEST_CASE("decoupled accounting identity against the dense density") {
  const Small& s = small_case();
  const Universe& u = s.uni;
  const DecoupledPath path = run_core_decoupled(s.fit, u.z, u.u);
  const ConvTSpec& d = s.fit.dist;
  double worst = 0.0;
  for (Index t = 0; t < u.z.rows(); t += 7) {
    Vector mu(u.n());
    for (Index i = 0; i < u.n(); ++i)
      mu(i) = rho_of_tau(path.tau.row(t).segment(i * u.r(), u.r()).transpose()).dot(u.u.row(t));
    const Matrix c = block_of_eta(path.eta.row(t).transpose(), s.fit.blocks);
    const Matrix xi = path.omega.row(t).asDiagonal() * sym_sqrt(c);
    worst = std::max(worst, std::abs(path.loglik_t(t) - loglik(u.z.row(t).transpose(), mu, xi, d)));
  }
  CHECK(worst < 1e-10);
  CHECK(std::abs(path.loglik_t.sum() - s.fit.loglik) < 1e-8);
  // stage-2 units add up
  double units = 0.0;
  for (const Stage2Unit& unit : s.fit.stage2) units += unit.loglik;
  CHECK(std::abs(units - s.fit.loglik_e) < 1e-9);
  CHECK(s.fit.stage2.size() == 2);
  CHECK(std::abs(s.fit.bic - bic(s.fit.loglik, s.fit.p, s.fit.T)) < 1e-9);
}

TEST_CASE("joint view reproduces the decoupled recursions") {
  const Small& s = small_case();
  const JointFit j = joint_view(s.fit);
  const DecoupledPath path = run_core_decoupled(s.fit, s.uni.z, s.uni.u);
  CHECK(j.rec.size() == path.tau.cols() + path.eta.cols());
  CHECK(j.lambda.size() == s.uni.n());
  const JointStart js = joint_start_from(s.fit);
  CHECK(js.nu.size() == 3);
  CHECK(js.beta_tau > 0.0);
  // pooled alpha keeps each asset's stage-1 step alpha / lambda
  for (Index i = 0; i < s.uni.n(); ++i) {
    const LoadingFit& lf = s.fit.stage1[static_cast<std::size_t>(i)];
    CHECK(std::abs(js.alpha_tau / js.lambda(i) - lf.rec.alpha(0) / lf.lambda) < 1e-12 * lf.rec.alpha(0) / lf.lambda);
  }
}

TEST_CASE("out-of-sample evaluation") {
  const Small& s = small_case();
  const Index T = s.uni.z.rows();
  const OosReport all = evaluate_oos(s.fit, s.uni.z, s.uni.u, T);
  CHECK(all.loglik_out == 0.0);
  CHECK(std::abs(all.loglik_in - s.fit.loglik) < 1e-8);
  CHECK_THROWS_AS(evaluate_oos(s.fit, s.uni.z, s.uni.u, 0), ValidationError);
  CHECK_THROWS_AS(evaluate_oos(s.fit, s.uni.z, s.uni.u, T + 1), ValidationError);

  // holdout data cannot affect the in-sample part
  const Index split = 400;
  Matrix z2 = s.uni.z;
  z2.bottomRows(T - split).array() *= 1.5;
  const OosReport a = evaluate_oos(s.fit, s.uni.z, s.uni.u, split);
  const OosReport b = evaluate_oos(s.fit, z2, s.uni.u, split);
  CHECK(a.loglik_in == b.loglik_in);
  CHECK(a.loglik_out != b.loglik_out);
  CHECK(std::abs(a.loglik_in + a.loglik_out - all.loglik_in) < 1e-8);
}

TEST_CASE("estimation is reproducible and survives a JSON round trip") {
  const Small& s = small_case();
  const DecoupledFit again =
      fit_core_decoupled(s.uni.z, s.uni.u, s.fit.blocks, DistKind::CT, Scaling::Tikhonov, quick(), &s.fit.stage1);
  CHECK(again.loglik == s.fit.loglik);
  const DecoupledFit back = decoupled_fit_from_json(json::parse(to_json(s.fit).dump()));
  CHECK(std::abs(run_core_decoupled(back, s.uni.z, s.uni.u).loglik_t.sum() - s.fit.loglik) < 1e-9);
  CHECK(to_json(back)["stage2"].size() == 2);
}

TEST_CASE("factor model nesting") {
  const Recursion frec = Recursion::constant(Vector::Constant(1, 0.3), 0.96, 0.04);
  const Matrix f = simulate_factor(frec, ConvTSpec::mt(2, 5.0), 800, 12);
  const FactorFit g = fit_factor_model(f, DistKind::Gauss, quick());
  const FactorFit m = fit_factor_model(f, DistKind::MT, quick());
  CHECK(m.loglik >= g.loglik - 1e-4 * 800);
  CHECK(m.dist.nu(0) < 15.0);
  CHECK(std::abs(m.bic - (-2.0 * m.loglik + m.p * std::log(800.0))) < 1e-9);
  CHECK(m.p == 4);
  const FactorFit back = factor_fit_from_json(json::parse(to_json(m).dump()));
  CHECK(std::abs(run_factor_model(back, f).loglik - m.loglik) < 1e-9);
}

TEST_CASE("joint estimation") {
  const Small& s = small_case();
  FitOptions o = quick();
  o.bfgs.max_iter = 8;
  const JointStart js = joint_start_from(s.fit);
  const JointFit j = fit_core_joint(s.uni.z, s.uni.u, s.fit.blocks, DistKind::CT, Scaling::Tikhonov, o, &js);
  for (std::size_t k = 1; k < j.optim.trace.size(); ++k) CHECK(j.optim.trace[k] <= j.optim.trace[k - 1]);
  CHECK(std::abs(run_core_joint(j, s.uni.z, s.uni.u).loglik - j.loglik) < 1e-9);
  const JointFit back = joint_fit_from_json(json::parse(to_json(j).dump()));
  CHECK(std::abs(run_core_joint(back, s.uni.z, s.uni.u).loglik - j.loglik) < 1e-9);

  // dimension guard
  const BlockSpec big({31}, {}, Structure::FullBlock);
  std::string msg;
  try {
    fit_core_joint(Matrix::Zero(10, 31), Matrix::Zero(10, 2), big, DistKind::Gauss, Scaling::Tikhonov);
  } catch (const ValidationError& e) {
    msg = e.what();
  }
  CHECK(msg.find("decoupled") != std::string::npos);
}

TEST_CASE("multivariate t cannot be split by sector") {
  const BlockSpec b({2, 2}, {0, 1}, Structure::SparseBlock);
  CHECK(stage2_units(b, DistKind::MT).size() == 1);
  CHECK(stage2_units(b, DistKind::CT).size() == 2);
  CHECK(stage2_units(BlockSpec({2, 2}, {0, 1}, Structure::FullBlock), DistKind::CT).size() == 1);
}
