#pragma once

// Synthetic universes drawn from the full generative model: factor
// correlation filter, then the joint core model.

#include "dfc/blockcorr.hpp"
#include "dfc/loadings.hpp"
#include "dfc/matcorr.hpp"
#include "dfc/scoredriven.hpp"

#include <cstdint>
#include <random>

namespace dfc::testing {

struct Universe {
  BlockSpec blocks;
  ConvTSpec dist;
  Recursion rec;  // element-wise truth over zeta
  Vector lambda;
  Matrix f, u, z;
  Matrix path;  // true zeta path

  Index n() const { return blocks.n(); }
  Index r() const { return u.cols(); }
};

struct UniverseOptions {
  Index r = 4;
  Index T = 4000;
  double beta_tau = 0.97, alpha_tau = 0.04;
  // per-sector dynamics of eta; the last entry is reused for further sectors
  std::vector<double> beta_eta{0.98};
  std::vector<double> alpha_eta{0.03};
  double log_lambda = 1.0;
  std::uint64_t seed = 1;
};

// Loadings are drawn uniformly in [-0.25, 0.45] per coordinate; `cells` are
// the log-domain cell values of the idiosyncratic correlation.
inline Universe simulate_universe(const BlockSpec& blocks, const ConvTSpec& dist, const Matrix& cells,
                                  const UniverseOptions& opt) {
  Universe out;
  out.blocks = blocks;
  out.dist = dist;
  const Index n = blocks.n();
  const Index r = opt.r;
  const Vector eta = eta_of_cells(cells, blocks);
  const Index p = eta.size();

  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> load(-0.25, 0.45);
  Vector mean(r * n + p), beta(r * n + p), alpha(r * n + p);
  for (Index i = 0; i < n; ++i) {
    Vector rho(r);
    for (Index j = 0; j < r; ++j) rho(j) = load(rng);
    mean.segment(i * r, r) = tau_of_rho(rho);
  }
  beta.head(r * n).setConstant(opt.beta_tau);
  alpha.head(r * n).setConstant(opt.alpha_tau);
  mean.tail(p) = eta;
  // eta coordinates follow sector order in every structure used here
  const auto cells_idx = eta_cells(blocks);
  for (Index j = 0; j < p; ++j) {
    const Index s = blocks.sector(cells_idx[static_cast<std::size_t>(j)].first);
    const std::size_t sb = std::min<std::size_t>(static_cast<std::size_t>(s), opt.beta_eta.size() - 1);
    const std::size_t sa = std::min<std::size_t>(static_cast<std::size_t>(s), opt.alpha_eta.size() - 1);
    beta(r * n + j) = opt.beta_eta[sb];
    alpha(r * n + j) = opt.alpha_eta[sa];
  }
  out.rec = Recursion(mean, beta, alpha);
  out.lambda = Vector::Constant(n, std::exp(opt.log_lambda));

  const Recursion frec = Recursion::constant(Vector::Constant(vecl_size(r), 0.1), 0.97, 0.03);
  out.f = simulate_factor(frec, ConvTSpec::gauss(r), opt.T, opt.seed * 7919 + 1);
  out.u = filter_factor_corr(out.f, frec, ConvTSpec::gauss(r)).u;
  const CoreJointModel model(r, blocks, dist);
  out.z = simulate_core_joint(model, out.rec, out.lambda, Scaling::Tikhonov, out.u, opt.seed * 104729 + 3, &out.path);
  return out;
}

}  // namespace dfc::testing
