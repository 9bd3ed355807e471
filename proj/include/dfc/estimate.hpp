#pragma once

// Maximum-likelihood drivers: factor correlation model, joint and decoupled
// core models, parameter counting, BIC and out-of-sample evaluation.
//
// Dynamics are estimated with targeted means (static full-sample estimates)
// and pooled persistence/loading coefficients: one (beta, alpha) pair for
// the factor correlations, one for the loadings and one for the
// idiosyncratic correlations in the joint model, per asset in decoupled
// stage 1 and per estimation unit in stage 2.

#include "dfc/blockcorr.hpp"
#include "dfc/convt.hpp"
#include "dfc/optim.hpp"
#include "dfc/scoredriven.hpp"

#include <vector>

namespace dfc {

struct FitOptions {
  BfgsOptions bfgs;
  std::vector<double> nu_starts{5.0, 10.0, 30.0};
  double beta_start = 0.96;
  double alpha_start = 0.03;
};

// Number of free distribution parameters: 0 (Gauss), 1 (MT), K (CT), n (HT).
Index dist_param_count(DistKind kind, const BlockSpec& blocks);

// Parameter counts under the element-wise convention (mean, beta and alpha
// for every dynamic coordinate).
Index factor_param_count(Index r, DistKind kind);
Index core_param_count(Index n, Index r, const BlockSpec& blocks, DistKind kind, Scaling scaling);

double bic(double loglik, Index p, Index T);

// Static starting values.
// n x r matrix with rows rho_i = mean(Z_i U), shrunk inside the unit ball.
Matrix static_loadings(const Matrix& z, const Matrix& u);
Matrix static_residuals(const Matrix& z, const Matrix& u, const Matrix& rho);  // (Z - rho'U)/omega

struct DynamicSummary {
  double mu_bar = 0.0;
  double beta_bar = 0.0;
  double alpha_bar = 0.0;
};
DynamicSummary summarize(const Recursion& rec);

// ---------------------------------------------------------------------------

struct FactorFit {
  DistKind kind = DistKind::Gauss;
  ConvTSpec dist;
  Recursion rec;
  FactorFilterResult filter;
  double loglik = 0.0;
  Index T = 0;
  Index p = 0;
  double bic = 0.0;
  BfgsResult optim;
};

FactorFit fit_factor_model(const Matrix& f, DistKind kind, const FitOptions& opt = {});
FactorFilterResult run_factor_model(const FactorFit& fit, const Matrix& f);

// ---------------------------------------------------------------------------

struct JointStart {
  double beta_tau = 0.96, alpha_tau = 0.03;
  double beta_eta = 0.96, alpha_eta = 0.03;
  Vector lambda;  // per asset
  Vector nu;      // distribution layout
};

struct JointFit {
  Index r = 0;
  BlockSpec blocks;
  ConvTSpec dist;
  Scaling scaling = Scaling::Tikhonov;
  Recursion rec;  // over zeta = (tau_1, ..., tau_n, eta)
  Vector lambda;
  CoreFilterResult filter;
  double loglik = 0.0;
  Index T = 0;
  Index p = 0;
  double bic = 0.0;
  BfgsResult optim;

  CoreJointModel model() const { return CoreJointModel(r, blocks, dist); }
};

inline constexpr Index kJointMaxAssets = 30;

JointFit fit_core_joint(const Matrix& z, const Matrix& u, const BlockSpec& blocks, DistKind kind, Scaling scaling,
                        const FitOptions& opt = {}, const JointStart* start = nullptr);
CoreFilterResult run_core_joint(const JointFit& fit, const Matrix& z, const Matrix& u);

// ---------------------------------------------------------------------------

struct LoadingFit {
  Recursion rec;
  double lambda = 1.0;
  double nu_star = 10.0;
  Scaling scaling = Scaling::Tikhonov;
  LoadingFilterResult filter;
  BfgsResult optim;
};

LoadingFit fit_loading(const Vector& zi, const Matrix& u, Scaling scaling, const FitOptions& opt = {});
std::vector<LoadingFit> fit_stage1(const Matrix& z, const Matrix& u, Scaling scaling, const FitOptions& opt = {});

// A stage-2 estimation unit covers coordinates [first, first + count) and
// shares one (beta, alpha) pair. DBC units without the multivariate t filter
// each group with the equicorrelation closed forms.
struct Stage2Unit {
  Index first = 0;
  Index count = 0;
  Index eta_first = 0;
  BlockSpec blocks;
  ConvTSpec dist;
  Recursion rec;
  bool equicorr = false;
  double loglik = 0.0;
  BfgsResult optim;
};

struct Stage2Path {
  Matrix eta;      // T x p
  Vector loglik_t; // log-density of e
};

// Units implied by the structure and distribution.
std::vector<Stage2Unit> stage2_units(const BlockSpec& blocks, DistKind kind);
Stage2Path run_stage2_unit(const Stage2Unit& unit, const Matrix& e);

struct DecoupledFit {
  Index r = 0;
  BlockSpec blocks;
  DistKind kind = DistKind::Gauss;
  ConvTSpec dist;  // assembled from the units
  Scaling scaling = Scaling::Tikhonov;
  std::vector<LoadingFit> stage1;
  std::vector<Stage2Unit> stage2;
  double loglik = 0.0;  // l(Z|U)
  double loglik_e = 0.0;
  double logdet_omega = 0.0;  // sum_t log|Lambda_omega,t|
  Index T = 0;
  Index p = 0;
  double bic = 0.0;
};

struct DecoupledPath {
  Matrix tau;     // T x rn
  Matrix omega;   // T x n
  Matrix resid;   // T x n
  Matrix eta;     // T x p
  Vector loglik_e_t;
  Vector log_omega_t;  // sum_i log omega_it
  Vector loglik_t;     // l(Z_t|U_t) = loglik_e_t - log_omega_t
};

DecoupledFit fit_core_decoupled(const Matrix& z, const Matrix& u, const BlockSpec& blocks, DistKind kind,
                                Scaling scaling = Scaling::Tikhonov, const FitOptions& opt = {},
                                const std::vector<LoadingFit>* stage1 = nullptr);
DecoupledPath run_core_decoupled(const DecoupledFit& fit, const Matrix& z, const Matrix& u);

// The decoupled estimates as a joint-model parameter set (element-wise
// persistence and loadings), used for simulation.
JointFit joint_view(const DecoupledFit& fit);

// Starting values for a joint fit taken from a decoupled fit.
JointStart joint_start_from(const DecoupledFit& fit);

// ---------------------------------------------------------------------------

struct OosReport {
  Index split = 0;
  Index T = 0;
  double loglik_in = 0.0;
  double loglik_out = 0.0;
};

// Filters the whole panel with frozen parameters and splits the log-likelihood at `split`.
OosReport evaluate_oos(const JointFit& fit, const Matrix& z, const Matrix& u, Index split);
OosReport evaluate_oos(const DecoupledFit& fit, const Matrix& z, const Matrix& u, Index split);
OosReport evaluate_oos(const FactorFit& fit, const Matrix& f, Index split);

}  // namespace dfc
