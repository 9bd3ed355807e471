#pragma once

// Score-driven recursions for the factor correlation, the joint core model
// (factor loadings and idiosyncratic correlations) and the decoupled
// per-asset / per-sector filters.

#include "dfc/blockcorr.hpp"
#include "dfc/common.hpp"
#include "dfc/convt.hpp"
#include "dfc/loadings.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dfc {

enum class Scaling { Identity, MoorePenrose, Tikhonov };

std::string to_string(Scaling s);
Scaling scaling_from_string(const std::string& s);

// x_{t+1} = mean + beta o (x_t - mean) + alpha o eps_t, started at the mean.
struct Recursion {
  Vector mean;
  Vector beta;
  Vector alpha;

  Recursion() = default;
  Recursion(Vector m, Vector b, Vector a);
  static Recursion constant(const Vector& mean, double beta, double alpha);
  Index size() const { return mean.size(); }
  Vector next(const Vector& state, const Vector& eps) const {
    return mean + beta.cwiseProduct(state - mean) + alpha.cwiseProduct(eps);
  }
  void validate() const;
};

// ---------------------------------------------------------------------------
// e ~ CT(0, C(eta)^{1/2}) with C parametrized by eta (block structures) or by
// gamma = vecl(log C) (Unrestricted).

class CorrScoreModel {
 public:
  CorrScoreModel(BlockSpec blocks, ConvTSpec dist);
  // Unrestricted model of dimension n.
  static CorrScoreModel unrestricted(Index n, ConvTSpec dist);

  Index n() const { return blocks_.n(); }
  Index p() const { return static_cast<Index>(directions_.size()); }
  const BlockSpec& blocks() const { return blocks_; }
  const ConvTSpec& dist() const { return dist_; }

  Matrix corr_of(const Vector& eta) const;
  Vector eta_of(const Matrix& c) const;

  struct Eval {
    double loglik = 0.0;
    Vector score;  // d loglik / d eta
    Matrix info;   // Fisher information for eta
    Matrix corr;
    Vector v;      // C^{-1/2} e
  };
  Eval evaluate(const Vector& eta, const Vector& e, bool with_info = true) const;

 private:
  BlockSpec blocks_;
  ConvTSpec dist_;
  InfoConstants ic_;
  std::vector<Matrix> directions_;
};

struct CorrFilterResult {
  Matrix path;      // T x p, state used at each t
  Vector loglik_t;  // T
  double loglik = 0.0;
  Vector last_state;  // state after the final update (for continuing)
};

// Information-scaled filter for eta. `start` defaults to the recursion mean.
CorrFilterResult filter_corr(const Matrix& e, const Recursion& rec, const CorrScoreModel& model,
                             const Vector* start = nullptr);

// ---------------------------------------------------------------------------
// Factor correlation filter: F_t ~ CT(0, C_F(gamma_t)^{1/2}).

struct FactorFilterResult {
  Matrix gamma;  // T x r(r-1)/2
  Matrix corr;   // T x r(r-1)/2, vecl(C_F,t)
  Matrix u;      // T x r, C_F,t^{-1/2} F_t
  Vector loglik_t;
  double loglik = 0.0;
  Vector last_state;
};

FactorFilterResult filter_factor_corr(const Matrix& f, const Recursion& rec, const ConvTSpec& dist,
                                      const Vector* start = nullptr);

// ---------------------------------------------------------------------------
// Joint core model: Z | U ~ CT(mu, Xi), mu_i = rho_i'U, Xi = Lambda_omega C_e^{1/2},
// zeta = (tau_1', ..., tau_n', eta')'.

class CoreJointModel {
 public:
  CoreJointModel(Index r, BlockSpec blocks, ConvTSpec dist);

  Index n() const { return blocks_.n(); }
  Index r() const { return r_; }
  Index p() const { return corr_.p(); }
  Index dim() const { return r_ * n() + p(); }
  const BlockSpec& blocks() const { return blocks_; }
  const ConvTSpec& dist() const { return corr_.dist(); }
  const CorrScoreModel& corr_model() const { return corr_; }

  struct Eval {
    double loglik = 0.0;
    // xi = (mu (n), omega (n), eta (p))
    Vector grad_xi;
    Matrix info_mu;    // n x n
    Matrix info_rest;  // (n + p) x (n + p) for (omega, eta)
    Vector grad_zeta;
    std::vector<LoadingState> loadings;
    Vector u;
    Vector e;       // (Z - mu) / omega
    Vector omega;
    double ll_e = 0.0;  // log-density of e under C_e
    Matrix corr;
  };
  Eval evaluate(const Vector& zeta, const Vector& z, const Vector& u, bool with_info = true) const;

 private:
  Index r_;
  BlockSpec blocks_;
  CorrScoreModel corr_;
  InfoConstants ic_;
  std::vector<Matrix> directions_;
};

// Scaled innovation for the joint model: raw score (Identity), Moore-Penrose
// (lambda ignored) or Tikhonov with per-asset penalties.
Vector scaled_innovation(const CoreJointModel::Eval& ev, Index r, Scaling scaling, const Vector& lambda);

struct CoreFilterResult {
  Matrix path;  // T x dim
  Vector loglik_t;
  double loglik = 0.0;
  Vector last_state;
};

CoreFilterResult filter_core_joint(const Matrix& z, const Matrix& u, const Recursion& rec, const Vector& lambda,
                                   Scaling scaling, const CoreJointModel& model, const Vector* start = nullptr);

// ---------------------------------------------------------------------------
// Decoupled loading filter for one asset: Z_i = rho_i'U + omega_i e_i with
// e_i approximated by a standardized t with nu_star dof.

struct LoadingStep {
  double loglik = 0.0;
  double e = 0.0;
  LoadingState state;
  Vector grad_xi;  // (d/d mu_i, d/d omega_i)
  Vector info_xi;  // diagonal of I_xi
  Vector grad_tau;
  Matrix info_tau;
};
LoadingStep loading_step(const Vector& tau, double z, const Vector& u, double nu_star);
Vector loading_innovation(const LoadingStep& s, const Vector& u, Scaling scaling, double lambda);

struct LoadingFilterResult {
  Matrix tau;  // T x r
  Vector resid;
  Vector omega;
  Vector loglik_t;
  double loglik = 0.0;
  Vector last_state;
};
LoadingFilterResult filter_loading_decoupled(const Vector& zi, const Matrix& u, const Recursion& rec, double lambda,
                                             double nu_star, Scaling scaling = Scaling::Tikhonov,
                                             const Vector* start = nullptr);

// ---------------------------------------------------------------------------
// Equicorrelation blocks with closed-form scores (nu = +inf for Gaussian).

struct EquicorrStep {
  double loglik = 0.0;
  double score = 0.0;  // d loglik / d eta
  double info = 0.0;   // I_eta
};
// dEta/dRho for an n-dimensional equicorrelation block.
double equicorr_jacobian(double rho, Index n);
EquicorrStep equicorr_mt_step(double eta, const Vector& x, double nu);
EquicorrStep equicorr_ht_step(double eta, const Vector& x, const Vector& nu);

CorrFilterResult filter_equicorr_mt(const Matrix& x, const Recursion& rec, double nu, const Vector* start = nullptr);
CorrFilterResult filter_equicorr_ht(const Matrix& x, const Recursion& rec, const Vector& nu,
                                    const Vector* start = nullptr);

// Per-sector filter; SpecError for the multivariate t, whose common mixing
// variable couples sectors.
CorrFilterResult filter_sector_block(const Matrix& e, const Recursion& rec, const BlockSpec& sector_blocks,
                                     const ConvTSpec& dist, const Vector* start = nullptr);

// ---------------------------------------------------------------------------
// Simulation from the observation-driven models.

// Z panel (T x n) given U (T x r).
Matrix simulate_core_joint(const CoreJointModel& model, const Recursion& rec, const Vector& lambda, Scaling scaling,
                           const Matrix& u, std::uint64_t seed, Matrix* path = nullptr);
// F panel (T x r).
Matrix simulate_factor(const Recursion& rec, const ConvTSpec& dist, Index T, std::uint64_t seed);

}  // namespace dfc
