#pragma once

// Convolution-t distributions: X = mu + Xi V where V stacks G independent
// standardized multivariate-t vectors of sizes m_g. Gaussian, multivariate t
// (G = 1), cluster t (blocks aligned to groups) and heterogeneous t (G = n)
// are members of the family.

#include "dfc/blockcorr.hpp"
#include "dfc/common.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace dfc {

enum class DistKind { Gauss, MT, CT, HT };

std::string to_string(DistKind k);
DistKind dist_from_string(const std::string& s);

struct ConvTSpec {
  std::vector<Index> m;  // group sizes
  Vector nu;             // degrees of freedom; +inf encodes a Gaussian group
  DistKind kind = DistKind::Gauss;

  static ConvTSpec gauss(Index n);
  static ConvTSpec mt(Index n, double nu);
  static ConvTSpec ct(std::vector<Index> m, Vector nu);
  static ConvTSpec ht(Vector nu);
  // Member of `kind` aligned to a block partition with the given dof values
  // (one for MT, one per group for CT, one per asset for HT, ignored for Gauss).
  static ConvTSpec for_blocks(DistKind kind, const BlockSpec& blocks, const Vector& nu);

  Index n() const;
  Index G() const { return static_cast<Index>(m.size()); }
  bool gaussian(Index g) const;
  std::vector<Index> group_of_coordinate() const;
  std::vector<Index> starts() const;
  // Sub-specification for coordinates [first, first + count), which must
  // cover whole groups.
  ConvTSpec slice(Index first, Index count) const;
  void validate() const;
};

// log normalizing constant of a standardized m-variate t with nu dof.
double log_const(double nu, Index m);

struct ConvTTerms {
  double loglik = 0.0;  // sum of group terms, excluding -log|det Xi|
  Vector w;             // W_g repeated on the coordinates of group g
  Vector group_norm2;   // V_g'V_g
};
ConvTTerms convt_terms(const Vector& v, const ConvTSpec& spec);

// Dense log-density of X given location mu and scale Xi.
double loglik(const Vector& x, const Vector& mu, const Matrix& xi, const ConvTSpec& spec);

// Block-specialized log-densities with Xi = C^{1/2}.
double loglik_block_mt(const Vector& x, const Vector& mu, const Matrix& c, const BlockSpec& blocks, double nu);
double loglik_block_ct(const Vector& x, const Vector& mu, const Matrix& c, const BlockSpec& blocks, const Vector& nu);
double loglik_block_ht(const Vector& x, const Vector& mu, const Matrix& c, const BlockSpec& blocks, const Vector& nu);
double loglik_block_gauss(const Vector& x, const Vector& mu, const Matrix& c, const BlockSpec& blocks);

// Scores with respect to mu and vec(Xi).
std::pair<Vector, Vector> score_mu_xi(const Vector& x, const Vector& mu, const Matrix& xi, const ConvTSpec& spec);

// Per-group constants of the information matrix:
// phi_g = (nu_g + m_g)/(nu_g + m_g + 2), psi_g = phi_g nu_g/(nu_g - 2); both 1 for Gaussian groups.
struct InfoConstants {
  Vector phi;
  Vector psi;
};
InfoConstants info_constants(const ConvTSpec& spec);

// Fisher information bilinear form vec(X)' (K_n + Upsilon) vec(Y) at Xi = I.
double info_form(const ConvTSpec& spec, const InfoConstants& ic, const Matrix& x, const Matrix& y);

// (K_n + Upsilon) applied to vec(X), returned as an n x n matrix R with
// info_form(X, Y) = <R, Y>.
Matrix info_apply(const ConvTSpec& spec, const InfoConstants& ic, const Matrix& x);
// Gram matrix G_jk = info_form(X_j, X_k).
Matrix info_gram(const ConvTSpec& spec, const InfoConstants& ic, const std::vector<Matrix>& xs);

// Upsilon in closed form (n^2 x n^2) and its Monte Carlo counterpart.
Matrix upsilon(const ConvTSpec& spec);
Matrix upsilon_monte_carlo(const ConvTSpec& spec, Index draws, std::uint64_t seed);

// Information blocks for mu and vec(Xi).
std::pair<Matrix, Matrix> information_mu_xi(const ConvTSpec& spec, const Matrix& xi);

// One draw of the standardized vector V (identity covariance).
Vector draw_v(const ConvTSpec& spec, std::mt19937_64& rng);

// Draws: count x n matrix with rows X = mu + Xi V.
Matrix sample(const ConvTSpec& spec, const Vector& mu, const Matrix& xi, Index count, std::uint64_t seed);

}  // namespace dfc
