#pragma once

// Dense correlation-matrix transforms: matrix log/exp and square root through a
// symmetric eigendecomposition, the generalized Fisher transform
// gamma(C) = vecl(log C) with its inverse, and first-order sensitivities.

#include "dfc/common.hpp"

#include <vector>

namespace dfc {

struct SymEig {
  Vector values;   // ascending
  Matrix vectors;  // columns are eigenvectors
};

SymEig sym_eig(const Matrix& a);

// Apply a scalar function to the eigenvalues of a symmetric matrix.
template <class F>
Matrix sym_apply(const SymEig& e, F&& f) {
  Vector fv = e.values.unaryExpr(f);
  return e.vectors * fv.asDiagonal() * e.vectors.transpose();
}

Matrix matrix_log(const Matrix& c);
Matrix matrix_exp(const Matrix& l);
Matrix sym_sqrt(const Matrix& c);
Matrix sym_inv_sqrt(const Matrix& c);

// Throws DomainError if `c` is not (numerically) a correlation matrix:
// symmetric and unit diagonal to `tol`.
void check_correlation(const Matrix& c, double tol = 1e-12);

// ---------------------------------------------------------------------------
// vecl / vech index bookkeeping. vecl stacks the strict lower triangle column
// by column: (1,0), (2,0), ..., (n-1,0), (2,1), ...  This order is used by every
// module in the library.

inline Index vecl_size(Index n) { return n * (n - 1) / 2; }
inline Index vech_size(Index n) { return n * (n + 1) / 2; }

// Position of (i, j), i > j, inside vecl.
Index vecl_index(Index i, Index j, Index n);
// Position of (i, j), i >= j, inside vech.
Index vech_index(Index i, Index j, Index n);

Vector vecl(const Matrix& a);
// Symmetric matrix with strict lower triangle `v` and constant diagonal.
Matrix unvecl(const Vector& v, Index n, double diag = 0.0);
Vector vech(const Matrix& a);
inline Vector vec(const Matrix& a) { return Eigen::Map<const Vector>(a.data(), a.size()); }

// Sparse index forms of the commutation, elimination and duplication maps.
struct IndexMaps {
  Index n = 0;
  std::vector<Index> commutation;  // K_n: (K vec A)[k] = (vec A)[commutation[k]] = vec(A')
  std::vector<Index> diag;         // E_d: vec positions of the n diagonal entries
  std::vector<Index> lower;        // E_l: vec positions of vecl entries
  std::vector<Index> upper;        // E_u: mirrored positions, same order as `lower`
  std::vector<Index> vech_pos;     // L: vec positions of vech entries

  explicit IndexMaps(Index dim);

  Vector apply_commutation(const Vector& v) const;
  Vector select(const std::vector<Index>& positions, const Vector& v) const;
  // (E_l + E_u)' g: vec of the symmetric zero-diagonal matrix with vecl g.
  Vector scatter_symmetric(const Vector& g) const;
  Matrix dense(const std::vector<Index>& positions) const;  // selection matrix
  Matrix dense_commutation() const;
};

// ---------------------------------------------------------------------------
// Generalized Fisher transform.

Vector gamma_of_corr(const Matrix& c);

struct CorrOfGammaOptions {
  double tol = 1e-12;  // max |diag(exp A) - 1|
  int max_iter = 500;
};

// Inverse transform via the diagonal fixed point: find x with
// diag(exp(G + diag(x))) = 1 where G has off-diagonal vecl g.
Matrix corr_of_gamma(const Vector& g, const CorrOfGammaOptions& opt = {});
// Same, with the log-domain matrix (off-diagonal part used, diagonal is the
// starting guess) updated in place to the solution.
Matrix corr_of_log_offdiag(Matrix& log_c, const CorrOfGammaOptions& opt = {});

// First-order response of C = exp(L) and C^{1/2} = exp(L/2) to a change of the
// off-diagonal log-domain entries, with the diagonal of L moving so that C
// keeps a unit diagonal. Built once per base point, then applied to any number
// of symmetric zero-diagonal directions.
class LogCorrSensitivity {
 public:
  explicit LogCorrSensitivity(const Matrix& c);

  Index dim() const { return q_.rows(); }
  const Matrix& corr() const { return c_; }
  const Matrix& sqrt() const { return sqrt_; }
  const Matrix& inv_sqrt() const { return inv_sqrt_; }
  const Vector& eigenvalues() const { return mu_; }
  const Matrix& eigenvectors() const { return q_; }

  struct Response {
    Matrix dcorr;
    Matrix dsqrt;
  };
  Response apply(const Matrix& direction) const;
  Matrix dcorr(const Matrix& direction) const { return apply(direction).dcorr; }
  Matrix dsqrt(const Matrix& direction) const;

  // Daleckii-Krein operators for exp and exp(./2) at log C (no constraint).
  Matrix gamma_op(const Matrix& x) const;
  Matrix gamma_half_op(const Matrix& x) const;

 private:
  Matrix c_, q_, sqrt_, inv_sqrt_;
  Vector mu_;
  Matrix dd_exp_, dd_half_;
  Eigen::PartialPivLU<Matrix> constraint_;
};

// d vecl(C) / d gamma'  (d x d, d = n(n-1)/2).
Matrix gamma_jacobian(const Matrix& c);
// d vec(C^{1/2}) / d gamma'  (n^2 x d).
Matrix dsqrt_dgamma(const Matrix& c);

}  // namespace dfc
