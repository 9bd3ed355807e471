#include "dfc/matcorr.hpp"

#include <cmath>
#include <sstream>

namespace dfc {

namespace {

constexpr double kPdFloor = 1e-12;
constexpr double kTieTol = 1e-10;

void require_pd(const SymEig& e, const char* op) {
  if (!(e.values.size() == 0 || e.values(0) > kPdFloor) || !e.values.allFinite()) {
    std::ostringstream os;
    os << op << ": matrix is not positive definite (smallest eigenvalue "
       << (e.values.size() ? e.values(0) : 0.0) << ")";
    throw DomainError(os.str());
  }
}

// Divided difference of exp(s * x) at log-eigenvalues a and b, stable for
// close arguments.
double dd_exp(double a, double b, double s) {
  const double h = a - b;
  if (std::abs(h) < kTieTol) return s * std::exp(s * 0.5 * (a + b));
  return std::exp(s * b) * std::expm1(s * h) / h;
}

}  // namespace

SymEig sym_eig(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) throw DomainError("sym_eig: eigendecomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

Matrix matrix_log(const Matrix& c) {
  const SymEig e = sym_eig(c);
  require_pd(e, "matrix_log");
  Matrix l = sym_apply(e, [](double x) { return std::log(x); });
  return 0.5 * (l + l.transpose());
}

Matrix matrix_exp(const Matrix& l) {
  Matrix c = sym_apply(sym_eig(l), [](double x) { return std::exp(x); });
  return 0.5 * (c + c.transpose());
}

Matrix sym_sqrt(const Matrix& c) {
  const SymEig e = sym_eig(c);
  require_pd(e, "sym_sqrt");
  Matrix s = sym_apply(e, [](double x) { return std::sqrt(x); });
  return 0.5 * (s + s.transpose());
}

Matrix sym_inv_sqrt(const Matrix& c) {
  const SymEig e = sym_eig(c);
  require_pd(e, "sym_inv_sqrt");
  Matrix s = sym_apply(e, [](double x) { return 1.0 / std::sqrt(x); });
  return 0.5 * (s + s.transpose());
}

void check_correlation(const Matrix& c, double tol) {
  if (c.rows() != c.cols()) throw DomainError("correlation matrix must be square");
  if (!c.allFinite()) throw DomainError("correlation matrix has non-finite entries");
  const double asym = (c - c.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol) throw DomainError("correlation matrix is not symmetric");
  const double diag = (c.diagonal().array() - 1.0).abs().maxCoeff();
  if (diag > tol) throw DomainError("correlation matrix does not have a unit diagonal");
}

// ---------------------------------------------------------------------------

Index vecl_index(Index i, Index j, Index n) {
  // columns 0..j-1 contribute (n-1) + (n-2) + ... + (n-j)
  return j * n - j * (j + 1) / 2 + (i - j - 1);
}

Index vech_index(Index i, Index j, Index n) { return j * n - j * (j - 1) / 2 + (i - j); }

Vector vecl(const Matrix& a) {
  const Index n = a.rows();
  Vector v(vecl_size(n));
  Index k = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) v(k++) = a(i, j);
  return v;
}

Matrix unvecl(const Vector& v, Index n, double diag) {
  if (v.size() != vecl_size(n)) throw DomainError("unvecl: length does not match n(n-1)/2");
  Matrix a = Matrix::Constant(n, n, 0.0);
  a.diagonal().setConstant(diag);
  Index k = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      a(i, j) = v(k);
      a(j, i) = v(k);
      ++k;
    }
  return a;
}

Vector vech(const Matrix& a) {
  const Index n = a.rows();
  Vector v(vech_size(n));
  Index k = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) v(k++) = a(i, j);
  return v;
}

IndexMaps::IndexMaps(Index dim) : n(dim) {
  commutation.resize(static_cast<std::size_t>(n * n));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) commutation[static_cast<std::size_t>(i + j * n)] = j + i * n;
  for (Index i = 0; i < n; ++i) diag.push_back(i + i * n);
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      lower.push_back(i + j * n);
      upper.push_back(j + i * n);
    }
  for (Index j = 0; j < n; ++j)
    for (Index i = j; i < n; ++i) vech_pos.push_back(i + j * n);
}

Vector IndexMaps::apply_commutation(const Vector& v) const {
  Vector out(v.size());
  for (std::size_t k = 0; k < commutation.size(); ++k) out(static_cast<Index>(k)) = v(commutation[k]);
  return out;
}

Vector IndexMaps::select(const std::vector<Index>& positions, const Vector& v) const {
  Vector out(static_cast<Index>(positions.size()));
  for (std::size_t k = 0; k < positions.size(); ++k) out(static_cast<Index>(k)) = v(positions[k]);
  return out;
}

Vector IndexMaps::scatter_symmetric(const Vector& g) const {
  Vector out = Vector::Zero(n * n);
  for (std::size_t k = 0; k < lower.size(); ++k) {
    out(lower[k]) += g(static_cast<Index>(k));
    out(upper[k]) += g(static_cast<Index>(k));
  }
  return out;
}

Matrix IndexMaps::dense(const std::vector<Index>& positions) const {
  Matrix e = Matrix::Zero(static_cast<Index>(positions.size()), n * n);
  for (std::size_t k = 0; k < positions.size(); ++k) e(static_cast<Index>(k), positions[k]) = 1.0;
  return e;
}

Matrix IndexMaps::dense_commutation() const {
  Matrix k = Matrix::Zero(n * n, n * n);
  for (std::size_t r = 0; r < commutation.size(); ++r) k(static_cast<Index>(r), commutation[r]) = 1.0;
  return k;
}

// ---------------------------------------------------------------------------

Vector gamma_of_corr(const Matrix& c) { return vecl(matrix_log(c)); }

Matrix corr_of_log_offdiag(Matrix& log_c, const CorrOfGammaOptions& opt) {
  const Index n = log_c.rows();
  if (n == 0) return Matrix(0, 0);
  if (!log_c.allFinite()) throw DomainError("corr_of_gamma: non-finite log-domain entries");
  double resid = kInf;
  for (int it = 0; it < opt.max_iter; ++it) {
    const SymEig e = sym_eig(log_c);
    if (e.values.maxCoeff() > 700.0) throw DomainError("corr_of_gamma: matrix exponential overflow");
    Matrix c = sym_apply(e, [](double x) { return std::exp(x); });
    const Vector d = c.diagonal();
    resid = (d.array() - 1.0).abs().maxCoeff();
    if (resid < opt.tol) {
      c = 0.5 * (c + c.transpose());
      c.diagonal().setOnes();
      return c;
    }
    log_c.diagonal().array() -= d.array().log();
  }
  throw ConvergenceError("corr_of_gamma: diagonal fixed point did not converge", resid);
}

Matrix corr_of_gamma(const Vector& g, const CorrOfGammaOptions& opt) {
  // n from d = n(n-1)/2
  const double nd = 0.5 * (1.0 + std::sqrt(1.0 + 8.0 * static_cast<double>(g.size())));
  const Index n = static_cast<Index>(std::llround(nd));
  if (vecl_size(n) != g.size()) throw DomainError("corr_of_gamma: length is not n(n-1)/2");
  if (!g.allFinite()) throw DomainError("corr_of_gamma: non-finite entries");
  Matrix l = unvecl(g, n, 0.0);
  return corr_of_log_offdiag(l, opt);
}

// ---------------------------------------------------------------------------

LogCorrSensitivity::LogCorrSensitivity(const Matrix& c) : c_(c) {
  const Index n = c.rows();
  const SymEig e = sym_eig(c);
  require_pd(e, "LogCorrSensitivity");
  q_ = e.vectors;
  mu_ = e.values;
  const Vector lam = mu_.array().log();
  sqrt_ = q_ * mu_.cwiseSqrt().asDiagonal() * q_.transpose();
  inv_sqrt_ = q_ * mu_.cwiseSqrt().cwiseInverse().asDiagonal() * q_.transpose();
  dd_exp_.resize(n, n);
  dd_half_.resize(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      dd_exp_(i, j) = dd_exp(lam(i), lam(j), 1.0);
      dd_half_(i, j) = dd_exp(lam(i), lam(j), 0.5);
    }
  // Response of diag(C) to diag(x) added to log C:
  // M_ij = sum_ab Q_ia Q_ja F_ab Q_ib Q_jb
  Matrix m = Matrix::Zero(n, n);
  for (Index a = 0; a < n; ++a) {
    const Matrix fa = q_ * dd_exp_.row(a).transpose().asDiagonal() * q_.transpose();
    m.noalias() += (q_.col(a) * q_.col(a).transpose()).cwiseProduct(fa);
  }
  constraint_.compute(m);
}

Matrix LogCorrSensitivity::gamma_op(const Matrix& x) const {
  return q_ * dd_exp_.cwiseProduct(q_.transpose() * x * q_) * q_.transpose();
}

Matrix LogCorrSensitivity::gamma_half_op(const Matrix& x) const {
  return q_ * dd_half_.cwiseProduct(q_.transpose() * x * q_) * q_.transpose();
}

LogCorrSensitivity::Response LogCorrSensitivity::apply(const Matrix& direction) const {
  const Matrix rot = q_.transpose() * direction * q_;
  const Matrix dc0 = q_ * dd_exp_.cwiseProduct(rot) * q_.transpose();
  const Vector x = constraint_.solve(-dc0.diagonal());
  // diag(x) in the rotated basis
  Matrix rot_full = rot + q_.transpose() * x.asDiagonal() * q_;
  Response r;
  r.dcorr = q_ * dd_exp_.cwiseProduct(rot_full) * q_.transpose();
  r.dsqrt = q_ * dd_half_.cwiseProduct(rot_full) * q_.transpose();
  r.dcorr.diagonal().setZero();
  return r;
}

Matrix LogCorrSensitivity::dsqrt(const Matrix& direction) const {
  Matrix rot = q_.transpose() * direction * q_;
  const Vector diag0 = (q_ * dd_exp_.cwiseProduct(rot)).cwiseProduct(q_).rowwise().sum();
  const Vector x = constraint_.solve(-diag0);
  rot.noalias() += q_.transpose() * x.asDiagonal() * q_;
  return q_ * dd_half_.cwiseProduct(rot) * q_.transpose();
}

Matrix gamma_jacobian(const Matrix& c) {
  const Index n = c.rows();
  const LogCorrSensitivity sens(c);
  const Index d = vecl_size(n);
  Matrix jac(d, d);
  Index col = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      Matrix dir = Matrix::Zero(n, n);
      dir(i, j) = dir(j, i) = 1.0;
      jac.col(col++) = vecl(sens.dcorr(dir));
    }
  return jac;
}

Matrix dsqrt_dgamma(const Matrix& c) {
  const Index n = c.rows();
  const LogCorrSensitivity sens(c);
  const Index d = vecl_size(n);
  Matrix jac(n * n, d);
  // Solve the Sylvester identity dS S + S dS = dC in the eigenbasis of C:
  // (Q' dS Q)_ij = (Q' dC Q)_ij / (s_i + s_j).
  const Matrix& q = sens.eigenvectors();
  const Vector s = sens.eigenvalues().cwiseSqrt();
  Matrix denom(n, n);
  for (Index a = 0; a < n; ++a)
    for (Index b = 0; b < n; ++b) denom(a, b) = s(a) + s(b);
  Index col = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) {
      Matrix dir = Matrix::Zero(n, n);
      dir(i, j) = dir(j, i) = 1.0;
      const Matrix dc = sens.dcorr(dir);
      const Matrix ds = q * (q.transpose() * dc * q).cwiseQuotient(denom) * q.transpose();
      jac.col(col++) = vec(ds);
    }
  return jac;
}

}  // namespace dfc
