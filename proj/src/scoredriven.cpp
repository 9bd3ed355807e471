#include "dfc/scoredriven.hpp"

#include "dfc/matcorr.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace dfc {

std::string to_string(Scaling s) {
  switch (s) {
    case Scaling::Identity: return "identity";
    case Scaling::MoorePenrose: return "mp";
    case Scaling::Tikhonov: return "tikhonov";
  }
  return "?";
}

Scaling scaling_from_string(const std::string& s) {
  if (s == "identity") return Scaling::Identity;
  if (s == "mp") return Scaling::MoorePenrose;
  if (s == "tikhonov") return Scaling::Tikhonov;
  throw SpecError("unknown scaling '" + s + "' (expected identity|mp|tikhonov)");
}

Recursion::Recursion(Vector m, Vector b, Vector a) : mean(std::move(m)), beta(std::move(b)), alpha(std::move(a)) {
  validate();
}

Recursion Recursion::constant(const Vector& mean, double beta, double alpha) {
  return Recursion(mean, Vector::Constant(mean.size(), beta), Vector::Constant(mean.size(), alpha));
}

void Recursion::validate() const {
  if (beta.size() != mean.size() || alpha.size() != mean.size())
    throw SpecError("recursion vectors must have equal length");
  if (!mean.allFinite() || !beta.allFinite() || !alpha.allFinite()) throw SpecError("recursion has non-finite entries");
  if ((beta.array().abs() >= 1.0).any()) throw SpecError("recursion persistence must lie in (-1, 1)");
}

namespace {

void check_finite(const Vector& v, Index t, const char* what) {
  if (!v.allFinite()) {
    std::ostringstream os;
    os << what << ": non-finite state at step " << t;
    throw FilterDivergence(os.str(), t);
  }
}

void check_finite(double v, Index t, const char* what) {
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << what << ": non-finite log-likelihood at step " << t;
    throw FilterDivergence(os.str(), t);
  }
}

Vector solve_info(const Matrix& info, const Vector& g, Index t, const char* what) {
  Eigen::LDLT<Matrix> ldlt(info);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0) {
    std::ostringstream os;
    os << what << ": information matrix is not positive definite at step " << t;
    throw FilterDivergence(os.str(), t);
  }
  return ldlt.solve(g);
}

std::vector<Matrix> unit_directions(const BlockSpec& blocks) {
  const Index p = eta_size(blocks);
  std::vector<Matrix> dirs;
  dirs.reserve(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) dirs.push_back(eta_direction(Vector::Unit(p, j), blocks));
  return dirs;
}

}  // namespace

// ---------------------------------------------------------------------------

CorrScoreModel::CorrScoreModel(BlockSpec blocks, ConvTSpec dist) : blocks_(std::move(blocks)), dist_(std::move(dist)) {
  blocks_.validate();
  dist_.validate();
  if (dist_.n() != blocks_.n()) throw SpecError("distribution dimension does not match block spec");
  ic_ = info_constants(dist_);
  directions_ = unit_directions(blocks_);
}

CorrScoreModel CorrScoreModel::unrestricted(Index n, ConvTSpec dist) {
  return CorrScoreModel(BlockSpec({n}, {0}, Structure::Unrestricted), std::move(dist));
}

Matrix CorrScoreModel::corr_of(const Vector& eta) const { return block_of_eta(eta, blocks_); }

Vector CorrScoreModel::eta_of(const Matrix& c) const { return eta_of_block(c, blocks_); }

CorrScoreModel::Eval CorrScoreModel::evaluate(const Vector& eta, const Vector& e, bool with_info) const {
  Eval ev;
  ev.corr = corr_of(eta);
  const LogCorrSensitivity sens(ev.corr);
  const Matrix& s_inv = sens.inv_sqrt();
  ev.v = s_inv * e;
  const ConvTTerms terms = convt_terms(ev.v, dist_);
  ev.loglik = terms.loglik - 0.5 * sens.eigenvalues().array().log().sum();
  Matrix smat = terms.w.cwiseProduct(ev.v) * ev.v.transpose();
  smat.diagonal().array() -= 1.0;
  const Index p = this->p();
  std::vector<Matrix> x(static_cast<std::size_t>(p));
  ev.score.resize(p);
  for (Index j = 0; j < p; ++j) {
    x[static_cast<std::size_t>(j)] = s_inv * sens.dsqrt(directions_[static_cast<std::size_t>(j)]);
    ev.score(j) = smat.cwiseProduct(x[static_cast<std::size_t>(j)]).sum();
  }
  if (with_info) ev.info = info_gram(dist_, ic_, x);
  return ev;
}

CorrFilterResult filter_corr(const Matrix& e, const Recursion& rec, const CorrScoreModel& model, const Vector* start) {
  const Index T = e.rows();
  if (e.cols() != model.n()) throw SpecError("filter_corr: panel width does not match model");
  if (rec.size() != model.p()) throw SpecError("filter_corr: recursion size does not match model");
  CorrFilterResult out;
  out.path.resize(T, model.p());
  out.loglik_t.resize(T);
  Vector state = start ? *start : rec.mean;
  for (Index t = 0; t < T; ++t) {
    out.path.row(t) = state.transpose();
    const auto ev = model.evaluate(state, e.row(t).transpose(), true);
    check_finite(ev.loglik, t, "filter_corr");
    out.loglik_t(t) = ev.loglik;
    out.loglik += ev.loglik;
    if (model.p() > 0) state = rec.next(state, solve_info(ev.info, ev.score, t, "filter_corr"));
    check_finite(state, t, "filter_corr");
  }
  out.last_state = state;
  return out;
}

FactorFilterResult filter_factor_corr(const Matrix& f, const Recursion& rec, const ConvTSpec& dist, const Vector* start) {
  const Index T = f.rows();
  const Index r = f.cols();
  const CorrScoreModel model = CorrScoreModel::unrestricted(r, dist);
  if (rec.size() != model.p()) throw SpecError("filter_factor_corr: recursion size must be r(r-1)/2");
  FactorFilterResult out;
  out.gamma.resize(T, model.p());
  out.corr.resize(T, model.p());
  out.u.resize(T, r);
  out.loglik_t.resize(T);
  Vector state = start ? *start : rec.mean;
  for (Index t = 0; t < T; ++t) {
    out.gamma.row(t) = state.transpose();
    const Vector ft = f.row(t).transpose();
    const auto ev = model.evaluate(state, ft, true);
    check_finite(ev.loglik, t, "filter_factor_corr");
    out.corr.row(t) = vecl(ev.corr).transpose();
    out.u.row(t) = ev.v.transpose();
    out.loglik_t(t) = ev.loglik;
    out.loglik += ev.loglik;
    if (model.p() > 0) state = rec.next(state, solve_info(ev.info, ev.score, t, "filter_factor_corr"));
    check_finite(state, t, "filter_factor_corr");
  }
  out.last_state = state;
  return out;
}

// ---------------------------------------------------------------------------

CoreJointModel::CoreJointModel(Index r, BlockSpec blocks, ConvTSpec dist)
    : r_(r), blocks_(blocks), corr_(std::move(blocks), std::move(dist)) {
  if (r_ < 1) throw SpecError("core model needs at least one factor");
  ic_ = info_constants(corr_.dist());
  directions_ = unit_directions(blocks_);
}

CoreJointModel::Eval CoreJointModel::evaluate(const Vector& zeta, const Vector& z, const Vector& u,
                                              bool with_info) const {
  const Index n = this->n();
  const Index p = this->p();
  if (zeta.size() != dim() || z.size() != n || u.size() != r_) throw SpecError("core model: dimension mismatch");
  Eval ev;
  ev.u = u;
  ev.loadings.reserve(static_cast<std::size_t>(n));
  ev.omega.resize(n);
  ev.e.resize(n);
  Vector mu(n);
  for (Index i = 0; i < n; ++i) {
    ev.loadings.push_back(LoadingState::from_tau(zeta.segment(i * r_, r_)));
    const LoadingState& ls = ev.loadings.back();
    if (ls.omega < kOmegaFloor) throw DomainError("core model: loading on the boundary (omega below floor)");
    mu(i) = ls.rho.dot(u);
    ev.omega(i) = ls.omega;
    ev.e(i) = (z(i) - mu(i)) / ls.omega;
  }
  ev.corr = corr_.corr_of(zeta.tail(p));
  const LogCorrSensitivity sens(ev.corr);
  const Matrix& s = sens.sqrt();
  const Matrix& s_inv = sens.inv_sqrt();
  const Vector v = s_inv * ev.e;
  const ConvTTerms terms = convt_terms(v, corr_.dist());
  ev.ll_e = terms.loglik - 0.5 * sens.eigenvalues().array().log().sum();
  ev.loglik = ev.ll_e - ev.omega.array().log().sum();

  const Vector wv = terms.w.cwiseProduct(v);
  const Vector g = s_inv * wv;
  Matrix smat = wv * v.transpose();
  smat.diagonal().array() -= 1.0;

  ev.grad_xi.resize(2 * n + p);
  for (Index i = 0; i < n; ++i) {
    ev.grad_xi(i) = g(i) / ev.omega(i);
    ev.grad_xi(n + i) = (g(i) * ev.e(i) - 1.0) / ev.omega(i);
  }
  std::vector<Matrix> x(static_cast<std::size_t>(n + p));
  for (Index j = 0; j < p; ++j) {
    x[static_cast<std::size_t>(n + j)] = s_inv * sens.dsqrt(directions_[static_cast<std::size_t>(j)]);
    ev.grad_xi(2 * n + j) = smat.cwiseProduct(x[static_cast<std::size_t>(n + j)]).sum();
  }

  ev.grad_zeta.resize(dim());
  for (Index i = 0; i < n; ++i) {
    const Matrix m = sensitivity_M(ev.loadings[static_cast<std::size_t>(i)], u);
    ev.grad_zeta.segment(i * r_, r_) = m.transpose() * Eigen::Vector2d(ev.grad_xi(i), ev.grad_xi(n + i));
  }
  ev.grad_zeta.tail(p) = ev.grad_xi.tail(p);

  if (with_info) {
    const auto grp = corr_.dist().group_of_coordinate();
    Vector psi(n);
    for (Index i = 0; i < n; ++i) psi(i) = ic_.psi(grp[static_cast<std::size_t>(i)]);
    const Matrix a = ev.omega.cwiseInverse().asDiagonal() * s_inv;
    ev.info_mu = a * psi.asDiagonal() * a.transpose();
    for (Index i = 0; i < n; ++i)
      x[static_cast<std::size_t>(i)] = s_inv.col(i) * s.row(i) / ev.omega(i);
    ev.info_rest = info_gram(corr_.dist(), ic_, x);
  }
  return ev;
}

Vector scaled_innovation(const CoreJointModel::Eval& ev, Index r, Scaling scaling, const Vector& lambda) {
  if (scaling == Scaling::Identity) return ev.grad_zeta;
  const Index n = ev.omega.size();
  const Index p = ev.grad_xi.size() - 2 * n;
  if (ev.info_mu.rows() != n) throw SpecError("scaled_innovation: information not evaluated");
  const Vector s_mu = ev.info_mu.ldlt().solve(ev.grad_xi.head(n));
  const Vector s_rest = ev.info_rest.ldlt().solve(ev.grad_xi.tail(n + p));
  Vector eps(r * n + p);
  for (Index i = 0; i < n; ++i) {
    const LoadingState& ls = ev.loadings[static_cast<std::size_t>(i)];
    Matrix mplus;
    if (scaling == Scaling::MoorePenrose)
      mplus = r >= 2 ? moore_penrose_Mplus(ls, ev.u) : tikhonov_Mplus(sensitivity_M(ls, ev.u), 0.0);
    else
      mplus = tikhonov_Mplus(sensitivity_M(ls, ev.u), lambda(i));
    eps.segment(i * r, r) = mplus * Eigen::Vector2d(s_mu(i), s_rest(i));
  }
  eps.tail(p) = s_rest.tail(p);
  return eps;
}

CoreFilterResult filter_core_joint(const Matrix& z, const Matrix& u, const Recursion& rec, const Vector& lambda,
                                   Scaling scaling, const CoreJointModel& model, const Vector* start) {
  const Index T = z.rows();
  if (z.cols() != model.n() || u.cols() != model.r() || u.rows() != T)
    throw SpecError("filter_core_joint: panel dimensions do not match model");
  if (rec.size() != model.dim()) throw SpecError("filter_core_joint: recursion size does not match model");
  if (scaling == Scaling::Tikhonov && lambda.size() != model.n())
    throw SpecError("filter_core_joint: need one penalty per asset");
  CoreFilterResult out;
  out.path.resize(T, model.dim());
  out.loglik_t.resize(T);
  Vector state = start ? *start : rec.mean;
  const bool info = scaling != Scaling::Identity;
  for (Index t = 0; t < T; ++t) {
    out.path.row(t) = state.transpose();
    const auto ev = model.evaluate(state, z.row(t).transpose(), u.row(t).transpose(), info);
    check_finite(ev.loglik, t, "filter_core_joint");
    out.loglik_t(t) = ev.loglik;
    out.loglik += ev.loglik;
    state = rec.next(state, scaled_innovation(ev, model.r(), scaling, lambda));
    check_finite(state, t, "filter_core_joint");
  }
  out.last_state = state;
  return out;
}

// ---------------------------------------------------------------------------

LoadingStep loading_step(const Vector& tau, double z, const Vector& u, double nu) {
  LoadingStep s;
  s.state = LoadingState::from_tau(tau);
  const double om = s.state.omega;
  if (om < kOmegaFloor) throw DomainError("loading_step: omega below floor");
  s.e = (z - s.state.rho.dot(u)) / om;
  double w = 1.0;
  double i_mu = 1.0, i_om = 2.0;
  if (std::isinf(nu)) {
    s.loglik = log_const(kInf, 1) - std::log(om) - 0.5 * s.e * s.e;
  } else {
    s.loglik = log_const(nu, 1) - std::log(om) - 0.5 * (nu + 1.0) * std::log1p(s.e * s.e / (nu - 2.0));
    w = (nu + 1.0) / (nu - 2.0 + s.e * s.e);
    i_mu = (nu + 1.0) * nu / ((nu + 3.0) * (nu - 2.0));
    i_om = 2.0 * nu / (nu + 3.0);
  }
  s.grad_xi = Eigen::Vector2d(w * s.e / om, (w * s.e * s.e - 1.0) / om);
  s.info_xi = Eigen::Vector2d(i_mu / (om * om), i_om / (om * om));
  const Matrix m = sensitivity_M(s.state, u);
  s.grad_tau = m.transpose() * s.grad_xi;
  s.info_tau = m.transpose() * s.info_xi.asDiagonal() * m;
  return s;
}

Vector loading_innovation(const LoadingStep& s, const Vector& u, Scaling scaling, double lambda) {
  if (scaling == Scaling::Identity) return s.grad_tau;
  const Vector scaled = s.grad_xi.cwiseQuotient(s.info_xi);
  const Index r = s.state.r();
  if (scaling == Scaling::MoorePenrose)
    return (r >= 2 ? moore_penrose_Mplus(s.state, u) : tikhonov_Mplus(sensitivity_M(s.state, u), 0.0)) * scaled;
  return tikhonov_Mplus(sensitivity_M(s.state, u), lambda) * scaled;
}

LoadingFilterResult filter_loading_decoupled(const Vector& zi, const Matrix& u, const Recursion& rec, double lambda,
                                             double nu_star, Scaling scaling, const Vector* start) {
  const Index T = zi.size();
  const Index r = u.cols();
  if (u.rows() != T) throw SpecError("filter_loading_decoupled: series lengths differ");
  if (rec.size() != r) throw SpecError("filter_loading_decoupled: recursion size must equal r");
  if (!(nu_star > 2.0)) throw SpecError("filter_loading_decoupled: nu must exceed 2");
  LoadingFilterResult out;
  out.tau.resize(T, r);
  out.resid.resize(T);
  out.omega.resize(T);
  out.loglik_t.resize(T);
  Vector state = start ? *start : rec.mean;
  for (Index t = 0; t < T; ++t) {
    out.tau.row(t) = state.transpose();
    const Vector ut = u.row(t).transpose();
    const LoadingStep s = loading_step(state, zi(t), ut, nu_star);
    check_finite(s.loglik, t, "filter_loading_decoupled");
    out.resid(t) = s.e;
    out.omega(t) = s.state.omega;
    out.loglik_t(t) = s.loglik;
    out.loglik += s.loglik;
    state = rec.next(state, loading_innovation(s, ut, scaling, lambda));
    check_finite(state, t, "filter_loading_decoupled");
  }
  out.last_state = state;
  return out;
}

// ---------------------------------------------------------------------------

double equicorr_jacobian(double rho, Index n) {
  return 1.0 / ((1.0 - rho) * (1.0 + static_cast<double>(n - 1) * rho));
}

EquicorrStep equicorr_mt_step(double eta, const Vector& x, double nu) {
  const Index n = x.size();
  const double nd = static_cast<double>(n);
  const double rho = equicorr_rho(eta, n);
  const double a = 1.0 - rho;
  const double b = 1.0 + (nd - 1.0) * rho;
  if (!(a > 0.0 && b > 0.0)) throw DomainError("equicorrelation outside (-1/(n-1), 1)");
  const double s1 = x.squaredNorm();
  const double sum = x.sum();
  const double s2 = sum * sum;
  const double q = s1 / a - rho * s2 / (a * b);
  const double logdet = std::log(b) + (nd - 1.0) * std::log(a);
  const bool gauss = std::isinf(nu);
  EquicorrStep st;
  double w = 1.0;
  double phi = 1.0;
  if (gauss) {
    st.loglik = log_const(kInf, n) - 0.5 * logdet - 0.5 * q;
  } else {
    st.loglik = log_const(nu, n) - 0.5 * logdet - 0.5 * (nu + nd) * std::log1p(q / (nu - 2.0));
    w = (nu + nd) / (nu - 2.0 + q);
    phi = (nu + nd) / (nu + nd + 2.0);
  }
  const double dq = s1 / (a * a) - (1.0 + (nd - 1.0) * rho * rho) * s2 / (a * a * b * b);
  const double d_rho = -0.5 * ((nd - 1.0) / b - (nd - 1.0) / a) - 0.5 * w * dq;
  const double n1 = nd - 1.0;
  const double i_rho = 0.25 * (3.0 * phi - 1.0) * n1 * n1 / (b * b) + 0.5 * phi * n1 / (a * a) +
                       0.25 * (1.0 - phi) * (1.0 - (nd + 1.0) * rho) * n1 * n1 / (b * a * a);
  // d rho / d eta = 1 / J
  const double jac = equicorr_jacobian(rho, n);
  st.score = d_rho / jac;
  st.info = i_rho / (jac * jac);
  return st;
}

EquicorrStep equicorr_ht_step(double eta, const Vector& x, const Vector& nu) {
  const Index n = x.size();
  if (nu.size() != n) throw SpecError("equicorr_ht_step: need one dof per coordinate");
  const double nd = static_cast<double>(n);
  const double rho = equicorr_rho(eta, n);
  const double a = 1.0 - rho;
  const double b = 1.0 + (nd - 1.0) * rho;
  if (!(a > 0.0 && b > 0.0)) throw DomainError("equicorrelation outside (-1/(n-1), 1)");
  const double xbar = x.mean();
  const double sa = std::sqrt(a), sb = std::sqrt(b);
  EquicorrStep st;
  st.loglik = -0.5 * (std::log(b) + (nd - 1.0) * std::log(a));
  double d_rho = -0.5 * ((nd - 1.0) / b - (nd - 1.0) / a);
  double sum_phi = 0.0, sum_psi = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double v = (x(i) - xbar) / sa + xbar / sb;
    const double dv = 0.5 * (x(i) - xbar) / (a * sa) - 0.5 * (nd - 1.0) * xbar / (b * sb);
    double w = 1.0, phi = 1.0, psi = 1.0;
    if (std::isinf(nu(i))) {
      st.loglik += log_const(kInf, 1) - 0.5 * v * v;
    } else {
      st.loglik += log_const(nu(i), 1) - 0.5 * (nu(i) + 1.0) * std::log1p(v * v / (nu(i) - 2.0));
      w = (nu(i) + 1.0) / (nu(i) - 2.0 + v * v);
      phi = (nu(i) + 1.0) / (nu(i) + 3.0);
      psi = phi * nu(i) / (nu(i) - 2.0);
    }
    d_rho -= w * v * dv;
    sum_phi += phi;
    sum_psi += psi;
  }
  const double a1 = 3.0 * sum_phi + (nd - 1.0) * sum_psi - 2.0 * nd;
  const double a2 = (3.0 * sum_phi - nd) * (nd - 1.0) + sum_psi + nd;
  const double a3 = sum_psi + 2.0 * nd - 3.0 * sum_phi;
  const double n1 = nd - 1.0;
  const double i_rho = 0.25 * (nd * nd + a1) * n1 * n1 / (nd * nd * b * b) + 0.25 * n1 * a2 / (nd * nd * a * a) +
                       0.5 * n1 * n1 * a3 / (nd * nd * b * a);
  const double jac = equicorr_jacobian(rho, n);
  st.score = d_rho / jac;
  st.info = i_rho / (jac * jac);
  return st;
}

namespace {

template <class Step>
CorrFilterResult filter_scalar(const Matrix& x, const Recursion& rec, const Vector* start, Step step,
                               const char* what) {
  if (rec.size() != 1) throw SpecError(std::string(what) + ": recursion must be scalar");
  const Index T = x.rows();
  CorrFilterResult out;
  out.path.resize(T, 1);
  out.loglik_t.resize(T);
  Vector state = start ? *start : rec.mean;
  for (Index t = 0; t < T; ++t) {
    out.path(t, 0) = state(0);
    const EquicorrStep s = step(state(0), x.row(t).transpose());
    check_finite(s.loglik, t, what);
    out.loglik_t(t) = s.loglik;
    out.loglik += s.loglik;
    state = rec.next(state, Vector::Constant(1, s.score / s.info));
    check_finite(state, t, what);
  }
  out.last_state = state;
  return out;
}

}  // namespace

CorrFilterResult filter_equicorr_mt(const Matrix& x, const Recursion& rec, double nu, const Vector* start) {
  if (x.cols() < 2) throw SpecError("filter_equicorr_mt: group needs at least two assets");
  return filter_scalar(x, rec, start, [nu](double eta, const Vector& xt) { return equicorr_mt_step(eta, xt, nu); },
                       "filter_equicorr_mt");
}

CorrFilterResult filter_equicorr_ht(const Matrix& x, const Recursion& rec, const Vector& nu, const Vector* start) {
  if (x.cols() < 2) throw SpecError("filter_equicorr_ht: group needs at least two assets");
  return filter_scalar(x, rec, start, [&nu](double eta, const Vector& xt) { return equicorr_ht_step(eta, xt, nu); },
                       "filter_equicorr_ht");
}

CorrFilterResult filter_sector_block(const Matrix& e, const Recursion& rec, const BlockSpec& sector_blocks,
                                     const ConvTSpec& dist, const Vector* start) {
  if (dist.kind == DistKind::MT)
    throw SpecError("sector factorization is not available for the multivariate t (common mixing variable)");
  return filter_corr(e, rec, CorrScoreModel(sector_blocks, dist), start);
}

// ---------------------------------------------------------------------------

Matrix simulate_core_joint(const CoreJointModel& model, const Recursion& rec, const Vector& lambda, Scaling scaling,
                           const Matrix& u, std::uint64_t seed, Matrix* path) {
  const Index T = u.rows();
  const Index n = model.n();
  std::mt19937_64 rng(seed);
  Matrix z(T, n);
  if (path) path->resize(T, model.dim());
  Vector state = rec.mean;
  const bool info = scaling != Scaling::Identity;
  for (Index t = 0; t < T; ++t) {
    if (path) path->row(t) = state.transpose();
    const Vector ut = u.row(t).transpose();
    const Matrix c = model.corr_model().corr_of(state.tail(model.p()));
    const Vector e = sym_sqrt(c) * draw_v(model.dist(), rng);
    Vector zt(n);
    for (Index i = 0; i < n; ++i) {
      const LoadingState ls = LoadingState::from_tau(state.segment(i * model.r(), model.r()));
      zt(i) = ls.rho.dot(ut) + ls.omega * e(i);
    }
    z.row(t) = zt.transpose();
    const auto ev = model.evaluate(state, zt, ut, info);
    state = rec.next(state, scaled_innovation(ev, model.r(), scaling, lambda));
    check_finite(state, t, "simulate_core_joint");
  }
  return z;
}

Matrix simulate_factor(const Recursion& rec, const ConvTSpec& dist, Index T, std::uint64_t seed) {
  const Index r = dist.n();
  const CorrScoreModel model = CorrScoreModel::unrestricted(r, dist);
  std::mt19937_64 rng(seed);
  Matrix f(T, r);
  Vector state = rec.mean;
  for (Index t = 0; t < T; ++t) {
    const Matrix c = model.corr_of(state);
    const Vector ft = sym_sqrt(c) * draw_v(dist, rng);
    f.row(t) = ft.transpose();
    const auto ev = model.evaluate(state, ft, true);
    if (model.p() > 0) state = rec.next(state, solve_info(ev.info, ev.score, t, "simulate_factor"));
    check_finite(state, t, "simulate_factor");
  }
  return f;
}

}  // namespace dfc
