#include "dfc/estimate.hpp"

#include "dfc/loadings.hpp"
#include "dfc/matcorr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dfc {

namespace {

constexpr double kRhoShrink = 0.98;
constexpr double kNuStartCap = 200.0;

double enc_beta(double b) { return std::atanh(std::clamp(b, -0.9999, 0.9999)); }
double enc_alpha(double a) { return softplus_inv(std::max(a, 1e-8)); }

double median(std::vector<double> v) {
  const std::size_t h = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h), v.end());
  if (v.size() % 2 == 1) return v[h];
  return 0.5 * (v[h] + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h)));
}

// Rejects failures (domain errors, divergence, non-finite values) with +inf.
template <class F>
Objective guarded(F f) {
  return [f](const Vector& x) {
    try {
      const double v = f(x);
      return std::isfinite(v) ? v : kInf;
    } catch (const Error&) {
      return kInf;
    }
  };
}

Vector decode_nu(const Vector& x) {
  Vector nu(x.size());
  for (Index i = 0; i < x.size(); ++i) nu(i) = nu_of(x(i));
  return nu;
}

Vector encode_nu(const Vector& nu) {
  Vector x(nu.size());
  for (Index i = 0; i < nu.size(); ++i) x(i) = nu_inv(std::min(nu(i), kNuStartCap));
  return x;
}

// Screens the candidate values for the trailing `k` entries (all set to one
// common nu, plus the supplied starting point) and runs BFGS from the best.
BfgsResult optimize_with_nu_screen(const Objective& obj, Vector x0, Index k, const FitOptions& opt,
                                   const BfgsOptions& bfgs) {
  if (k > 0) {
    double best = obj(x0);
    Vector best_x = x0;
    for (double nu : opt.nu_starts) {
      Vector x = x0;
      x.tail(k).setConstant(nu_inv(nu));
      const double v = obj(x);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
    x0 = best_x;
  }
  return minimize_bfgs(obj, x0, bfgs);
}

Matrix sample_corr(const Matrix& x) {
  const Vector mean = x.colwise().mean();
  const Matrix c = x.rowwise() - mean.transpose();
  Matrix cov = c.transpose() * c / static_cast<double>(x.rows() - 1);
  const Vector sd = cov.diagonal().cwiseSqrt();
  Matrix out = sd.cwiseInverse().asDiagonal() * cov * sd.cwiseInverse().asDiagonal();
  out.diagonal().setOnes();
  return 0.5 * (out + out.transpose());
}

Vector static_eta(const Matrix& e, const BlockSpec& blocks) {
  if (blocks.structure == Structure::Unrestricted) return gamma_of_corr(sample_corr(e));
  return eta_of_block(static_block_corr(e, blocks).corr, blocks);
}

void check_panels(const Matrix& z, const Matrix& u) {
  if (z.rows() != u.rows()) throw ValidationError("Z and U panels have different lengths");
  if (z.rows() < 2) throw ValidationError("panel too short");
  if (!z.allFinite() || !u.allFinite()) throw ValidationError("panel contains non-finite values");
}

double univariate_loglik(double x, double nu) {
  if (std::isinf(nu)) return log_const(kInf, 1) - 0.5 * x * x;
  return log_const(nu, 1) - 0.5 * (nu + 1.0) * std::log1p(x * x / (nu - 2.0));
}

}  // namespace

Index dist_param_count(DistKind kind, const BlockSpec& blocks) {
  switch (kind) {
    case DistKind::Gauss: return 0;
    case DistKind::MT: return 1;
    case DistKind::CT: return blocks.K();
    case DistKind::HT: return blocks.n();
  }
  return 0;
}

Index factor_param_count(Index r, DistKind kind) {
  return 3 * vecl_size(r) + dist_param_count(kind, BlockSpec({r}, {0}, Structure::Unrestricted));
}

Index core_param_count(Index n, Index r, const BlockSpec& blocks, DistKind kind, Scaling scaling) {
  if (blocks.n() != n) throw SpecError("core_param_count: block spec does not match n");
  return 3 * r * n + (scaling == Scaling::Tikhonov ? n : 0) + 3 * eta_size(blocks) + dist_param_count(kind, blocks);
}

double bic(double loglik, Index p, Index T) {
  if (T < 1) throw SpecError("bic: T must be positive");
  return -2.0 * loglik + static_cast<double>(p) * std::log(static_cast<double>(T));
}

Matrix static_loadings(const Matrix& z, const Matrix& u) {
  check_panels(z, u);
  Matrix rho = (z.transpose() * u) / static_cast<double>(z.rows());
  for (Index i = 0; i < rho.rows(); ++i) {
    const double nr = rho.row(i).norm();
    if (nr > kRhoShrink) rho.row(i) *= kRhoShrink / nr;
  }
  return rho;
}

Matrix static_residuals(const Matrix& z, const Matrix& u, const Matrix& rho) {
  Matrix e = z - u * rho.transpose();
  for (Index i = 0; i < rho.rows(); ++i) e.col(i) /= std::sqrt(1.0 - rho.row(i).squaredNorm());
  return e;
}

DynamicSummary summarize(const Recursion& rec) {
  DynamicSummary s;
  if (rec.size() == 0) return s;
  s.mu_bar = rec.mean.mean();
  s.beta_bar = rec.beta.mean();
  s.alpha_bar = rec.alpha.mean();
  return s;
}

// ---------------------------------------------------------------------------

FactorFit fit_factor_model(const Matrix& f, DistKind kind, const FitOptions& opt) {
  const Index T = f.rows();
  const Index r = f.cols();
  if (r < 1 || T < 10) throw ValidationError("factor panel too small");
  if (!f.allFinite()) throw ValidationError("factor panel contains non-finite values");
  const BlockSpec one({r}, {0}, Structure::Unrestricted);
  const Index kd = dist_param_count(kind, one);
  const Vector mean = r > 1 ? gamma_of_corr(sample_corr(f)) : Vector();
  const Index pg = mean.size();

  auto build = [&](const Vector& x, Recursion& rec, ConvTSpec& dist) {
    rec = Recursion::constant(mean, std::tanh(x(0)), softplus(x(1)));
    dist = ConvTSpec::for_blocks(kind, one, decode_nu(x.tail(kd)));
  };
  const Objective obj = guarded([&](const Vector& x) {
    Recursion rec;
    ConvTSpec dist;
    build(x, rec, dist);
    return -filter_factor_corr(f, rec, dist).loglik / static_cast<double>(T);
  });
  Vector x0(2 + kd);
  x0(0) = enc_beta(opt.beta_start);
  x0(1) = enc_alpha(opt.alpha_start);
  if (kd > 0) x0.tail(kd).setConstant(nu_inv(10.0));

  FactorFit fit;
  fit.kind = kind;
  fit.T = T;
  if (pg == 0) {
    // no dynamics: only the distribution parameters are free
    const Objective sub = guarded([&](const Vector& y) {
      Vector x = x0;
      x.tail(kd) = y;
      return obj(x);
    });
    const Vector y0 = x0.tail(kd);
    fit.optim = optimize_with_nu_screen(sub, y0, kd, opt, opt.bfgs);
    x0.tail(kd) = fit.optim.x;
    fit.optim.x = x0;
  } else {
    fit.optim = optimize_with_nu_screen(obj, x0, kd, opt, opt.bfgs);
  }
  build(fit.optim.x, fit.rec, fit.dist);
  fit.filter = filter_factor_corr(f, fit.rec, fit.dist);
  fit.loglik = fit.filter.loglik;
  fit.p = factor_param_count(r, kind);
  fit.bic = bic(fit.loglik, fit.p, T);
  return fit;
}

FactorFilterResult run_factor_model(const FactorFit& fit, const Matrix& f) {
  return filter_factor_corr(f, fit.rec, fit.dist);
}

// ---------------------------------------------------------------------------

JointFit fit_core_joint(const Matrix& z, const Matrix& u, const BlockSpec& blocks, DistKind kind, Scaling scaling,
                        const FitOptions& opt, const JointStart* start) {
  check_panels(z, u);
  blocks.validate();
  const Index T = z.rows();
  const Index n = z.cols();
  const Index r = u.cols();
  if (n > kJointMaxAssets) {
    std::ostringstream os;
    os << "joint estimation is limited to n <= " << kJointMaxAssets << " assets (got " << n
       << "); use the decoupled method";
    throw ValidationError(os.str());
  }
  if (blocks.n() != n) throw ValidationError("block specification does not match the number of assets");

  const Matrix rho = static_loadings(z, u);
  const Vector eta_bar = static_eta(static_residuals(z, u, rho), blocks);
  const Index p = eta_bar.size();
  Vector mean(r * n + p);
  for (Index i = 0; i < n; ++i) mean.segment(i * r, r) = tau_of_rho(rho.row(i).transpose());
  mean.tail(p) = eta_bar;

  const bool tik = scaling == Scaling::Tikhonov;
  const Index k_eta = p > 0 ? 2 : 0;
  const Index k_lam = tik ? n : 0;
  const Index kd = dist_param_count(kind, blocks);
  const Index dim = 2 + k_eta + k_lam + kd;

  struct Decoded {
    Recursion rec;
    Vector lambda;
    ConvTSpec dist;
  };
  auto decode = [&](const Vector& x) {
    Decoded d;
    Vector beta(r * n + p), alpha(r * n + p);
    beta.head(r * n).setConstant(std::tanh(x(0)));
    alpha.head(r * n).setConstant(softplus(x(1)));
    if (p > 0) {
      beta.tail(p).setConstant(std::tanh(x(2)));
      alpha.tail(p).setConstant(softplus(x(3)));
    }
    d.rec = Recursion(mean, beta, alpha);
    d.lambda = tik ? Vector(x.segment(2 + k_eta, n).array().exp()) : Vector::Zero(n);
    d.dist = ConvTSpec::for_blocks(kind, blocks, decode_nu(x.tail(kd)));
    return d;
  };
  const Objective obj = guarded([&](const Vector& x) {
    const Decoded d = decode(x);
    const CoreJointModel model(r, blocks, d.dist);
    return -filter_core_joint(z, u, d.rec, d.lambda, scaling, model).loglik / static_cast<double>(T);
  });

  const JointStart def;
  const JointStart& s = start ? *start : def;
  Vector x0(dim);
  x0(0) = enc_beta(s.beta_tau);
  x0(1) = enc_alpha(s.alpha_tau);
  if (p > 0) {
    x0(2) = enc_beta(s.beta_eta);
    x0(3) = enc_alpha(s.alpha_eta);
  }
  if (tik) {
    if (s.lambda.size() == n)
      x0.segment(2 + k_eta, n) = s.lambda.array().max(1e-8).log().matrix();
    else
      x0.segment(2 + k_eta, n).setConstant(1.0);
  }
  if (kd > 0) x0.tail(kd) = s.nu.size() == kd ? encode_nu(s.nu) : Vector::Constant(kd, nu_inv(10.0));

  BfgsOptions bfgs = opt.bfgs;
  bfgs.central = false;
  JointFit fit;
  fit.optim = start ? minimize_bfgs(obj, x0, bfgs) : optimize_with_nu_screen(obj, x0, kd, opt, bfgs);
  const Decoded d = decode(fit.optim.x);
  fit.r = r;
  fit.blocks = blocks;
  fit.dist = d.dist;
  fit.scaling = scaling;
  fit.rec = d.rec;
  fit.lambda = d.lambda;
  fit.filter = filter_core_joint(z, u, fit.rec, fit.lambda, scaling, fit.model());
  fit.loglik = fit.filter.loglik;
  fit.T = T;
  fit.p = core_param_count(n, r, blocks, kind, scaling);
  fit.bic = bic(fit.loglik, fit.p, T);
  return fit;
}

CoreFilterResult run_core_joint(const JointFit& fit, const Matrix& z, const Matrix& u) {
  check_panels(z, u);
  return filter_core_joint(z, u, fit.rec, fit.lambda, fit.scaling, fit.model());
}

// ---------------------------------------------------------------------------

LoadingFit fit_loading(const Vector& zi, const Matrix& u, Scaling scaling, const FitOptions& opt) {
  const Index T = zi.size();
  if (u.rows() != T) throw ValidationError("Z_i and U have different lengths");
  Vector rho = u.transpose() * zi / static_cast<double>(T);
  if (rho.norm() > kRhoShrink) rho *= kRhoShrink / rho.norm();
  const Vector mean = tau_of_rho(rho);
  const bool tik = scaling == Scaling::Tikhonov;

  auto decode = [&](const Vector& x, Recursion& rec, double& lambda, double& nu) {
    rec = Recursion::constant(mean, std::tanh(x(0)), softplus(x(1)));
    lambda = tik ? std::exp(x(2)) : 0.0;
    nu = nu_of(x(x.size() - 1));
  };
  const Objective obj = guarded([&](const Vector& x) {
    Recursion rec;
    double lambda, nu;
    decode(x, rec, lambda, nu);
    return -filter_loading_decoupled(zi, u, rec, lambda, nu, scaling).loglik / static_cast<double>(T);
  });
  Vector x0(tik ? 4 : 3);
  x0(0) = enc_beta(opt.beta_start);
  x0(1) = enc_alpha(opt.alpha_start);
  if (tik) x0(2) = 1.0;
  x0(x0.size() - 1) = nu_inv(10.0);

  LoadingFit fit;
  fit.scaling = scaling;
  fit.optim = optimize_with_nu_screen(obj, x0, 1, opt, opt.bfgs);
  decode(fit.optim.x, fit.rec, fit.lambda, fit.nu_star);
  fit.filter = filter_loading_decoupled(zi, u, fit.rec, fit.lambda, fit.nu_star, scaling);
  return fit;
}

std::vector<LoadingFit> fit_stage1(const Matrix& z, const Matrix& u, Scaling scaling, const FitOptions& opt) {
  check_panels(z, u);
  std::vector<LoadingFit> out;
  out.reserve(static_cast<std::size_t>(z.cols()));
  for (Index i = 0; i < z.cols(); ++i) out.push_back(fit_loading(z.col(i), u, scaling, opt));
  return out;
}

std::vector<Stage2Unit> stage2_units(const BlockSpec& blocks, DistKind kind) {
  blocks.validate();
  std::vector<Stage2Unit> units;
  const bool split = kind != DistKind::MT &&
                     (blocks.structure == Structure::SparseBlock || blocks.structure == Structure::DiagonalBlock);
  if (!split) {
    Stage2Unit u;
    u.first = 0;
    u.count = blocks.n();
    u.blocks = blocks;
    units.push_back(u);
    return units;
  }
  Index eta_pos = 0;
  for (Index s = 0; s < blocks.num_sectors(); ++s) {
    Stage2Unit u;
    std::tie(u.first, u.count) = blocks.sector_range(s);
    u.blocks = blocks.sector_spec(s);
    u.eta_first = eta_pos;
    u.equicorr = blocks.structure == Structure::DiagonalBlock;
    eta_pos += eta_size(u.blocks);
    units.push_back(u);
  }
  return units;
}

Stage2Path run_stage2_unit(const Stage2Unit& unit, const Matrix& e_full) {
  const Matrix e = e_full.middleCols(unit.first, unit.count);
  const Index T = e.rows();
  Stage2Path out;
  if (!unit.equicorr) {
    const CorrFilterResult res = filter_corr(e, unit.rec, CorrScoreModel(unit.blocks, unit.dist));
    out.eta = res.path;
    out.loglik_t = res.loglik_t;
    return out;
  }
  const BlockSpec& b = unit.blocks;
  const auto starts = b.group_starts();
  out.eta.resize(T, eta_size(b));
  out.loglik_t = Vector::Zero(T);
  Index j = 0;
  for (Index k = 0; k < b.K(); ++k) {
    const Index first = starts[static_cast<std::size_t>(k)];
    const Index nk = b.size(k);
    const ConvTSpec dk = unit.dist.slice(first, nk);
    const Vector nu = dk.kind == DistKind::Gauss ? Vector::Constant(nk, kInf) : dk.nu;
    if (nk == 1) {
      for (Index t = 0; t < T; ++t) out.loglik_t(t) += univariate_loglik(e(t, first), nu(0));
      continue;
    }
    const Recursion rk(unit.rec.mean.segment(j, 1), unit.rec.beta.segment(j, 1), unit.rec.alpha.segment(j, 1));
    const Matrix x = e.middleCols(first, nk);
    const CorrFilterResult res =
        dk.kind == DistKind::HT ? filter_equicorr_ht(x, rk, nu) : filter_equicorr_mt(x, rk, nu(0));
    out.eta.col(j) = res.path.col(0);
    out.loglik_t += res.loglik_t;
    ++j;
  }
  return out;
}

DecoupledFit fit_core_decoupled(const Matrix& z, const Matrix& u, const BlockSpec& blocks, DistKind kind,
                                Scaling scaling, const FitOptions& opt, const std::vector<LoadingFit>* stage1) {
  check_panels(z, u);
  blocks.validate();
  const Index T = z.rows();
  const Index n = z.cols();
  if (blocks.n() != n) throw ValidationError("block specification does not match the number of assets");
  DecoupledFit fit;
  fit.r = u.cols();
  fit.blocks = blocks;
  fit.kind = kind;
  fit.scaling = scaling;
  fit.T = T;
  if (stage1) {
    if (static_cast<Index>(stage1->size()) != n) throw ValidationError("stage-1 fits do not match the panel");
    fit.stage1 = *stage1;
  } else {
    fit.stage1 = fit_stage1(z, u, scaling, opt);
  }
  Matrix resid(T, n);
  Vector nu_star(n);
  fit.logdet_omega = 0.0;
  for (Index i = 0; i < n; ++i) {
    const LoadingFit& lf = fit.stage1[static_cast<std::size_t>(i)];
    if (lf.filter.resid.size() != T) throw ValidationError("stage-1 fits were run on a different sample");
    resid.col(i) = lf.filter.resid;
    fit.logdet_omega += lf.filter.omega.array().log().sum();
    nu_star(i) = std::min(lf.nu_star, kNuStartCap);
  }

  const Vector eta_bar = static_eta(resid, blocks);
  fit.stage2 = stage2_units(blocks, kind);
  BfgsOptions bfgs = opt.bfgs;
  bfgs.central = false;
  std::vector<double> all_nu;
  fit.loglik_e = 0.0;
  for (Stage2Unit& unit : fit.stage2) {
    const Index pu = eta_size(unit.blocks);
    const Vector mean = eta_bar.segment(unit.eta_first, pu);
    const Index kd = dist_param_count(kind, unit.blocks);
    const Index k_dyn = pu > 0 ? 2 : 0;
    auto decode = [&](const Vector& x, Recursion& rec, ConvTSpec& dist) {
      rec = pu > 0 ? Recursion::constant(mean, std::tanh(x(0)), softplus(x(1))) : Recursion::constant(mean, 0.0, 0.0);
      dist = ConvTSpec::for_blocks(kind, unit.blocks, decode_nu(x.tail(kd)));
    };
    const Objective obj = guarded([&](const Vector& x) {
      Stage2Unit trial = unit;
      decode(x, trial.rec, trial.dist);
      return -run_stage2_unit(trial, resid).loglik_t.sum() / static_cast<double>(T);
    });
    Vector x0(k_dyn + kd);
    if (pu > 0) {
      x0(0) = enc_beta(opt.beta_start);
      x0(1) = enc_alpha(opt.alpha_start);
    }
    // starting dof from the stage-1 marginal fits
    if (kd > 0) {
      Vector nu0(kd);
      const Vector ns = nu_star.segment(unit.first, unit.count);
      if (kind == DistKind::MT) {
        nu0(0) = ns.mean();
      } else if (kind == DistKind::HT) {
        nu0 = ns;
      } else {
        const auto st = unit.blocks.group_starts();
        for (Index k = 0; k < unit.blocks.K(); ++k)
          nu0(k) = ns.segment(st[static_cast<std::size_t>(k)], unit.blocks.size(k)).mean();
      }
      x0.tail(kd) = encode_nu(nu0);
    }
    unit.optim = optimize_with_nu_screen(obj, x0, kd, opt, bfgs);
    decode(unit.optim.x, unit.rec, unit.dist);
    unit.loglik = run_stage2_unit(unit, resid).loglik_t.sum();
    fit.loglik_e += unit.loglik;
    for (Index g = 0; g < unit.dist.nu.size(); ++g) all_nu.push_back(unit.dist.nu(g));
  }
  const Vector nu_all = Eigen::Map<Vector>(all_nu.data(), static_cast<Index>(all_nu.size()));
  fit.dist = ConvTSpec::for_blocks(kind, blocks, kind == DistKind::Gauss ? Vector() : nu_all);
  fit.loglik = fit.loglik_e - fit.logdet_omega;
  fit.p = core_param_count(n, fit.r, blocks, kind, scaling);
  fit.bic = bic(fit.loglik, fit.p, T);
  return fit;
}

DecoupledPath run_core_decoupled(const DecoupledFit& fit, const Matrix& z, const Matrix& u) {
  check_panels(z, u);
  const Index T = z.rows();
  const Index n = z.cols();
  const Index r = u.cols();
  if (n != fit.blocks.n() || r != fit.r) throw ValidationError("panels do not match the fitted model");
  DecoupledPath out;
  out.tau.resize(T, r * n);
  out.omega.resize(T, n);
  out.resid.resize(T, n);
  for (Index i = 0; i < n; ++i) {
    const LoadingFit& lf = fit.stage1[static_cast<std::size_t>(i)];
    const LoadingFilterResult res = filter_loading_decoupled(z.col(i), u, lf.rec, lf.lambda, lf.nu_star, lf.scaling);
    out.tau.middleCols(i * r, r) = res.tau;
    out.omega.col(i) = res.omega;
    out.resid.col(i) = res.resid;
  }
  out.eta.resize(T, eta_size(fit.blocks));
  out.loglik_e_t = Vector::Zero(T);
  for (const Stage2Unit& unit : fit.stage2) {
    const Stage2Path sp = run_stage2_unit(unit, out.resid);
    out.eta.middleCols(unit.eta_first, sp.eta.cols()) = sp.eta;
    out.loglik_e_t += sp.loglik_t;
  }
  out.log_omega_t = out.omega.array().log().rowwise().sum();
  out.loglik_t = out.loglik_e_t - out.log_omega_t;
  return out;
}

JointFit joint_view(const DecoupledFit& fit) {
  const Index n = fit.blocks.n();
  const Index r = fit.r;
  const Index p = eta_size(fit.blocks);
  Vector mean(r * n + p), beta(r * n + p), alpha(r * n + p);
  JointFit j;
  j.lambda.resize(n);
  for (Index i = 0; i < n; ++i) {
    const LoadingFit& lf = fit.stage1[static_cast<std::size_t>(i)];
    mean.segment(i * r, r) = lf.rec.mean;
    beta.segment(i * r, r) = lf.rec.beta;
    alpha.segment(i * r, r) = lf.rec.alpha;
    j.lambda(i) = lf.lambda;
  }
  for (const Stage2Unit& u : fit.stage2) {
    const Index pu = u.rec.size();
    mean.segment(r * n + u.eta_first, pu) = u.rec.mean;
    beta.segment(r * n + u.eta_first, pu) = u.rec.beta;
    alpha.segment(r * n + u.eta_first, pu) = u.rec.alpha;
  }
  j.r = r;
  j.blocks = fit.blocks;
  j.dist = fit.dist;
  j.scaling = fit.scaling;
  j.rec = Recursion(mean, beta, alpha);
  j.loglik = fit.loglik;
  j.T = fit.T;
  j.p = fit.p;
  j.bic = fit.bic;
  return j;
}

JointStart joint_start_from(const DecoupledFit& fit) {
  JointStart s;
  const Index n = static_cast<Index>(fit.stage1.size());
  s.lambda.resize(n);
  if (n == 0) return s;
  std::vector<double> bt, at;
  for (const LoadingFit& lf : fit.stage1) {
    bt.push_back(lf.rec.beta.mean());
    at.push_back(lf.rec.alpha.mean());
  }
  s.beta_tau = median(bt);
  s.alpha_tau = median(at);
  // pooled alpha: rescale lambda so each asset keeps its stage-1 step alpha / lambda
  for (Index i = 0; i < n; ++i) {
    const LoadingFit& lf = fit.stage1[static_cast<std::size_t>(i)];
    const double a = lf.rec.alpha.mean();
    s.lambda(i) = lf.lambda > 0.0 ? lf.lambda * s.alpha_tau / a : std::exp(1.0);
  }
  double be = 0.0, ae = 0.0;
  Index cnt = 0;
  for (const Stage2Unit& unit : fit.stage2)
    if (unit.rec.size() > 0) {
      be += unit.rec.beta.mean();
      ae += unit.rec.alpha.mean();
      ++cnt;
    }
  if (cnt > 0) {
    s.beta_eta = be / static_cast<double>(cnt);
    s.alpha_eta = ae / static_cast<double>(cnt);
  }
  if (fit.kind != DistKind::Gauss) s.nu = fit.dist.nu;
  return s;
}

// ---------------------------------------------------------------------------

namespace {

OosReport split_loglik(const Vector& ll, Index split) {
  const Index T = ll.size();
  if (split < 1 || split > T) throw ValidationError("split must lie inside the sample");
  OosReport rep;
  rep.split = split;
  rep.T = T;
  rep.loglik_in = ll.head(split).sum();
  rep.loglik_out = ll.tail(T - split).sum();
  return rep;
}

}  // namespace

OosReport evaluate_oos(const JointFit& fit, const Matrix& z, const Matrix& u, Index split) {
  return split_loglik(run_core_joint(fit, z, u).loglik_t, split);
}

OosReport evaluate_oos(const DecoupledFit& fit, const Matrix& z, const Matrix& u, Index split) {
  return split_loglik(run_core_decoupled(fit, z, u).loglik_t, split);
}

OosReport evaluate_oos(const FactorFit& fit, const Matrix& f, Index split) {
  return split_loglik(run_factor_model(fit, f).loglik_t, split);
}

}  // namespace dfc
