#include "dfc/egarch.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace dfc {

namespace {

const double kAbsMean = std::sqrt(2.0 / std::numbers::pi);
const double kLog2Pi = std::log(2.0 * std::numbers::pi);

EgarchParams unpack(const Vector& x) {
  EgarchParams p;
  p.a0 = x(0);
  p.a1 = std::tanh(x(1));
  p.b0 = x(2);
  p.b1 = std::tanh(x(3));
  p.b2 = x(4);
  p.b3 = x(5);
  return p;
}

}  // namespace

void EgarchParams::validate() const {
  if (!(std::abs(a1) < 1.0)) throw SpecError("EGARCH: |a1| must be below 1");
  if (!(std::abs(b1) < 1.0)) throw SpecError("EGARCH: |b1| must be below 1");
  if (!std::isfinite(a0) || !std::isfinite(b0) || !std::isfinite(b2) || !std::isfinite(b3))
    throw SpecError("EGARCH: non-finite parameter");
}

EgarchFilter egarch_filter(const Vector& returns, const EgarchParams& p) {
  p.validate();
  const Index T = returns.size();
  EgarchFilter out;
  out.z.resize(T);
  out.sigma.resize(T);
  double prev = p.a0 / (1.0 - p.a1);
  double log_s = (p.b0 + p.b3 * kAbsMean) / (1.0 - p.b1);
  for (Index t = 0; t < T; ++t) {
    const double s = std::exp(log_s);
    const double z = (returns(t) - p.a0 - p.a1 * prev) / s;
    out.sigma(t) = s;
    out.z(t) = z;
    out.loglik += -0.5 * kLog2Pi - log_s - 0.5 * z * z;
    prev = returns(t);
    log_s = p.b0 + p.b1 * log_s + p.b2 * z + p.b3 * std::abs(z);
  }
  return out;
}

EgarchFit egarch_fit(const Vector& returns, const BfgsOptions& opt) {
  const Index T = returns.size();
  if (T < 100) throw ValidationError("EGARCH fit needs at least 100 observations");
  if (!returns.allFinite()) throw ValidationError("EGARCH fit: non-finite returns");
  const double mean = returns.mean();
  const double sd = std::sqrt((returns.array() - mean).square().sum() / static_cast<double>(T - 1));
  if (!(sd > 0.0)) throw ValidationError("EGARCH fit: constant series");
  const Vector x = returns / sd;

  const double b1 = 0.95, b3 = 0.1;
  Vector start(6);
  start << mean / sd, 0.0, -b3 * kAbsMean, std::atanh(b1), -0.05, b3;
  const Objective obj = [&x, T](const Vector& th) {
    const EgarchParams p = unpack(th);
    if (!(std::abs(p.b1) < 1.0 - 1e-12) || !(std::abs(p.a1) < 1.0 - 1e-12)) return kInf;
    const double ll = egarch_filter(x, p).loglik;
    return std::isfinite(ll) ? -ll / static_cast<double>(T) : kInf;
  };
  BfgsOptions o = opt;
  o.grad_tol = std::min(o.grad_tol, 1e-6);
  o.rel_tol = std::min(o.rel_tol, 1e-12);
  o.max_iter = std::max(o.max_iter, 500);
  EgarchFit fit;
  fit.optim = minimize_bfgs(obj, start, o);
  EgarchParams p = unpack(fit.optim.x);
  // undo the scaling: R = sd x, sigma_R = sd sigma_x
  p.a0 *= sd;
  p.b0 += (1.0 - p.b1) * std::log(sd);
  fit.params = p;
  fit.filter = egarch_filter(returns, p);
  return fit;
}

Vector egarch_returns(const EgarchParams& p, const Vector& z_in, Vector* sigma) {
  p.validate();
  const Index T = z_in.size();
  Vector r(T);
  if (sigma) sigma->resize(T);
  double prev = p.a0 / (1.0 - p.a1);
  double log_s = (p.b0 + p.b3 * kAbsMean) / (1.0 - p.b1);
  for (Index t = 0; t < T; ++t) {
    const double z = z_in(t);
    const double s = std::exp(log_s);
    r(t) = p.a0 + p.a1 * prev + s * z;
    if (sigma) (*sigma)(t) = s;
    prev = r(t);
    log_s = p.b0 + p.b1 * log_s + p.b2 * z + p.b3 * std::abs(z);
  }
  return r;
}

Vector egarch_simulate(const EgarchParams& p, Index T, std::uint64_t seed, Vector* sigma) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Vector z(T);
  for (Index t = 0; t < T; ++t) z(t) = nd(rng);
  return egarch_returns(p, z, sigma);
}

}  // namespace dfc
