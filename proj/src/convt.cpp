#include "dfc/convt.hpp"

#include "dfc/matcorr.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace dfc {

std::string to_string(DistKind k) {
  switch (k) {
    case DistKind::Gauss: return "gauss";
    case DistKind::MT: return "mt";
    case DistKind::CT: return "ct";
    case DistKind::HT: return "ht";
  }
  return "?";
}

DistKind dist_from_string(const std::string& s) {
  if (s == "gauss") return DistKind::Gauss;
  if (s == "mt") return DistKind::MT;
  if (s == "ct") return DistKind::CT;
  if (s == "ht") return DistKind::HT;
  throw SpecError("unknown distribution '" + s + "' (expected gauss|mt|ct|ht)");
}

ConvTSpec ConvTSpec::gauss(Index n) {
  ConvTSpec s;
  s.m = {n};
  s.nu = Vector::Constant(1, kInf);
  s.kind = DistKind::Gauss;
  return s;
}

ConvTSpec ConvTSpec::mt(Index n, double nu) {
  ConvTSpec s;
  s.m = {n};
  s.nu = Vector::Constant(1, nu);
  s.kind = DistKind::MT;
  s.validate();
  return s;
}

ConvTSpec ConvTSpec::ct(std::vector<Index> m, Vector nu) {
  ConvTSpec s;
  s.m = std::move(m);
  s.nu = std::move(nu);
  s.kind = DistKind::CT;
  s.validate();
  return s;
}

ConvTSpec ConvTSpec::ht(Vector nu) {
  ConvTSpec s;
  s.m.assign(static_cast<std::size_t>(nu.size()), 1);
  s.nu = std::move(nu);
  s.kind = DistKind::HT;
  s.validate();
  return s;
}

ConvTSpec ConvTSpec::for_blocks(DistKind kind, const BlockSpec& blocks, const Vector& nu) {
  switch (kind) {
    case DistKind::Gauss: return gauss(blocks.n());
    case DistKind::MT:
      if (nu.size() != 1) throw SpecError("mt needs one degrees-of-freedom value");
      return mt(blocks.n(), nu(0));
    case DistKind::CT:
      if (nu.size() != blocks.K()) throw SpecError("ct needs one degrees-of-freedom value per group");
      return ct(blocks.group_sizes, nu);
    case DistKind::HT:
      if (nu.size() != blocks.n()) throw SpecError("ht needs one degrees-of-freedom value per asset");
      return ht(nu);
  }
  throw SpecError("unknown distribution kind");
}

Index ConvTSpec::n() const {
  Index total = 0;
  for (Index v : m) total += v;
  return total;
}

bool ConvTSpec::gaussian(Index g) const { return kind == DistKind::Gauss || std::isinf(nu(g)); }

std::vector<Index> ConvTSpec::group_of_coordinate() const {
  std::vector<Index> out;
  for (Index g = 0; g < G(); ++g)
    for (Index i = 0; i < m[static_cast<std::size_t>(g)]; ++i) out.push_back(g);
  return out;
}

std::vector<Index> ConvTSpec::starts() const {
  std::vector<Index> s(m.size());
  Index acc = 0;
  for (std::size_t g = 0; g < m.size(); ++g) {
    s[g] = acc;
    acc += m[g];
  }
  return s;
}

ConvTSpec ConvTSpec::slice(Index first, Index count) const {
  if (kind == DistKind::Gauss) return gauss(count);
  ConvTSpec out;
  out.kind = kind;
  std::vector<double> nus;
  Index pos = 0;
  for (Index g = 0; g < G(); ++g) {
    const Index mg = m[static_cast<std::size_t>(g)];
    const bool inside = pos >= first && pos + mg <= first + count;
    const bool outside = pos + mg <= first || pos >= first + count;
    if (!inside && !outside) throw SpecError("distribution groups straddle the requested slice");
    if (inside) {
      out.m.push_back(mg);
      nus.push_back(nu(g));
    }
    pos += mg;
  }
  out.nu = Eigen::Map<Vector>(nus.data(), static_cast<Index>(nus.size()));
  return out;
}

void ConvTSpec::validate() const {
  if (m.empty()) throw SpecError("distribution has no groups");
  if (nu.size() != G()) throw SpecError("distribution needs one degrees-of-freedom value per group");
  for (Index g = 0; g < G(); ++g) {
    if (m[static_cast<std::size_t>(g)] < 1) throw SpecError("distribution group of size zero");
    if (!(nu(g) > 2.0)) {
      std::ostringstream os;
      os << "degrees of freedom must exceed 2 (got " << nu(g) << ")";
      throw SpecError(os.str());
    }
  }
  if (kind == DistKind::MT && G() != 1) throw SpecError("mt has a single group");
  if (kind == DistKind::HT)
    for (Index v : m)
      if (v != 1) throw SpecError("ht groups are univariate");
}

double log_const(double nu, Index m) {
  const double md = static_cast<double>(m);
  if (std::isinf(nu)) return -0.5 * md * std::log(2.0 * std::numbers::pi);
  return std::lgamma(0.5 * (nu + md)) - std::lgamma(0.5 * nu) - 0.5 * md * std::log((nu - 2.0) * std::numbers::pi);
}

ConvTTerms convt_terms(const Vector& v, const ConvTSpec& spec) {
  ConvTTerms t;
  t.w.resize(v.size());
  t.group_norm2.resize(spec.G());
  Index pos = 0;
  for (Index g = 0; g < spec.G(); ++g) {
    const Index mg = spec.m[static_cast<std::size_t>(g)];
    const double q = v.segment(pos, mg).squaredNorm();
    t.group_norm2(g) = q;
    if (spec.gaussian(g)) {
      t.loglik += log_const(kInf, mg) - 0.5 * q;
      t.w.segment(pos, mg).setOnes();
    } else {
      const double nu = spec.nu(g);
      const double md = static_cast<double>(mg);
      t.loglik += log_const(nu, mg) - 0.5 * (nu + md) * std::log1p(q / (nu - 2.0));
      t.w.segment(pos, mg).setConstant((nu + md) / (nu - 2.0 + q));
    }
    pos += mg;
  }
  return t;
}

namespace {

struct Solved {
  Eigen::PartialPivLU<Matrix> lu;
  double logabsdet = 0.0;
};

Solved factor(const Matrix& xi) {
  Solved s;
  s.lu.compute(xi);
  const Matrix& u = s.lu.matrixLU();
  for (Index i = 0; i < u.rows(); ++i) {
    const double d = std::abs(u(i, i));
    if (!(d > 1e-300) || !std::isfinite(d)) throw DomainError("scale matrix Xi is singular");
    s.logabsdet += std::log(d);
  }
  return s;
}

}  // namespace

double loglik(const Vector& x, const Vector& mu, const Matrix& xi, const ConvTSpec& spec) {
  if (x.size() != spec.n() || xi.rows() != spec.n()) throw SpecError("loglik: dimension mismatch");
  const Solved s = factor(xi);
  const Vector v = s.lu.solve(x - mu);
  return convt_terms(v, spec).loglik - s.logabsdet;
}

double loglik_block_mt(const Vector& x, const Vector& mu, const Matrix& c, const BlockSpec& blocks, double nu) {
  const CanonicalBlock cb = canonical_of_block(c, blocks);
  const BlockQuadForms q = block_loglik_helpers(cb, apply_Qt(blocks, x - mu));
  const Index n = blocks.n();
  if (std::isinf(nu)) return log_const(kInf, n) - 0.5 * q.logdet - 0.5 * q.quad;
  return log_const(nu, n) - 0.5 * q.logdet - 0.5 * (nu + static_cast<double>(n)) * std::log1p(q.quad / (nu - 2.0));
}

double loglik_block_gauss(const Vector& x, const Vector& mu, const Matrix& c, const BlockSpec& blocks) {
  return loglik_block_mt(x, mu, c, blocks, kInf);
}

double loglik_block_ct(const Vector& x, const Vector& mu, const Matrix& c, const BlockSpec& blocks, const Vector& nu) {
  if (nu.size() != blocks.K()) throw SpecError("loglik_block_ct: distribution partition must match the blocks");
  const CanonicalBlock cb = canonical_of_block(c, blocks);
  const BlockQuadForms q = block_loglik_helpers(cb, apply_Qt(blocks, x - mu));
  double ll = -0.5 * q.logdet;
  for (Index k = 0; k < blocks.K(); ++k) {
    const double nk = static_cast<double>(blocks.size(k));
    if (std::isinf(nu(k)))
      ll += log_const(kInf, blocks.size(k)) - 0.5 * q.group_quad(k);
    else
      ll += log_const(nu(k), blocks.size(k)) - 0.5 * (nu(k) + nk) * std::log1p(q.group_quad(k) / (nu(k) - 2.0));
  }
  return ll;
}

double loglik_block_ht(const Vector& x, const Vector& mu, const Matrix& c, const BlockSpec& blocks, const Vector& nu) {
  if (nu.size() != blocks.n()) throw SpecError("loglik_block_ht: need one degrees-of-freedom value per asset");
  const CanonicalBlock cb = canonical_of_block(c, blocks);
  const Vector y = apply_Qt(blocks, x - mu);
  const Index K = blocks.K();
  // V = Q D^{-1/2} Q'(x - mu)
  const SymEig e = sym_eig(cb.A);
  if (!(e.values.minCoeff() > 1e-12)) throw DomainError("loglik_block_ht: A is singular or indefinite");
  Vector z(y.size());
  z.head(K) = e.vectors * (e.vectors.transpose() * y.head(K)).cwiseQuotient(e.values.cwiseSqrt());
  Index col = K;
  for (Index k = 0; k < K; ++k) {
    const Index m = blocks.size(k);
    if (m > 1) z.segment(col, m - 1) = y.segment(col, m - 1) / std::sqrt(cb.delta(k));
    col += m - 1;
  }
  const Vector v = apply_Q(blocks, z);
  return convt_terms(v, ConvTSpec::ht(nu)).loglik - 0.5 * cb.logdet();
}

std::pair<Vector, Vector> score_mu_xi(const Vector& x, const Vector& mu, const Matrix& xi, const ConvTSpec& spec) {
  const Index n = spec.n();
  const Solved s = factor(xi);
  const Vector v = s.lu.solve(x - mu);
  const ConvTTerms t = convt_terms(v, spec);
  const Vector wv = t.w.cwiseProduct(v);
  const Matrix xi_inv_t = s.lu.inverse().transpose();
  Vector g_mu = xi_inv_t * wv;
  Matrix g_xi = g_mu * v.transpose() - xi_inv_t;
  return {g_mu, Eigen::Map<Vector>(g_xi.data(), n * n)};
}

InfoConstants info_constants(const ConvTSpec& spec) {
  InfoConstants ic;
  ic.phi.resize(spec.G());
  ic.psi.resize(spec.G());
  for (Index g = 0; g < spec.G(); ++g) {
    if (spec.gaussian(g)) {
      ic.phi(g) = 1.0;
      ic.psi(g) = 1.0;
    } else {
      const double nu = spec.nu(g);
      const double md = static_cast<double>(spec.m[static_cast<std::size_t>(g)]);
      ic.phi(g) = (nu + md) / (nu + md + 2.0);
      ic.psi(g) = ic.phi(g) * nu / (nu - 2.0);
    }
  }
  return ic;
}

double info_form(const ConvTSpec& spec, const InfoConstants& ic, const Matrix& x, const Matrix& y) {
  const Index n = spec.n();
  const auto starts = spec.starts();
  double total = (x.cwiseProduct(y.transpose())).sum();  // sum over all a, b of X_ab Y_ba
  for (Index g = 0; g < spec.G(); ++g) {
    const Index s = starts[static_cast<std::size_t>(g)];
    const Index mg = spec.m[static_cast<std::size_t>(g)];
    const auto xg = x.block(s, s, mg, mg);
    const auto yg = y.block(s, s, mg, mg);
    const double inner_gg = xg.cwiseProduct(yg).sum();
    const double trace_gg = xg.cwiseProduct(yg.transpose()).sum();
    const double inner_rows = x.middleRows(s, mg).cwiseProduct(y.middleRows(s, mg)).sum();
    const double phi = ic.phi(g), psi = ic.psi(g);
    // within-group terms replace the plain cross-term sum X_ab Y_ba for a, b in g
    total += (phi - 1.0) * xg.trace() * yg.trace() + phi * inner_gg + (phi - 1.0) * trace_gg +
             psi * (inner_rows - inner_gg);
  }
  (void)n;
  return total;
}

Matrix info_apply(const ConvTSpec& spec, const InfoConstants& ic, const Matrix& x) {
  Matrix r = x.transpose();
  Index s = 0;
  for (Index g = 0; g < spec.G(); ++g) {
    const Index mg = spec.m[static_cast<std::size_t>(g)];
    const double phi = ic.phi(g), psi = ic.psi(g);
    const auto xg = x.block(s, s, mg, mg);
    r.middleRows(s, mg) += psi * x.middleRows(s, mg);
    r.block(s, s, mg, mg) += (phi - psi) * xg + (phi - 1.0) * xg.transpose();
    r.block(s, s, mg, mg).diagonal().array() += (phi - 1.0) * xg.trace();
    s += mg;
  }
  return r;
}

Matrix info_gram(const ConvTSpec& spec, const InfoConstants& ic, const std::vector<Matrix>& xs) {
  const Index k = static_cast<Index>(xs.size());
  if (k == 0) return Matrix(0, 0);
  const Index nn = xs.front().size();
  Matrix a(nn, k), b(nn, k);
  for (Index j = 0; j < k; ++j) {
    const Matrix& x = xs[static_cast<std::size_t>(j)];
    a.col(j) = Eigen::Map<const Vector>(x.data(), nn);
    const Matrix r = info_apply(spec, ic, x);
    b.col(j) = Eigen::Map<const Vector>(r.data(), nn);
  }
  Matrix g = a.transpose() * b;
  return 0.5 * (g + g.transpose());
}

Matrix upsilon(const ConvTSpec& spec) {
  const Index n = spec.n();
  const auto grp = spec.group_of_coordinate();
  const InfoConstants ic = info_constants(spec);
  auto g = [&](Index i) { return grp[static_cast<std::size_t>(i)]; };
  auto d = [](Index i, Index j) { return i == j ? 1.0 : 0.0; };
  Matrix up(n * n, n * n);
  for (Index b = 0; b < n; ++b)
    for (Index a = 0; a < n; ++a)
      for (Index dd = 0; dd < n; ++dd)
        for (Index c = 0; c < n; ++c) {
          double v = 0.0;
          if (g(a) == g(c)) {
            const Index h = g(a);
            if (g(b) == h && g(dd) == h)
              v = ic.phi(h) * (d(a, b) * d(c, dd) + d(a, c) * d(b, dd) + d(a, dd) * d(b, c)) - d(a, b) * d(c, dd);
            else if (g(b) != h && g(dd) != h)
              v = d(a, c) * d(b, dd) * ic.psi(h);
          } else if (g(b) == g(c) && g(dd) == g(a)) {
            v = d(a, dd) * d(b, c);
          }
          // subtract the commutation matrix: K_{(ab),(cd)} = d(a,d) d(b,c)
          up(a + b * n, c + dd * n) = v - d(a, dd) * d(b, c);
        }
  return up;
}

Matrix upsilon_monte_carlo(const ConvTSpec& spec, Index draws, std::uint64_t seed) {
  const Index n = spec.n();
  std::mt19937_64 rng(seed);
  Matrix acc = Matrix::Zero(n * n, n * n);
  Vector s(n * n);
  for (Index k = 0; k < draws; ++k) {
    const Vector v = draw_v(spec, rng);
    const ConvTTerms t = convt_terms(v, spec);
    const Vector wv = t.w.cwiseProduct(v);
    for (Index b = 0; b < n; ++b)
      for (Index a = 0; a < n; ++a) s(a + b * n) = wv(a) * v(b) - (a == b ? 1.0 : 0.0);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(s);
  }
  acc = acc.selfadjointView<Eigen::Lower>();
  acc /= static_cast<double>(draws);
  IndexMaps maps(n);
  return acc - maps.dense_commutation();
}

std::pair<Matrix, Matrix> information_mu_xi(const ConvTSpec& spec, const Matrix& xi) {
  const Index n = spec.n();
  const Solved s = factor(xi);
  const Matrix xi_inv = s.lu.inverse();
  const InfoConstants ic = info_constants(spec);
  const auto grp = spec.group_of_coordinate();
  Vector psi_c(n);
  for (Index i = 0; i < n; ++i) psi_c(i) = ic.psi(grp[static_cast<std::size_t>(i)]);
  Matrix i_mu = xi_inv.transpose() * psi_c.asDiagonal() * xi_inv;
  IndexMaps maps(n);
  const Matrix i0 = upsilon(spec) + maps.dense_commutation();
  // (I (x) Xi'^{-1}) applied on both sides
  Matrix left = Matrix::Zero(n * n, n * n);
  for (Index b = 0; b < n; ++b) left.block(b * n, b * n, n, n) = xi_inv.transpose();
  Matrix i_xi = left * i0 * left.transpose();
  return {i_mu, i_xi};
}

Vector draw_v(const ConvTSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(spec.n());
  Index pos = 0;
  for (Index g = 0; g < spec.G(); ++g) {
    const Index mg = spec.m[static_cast<std::size_t>(g)];
    for (Index i = 0; i < mg; ++i) v(pos + i) = normal(rng);
    if (!spec.gaussian(g)) {
      const double nu = spec.nu(g);
      std::chi_squared_distribution<double> chi(nu);
      const double scale = std::sqrt((nu - 2.0) / chi(rng));
      v.segment(pos, mg) *= scale;
    }
    pos += mg;
  }
  return v;
}

Matrix sample(const ConvTSpec& spec, const Vector& mu, const Matrix& xi, Index count, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  Matrix out(count, spec.n());
  for (Index k = 0; k < count; ++k) out.row(k) = (mu + xi * draw_v(spec, rng)).transpose();
  return out;
}

}  // namespace dfc
