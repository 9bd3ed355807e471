#include "dfc/blockcorr.hpp"

#include "dfc/matcorr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dfc {

std::string to_string(Structure s) {
  switch (s) {
    case Structure::Unrestricted: return "unrestricted";
    case Structure::FullBlock: return "fbc";
    case Structure::SparseBlock: return "sbc";
    case Structure::DiagonalBlock: return "dbc";
  }
  return "?";
}

Structure structure_from_string(const std::string& s) {
  if (s == "unrestricted") return Structure::Unrestricted;
  if (s == "fbc") return Structure::FullBlock;
  if (s == "sbc") return Structure::SparseBlock;
  if (s == "dbc") return Structure::DiagonalBlock;
  throw SpecError("unknown structure '" + s + "' (expected unrestricted|fbc|sbc|dbc)");
}

BlockSpec::BlockSpec(std::vector<Index> sizes, std::vector<Index> sectors, Structure s)
    : group_sizes(std::move(sizes)), sector_of_group(std::move(sectors)), structure(s) {
  validate();
}

Index BlockSpec::n() const {
  Index total = 0;
  for (Index s : group_sizes) total += s;
  return total;
}

Index BlockSpec::num_sectors() const {
  if (sector_of_group.empty()) return K() > 0 ? 1 : 0;
  return *std::max_element(sector_of_group.begin(), sector_of_group.end()) + 1;
}

std::vector<Index> BlockSpec::group_starts() const {
  std::vector<Index> starts(group_sizes.size());
  Index acc = 0;
  for (std::size_t k = 0; k < group_sizes.size(); ++k) {
    starts[k] = acc;
    acc += group_sizes[k];
  }
  return starts;
}

std::vector<Index> BlockSpec::group_of_asset() const {
  std::vector<Index> g;
  g.reserve(static_cast<std::size_t>(n()));
  for (Index k = 0; k < K(); ++k)
    for (Index i = 0; i < size(k); ++i) g.push_back(k);
  return g;
}

std::vector<Index> BlockSpec::groups_in_sector(Index s) const {
  std::vector<Index> out;
  for (Index k = 0; k < K(); ++k)
    if (sector(k) == s) out.push_back(k);
  return out;
}

BlockSpec BlockSpec::sector_spec(Index s) const {
  BlockSpec sub;
  for (Index k : groups_in_sector(s)) {
    sub.group_sizes.push_back(size(k));
    sub.sector_of_group.push_back(0);
  }
  sub.structure = structure == Structure::DiagonalBlock ? Structure::DiagonalBlock : Structure::FullBlock;
  return sub;
}

BlockSpec BlockSpec::group_spec(Index k) const {
  BlockSpec sub;
  sub.group_sizes = {size(k)};
  sub.sector_of_group = {0};
  sub.structure = Structure::FullBlock;
  return sub;
}

std::pair<Index, Index> BlockSpec::sector_range(Index s) const {
  const auto starts = group_starts();
  const auto gs = groups_in_sector(s);
  if (gs.empty()) return {0, 0};
  Index count = 0;
  for (Index k : gs) count += size(k);
  return {starts[static_cast<std::size_t>(gs.front())], count};
}

void BlockSpec::validate() const {
  if (group_sizes.empty()) throw SpecError("block spec has no groups");
  for (Index s : group_sizes)
    if (s < 1) throw SpecError("block spec has an empty group");
  if (!sector_of_group.empty()) {
    if (sector_of_group.size() != group_sizes.size())
      throw SpecError("sector_of_group must have one entry per group");
    if (sector_of_group.front() != 0) throw SpecError("sectors must be numbered from 0 in order");
    for (std::size_t k = 1; k < sector_of_group.size(); ++k) {
      const Index d = sector_of_group[k] - sector_of_group[k - 1];
      if (d != 0 && d != 1) throw SpecError("sectors must be contiguous runs of groups");
    }
  }
}

std::vector<std::pair<Index, Index>> eta_cells(const BlockSpec& spec) {
  std::vector<std::pair<Index, Index>> cells;
  const Index K = spec.K();
  auto keep_diag = [&](Index k) { return spec.size(k) > 1; };
  switch (spec.structure) {
    case Structure::Unrestricted:
      break;
    case Structure::FullBlock:
      for (Index l = 0; l < K; ++l)
        for (Index k = l; k < K; ++k)
          if (k != l || keep_diag(k)) cells.emplace_back(k, l);
      break;
    case Structure::SparseBlock:
      for (Index s = 0; s < spec.num_sectors(); ++s) {
        const auto gs = spec.groups_in_sector(s);
        for (std::size_t b = 0; b < gs.size(); ++b)
          for (std::size_t a = b; a < gs.size(); ++a)
            if (a != b || keep_diag(gs[a])) cells.emplace_back(gs[a], gs[b]);
      }
      break;
    case Structure::DiagonalBlock:
      for (Index k = 0; k < K; ++k)
        if (keep_diag(k)) cells.emplace_back(k, k);
      break;
  }
  return cells;
}

Index eta_size(const BlockSpec& spec) {
  if (spec.structure == Structure::Unrestricted) return vecl_size(spec.n());
  return static_cast<Index>(eta_cells(spec).size());
}

// ---------------------------------------------------------------------------

Matrix build_Q(const BlockSpec& spec) {
  spec.validate();
  const Index n = spec.n();
  const Index K = spec.K();
  Matrix q = Matrix::Zero(n, n);
  const auto starts = spec.group_starts();
  Index col = K;
  for (Index k = 0; k < K; ++k) {
    const Index s = starts[static_cast<std::size_t>(k)];
    const Index m = spec.size(k);
    q.block(s, k, m, 1).setConstant(1.0 / std::sqrt(static_cast<double>(m)));
    for (Index j = 1; j < m; ++j, ++col) {
      const double h = 1.0 / std::sqrt(static_cast<double>(j * (j + 1)));
      q.block(s, col, j, 1).setConstant(h);
      q(s + j, col) = -static_cast<double>(j) * h;
    }
  }
  return q;
}

Vector apply_Qt(const BlockSpec& spec, const Vector& x) {
  const Index K = spec.K();
  Vector y(x.size());
  const auto starts = spec.group_starts();
  Index col = K;
  for (Index k = 0; k < K; ++k) {
    const Index s = starts[static_cast<std::size_t>(k)];
    const Index m = spec.size(k);
    double prefix = 0.0;
    for (Index j = 0; j < m; ++j) {
      if (j > 0) {
        const double h = 1.0 / std::sqrt(static_cast<double>(j * (j + 1)));
        y(col++) = h * (prefix - static_cast<double>(j) * x(s + j));
      }
      prefix += x(s + j);
    }
    y(k) = prefix / std::sqrt(static_cast<double>(m));
  }
  return y;
}

Vector apply_Q(const BlockSpec& spec, const Vector& y) {
  const Index K = spec.K();
  Vector x(y.size());
  const auto starts = spec.group_starts();
  Index col = K;
  for (Index k = 0; k < K; ++k) {
    const Index s = starts[static_cast<std::size_t>(k)];
    const Index m = spec.size(k);
    const double base = y(k) / std::sqrt(static_cast<double>(m));
    // c_j = y_j / sqrt(j(j+1)) for the contrasts of this group
    Vector c = Vector::Zero(m);
    for (Index j = 1; j < m; ++j) c(j) = y(col + j - 1) / std::sqrt(static_cast<double>(j * (j + 1)));
    double suffix = 0.0;
    for (Index i = m - 1; i >= 0; --i) {
      x(s + i) = base + suffix - static_cast<double>(i) * c(i);
      suffix += c(i);
    }
    col += m - 1;
  }
  return x;
}

// ---------------------------------------------------------------------------

double CanonicalBlock::logdet() const {
  Eigen::LLT<Matrix> llt(A);
  if (llt.info() != Eigen::Success) throw DomainError("canonical block: A is not positive definite");
  double ld = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  for (Index k = 0; k < K(); ++k) {
    const Index m = sizes[static_cast<std::size_t>(k)];
    if (m > 1) {
      if (!(delta(k) > 0.0)) throw DomainError("canonical block: non-positive delta");
      ld += static_cast<double>(m - 1) * std::log(delta(k));
    }
  }
  return ld;
}

Matrix CanonicalBlock::dense(const BlockSpec& spec) const {
  Matrix cells(K(), K());
  for (Index k = 0; k < K(); ++k) {
    const double nk = static_cast<double>(sizes[static_cast<std::size_t>(k)]);
    for (Index l = 0; l < K(); ++l) {
      const double nl = static_cast<double>(sizes[static_cast<std::size_t>(l)]);
      cells(k, l) = k == l ? (nk > 1 ? (A(k, k) - 1.0) / (nk - 1.0) : 0.0) : A(k, l) / std::sqrt(nk * nl);
    }
  }
  return dense_of_cells(cells, spec);
}

Matrix block_cells(const Matrix& c, const BlockSpec& spec, double tol) {
  spec.validate();
  const Index n = spec.n();
  if (c.rows() != n || c.cols() != n) throw SpecError("block matrix dimension does not match block spec");
  const Index K = spec.K();
  const auto starts = spec.group_starts();
  Matrix cells = Matrix::Zero(K, K);
  for (Index k = 0; k < K; ++k)
    for (Index l = 0; l <= k; ++l) {
      const Index sk = starts[static_cast<std::size_t>(k)], nk = spec.size(k);
      const Index sl = starts[static_cast<std::size_t>(l)], nl = spec.size(l);
      double sum = 0.0, lo = kInf, hi = -kInf;
      Index cnt = 0;
      for (Index i = 0; i < nk; ++i)
        for (Index j = 0; j < nl; ++j) {
          if (k == l && i == j) continue;
          const double v = c(sk + i, sl + j);
          sum += v;
          lo = std::min(lo, v);
          hi = std::max(hi, v);
          ++cnt;
        }
      if (cnt == 0) continue;
      if (hi - lo > tol) {
        std::ostringstream os;
        os << "matrix is not block-constant in block (" << k << ", " << l << "): spread " << (hi - lo);
        throw StructureError(os.str());
      }
      cells(k, l) = cells(l, k) = sum / static_cast<double>(cnt);
    }
  return cells;
}

Matrix dense_of_cells(const Matrix& cells, const BlockSpec& spec) {
  const Index n = spec.n();
  const auto g = spec.group_of_asset();
  Matrix c(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      c(i, j) = i == j ? 1.0 : cells(g[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(j)]);
  return c;
}

CanonicalBlock canonical_of_cells(const Matrix& cells, const BlockSpec& spec) {
  const Index K = spec.K();
  CanonicalBlock cb;
  cb.sizes = spec.group_sizes;
  cb.A.resize(K, K);
  cb.delta = Vector::Ones(K);
  for (Index k = 0; k < K; ++k) {
    const double nk = static_cast<double>(spec.size(k));
    for (Index l = 0; l < K; ++l) {
      const double nl = static_cast<double>(spec.size(l));
      cb.A(k, l) = k == l ? 1.0 + (nk - 1.0) * cells(k, k) : cells(k, l) * std::sqrt(nk * nl);
    }
    if (spec.size(k) > 1) cb.delta(k) = 1.0 - cells(k, k);
  }
  return cb;
}

CanonicalBlock canonical_of_block(const Matrix& c, const BlockSpec& spec, double tol) {
  return canonical_of_cells(block_cells(c, spec, tol), spec);
}

BlockLog block_log(const CanonicalBlock& cb) {
  const Index K = cb.K();
  const SymEig e = sym_eig(cb.A);
  if (!(e.values.minCoeff() > 1e-12)) {
    std::ostringstream os;
    os << "block log: A is not positive definite (smallest eigenvalue " << e.values.minCoeff() << ")";
    throw DomainError(os.str());
  }
  const Matrix log_a = sym_apply(e, [](double x) { return std::log(x); });
  BlockLog bl;
  bl.cells = Matrix::Zero(K, K);
  bl.diag.resize(K);
  for (Index k = 0; k < K; ++k) {
    const double nk = static_cast<double>(cb.sizes[static_cast<std::size_t>(k)]);
    double log_delta = 0.0;
    if (nk > 1) {
      if (!(cb.delta(k) > 1e-12)) throw DomainError("block log: delta is not positive");
      log_delta = std::log(cb.delta(k));
    }
    for (Index l = 0; l < K; ++l) {
      const double nl = static_cast<double>(cb.sizes[static_cast<std::size_t>(l)]);
      if (k != l) bl.cells(k, l) = log_a(k, l) / std::sqrt(nk * nl);
    }
    bl.cells(k, k) = nk > 1 ? (log_a(k, k) - log_delta) / nk : 0.0;
    bl.diag(k) = log_a(k, k) / nk + log_delta * (1.0 - 1.0 / nk);
  }
  return bl;
}

Matrix dense_of_block_log(const BlockLog& bl, const BlockSpec& spec) {
  Matrix l = dense_of_cells(bl.cells, spec);
  const auto g = spec.group_of_asset();
  for (Index i = 0; i < l.rows(); ++i) l(i, i) = bl.diag(g[static_cast<std::size_t>(i)]);
  return l;
}

namespace {

void check_structural_zeros(const Matrix& cells, const BlockSpec& spec, double tol) {
  for (Index k = 0; k < spec.K(); ++k)
    for (Index l = 0; l < k; ++l) {
      const bool zero = spec.structure == Structure::DiagonalBlock ||
                        (spec.structure == Structure::SparseBlock && spec.sector(k) != spec.sector(l));
      if (zero && std::abs(cells(k, l)) > tol) {
        std::ostringstream os;
        os << "block (" << k << ", " << l << ") must be zero under structure " << to_string(spec.structure);
        throw StructureError(os.str());
      }
    }
}

}  // namespace

Vector eta_of_cells(const Matrix& cells, const BlockSpec& spec) {
  if (spec.structure == Structure::Unrestricted) return gamma_of_corr(dense_of_cells(cells, spec));
  check_structural_zeros(cells, spec, 1e-10);
  const auto layout = eta_cells(spec);
  Vector eta(static_cast<Index>(layout.size()));
  if (spec.structure == Structure::DiagonalBlock) {
    for (std::size_t j = 0; j < layout.size(); ++j) {
      const Index k = layout[j].first;
      const double r = cells(k, k);
      const Index m = spec.size(k);
      if (!(r < 1.0 && r > -1.0 / static_cast<double>(m - 1)))
        throw DomainError("eta_of_block: equicorrelation outside its admissible range");
      eta(static_cast<Index>(j)) = equicorr_eta(r, m);
    }
    return eta;
  }
  const BlockLog bl = block_log(canonical_of_cells(cells, spec));
  for (std::size_t j = 0; j < layout.size(); ++j)
    eta(static_cast<Index>(j)) = bl.cells(layout[j].first, layout[j].second);
  return eta;
}

Vector eta_of_block(const Matrix& c, const BlockSpec& spec) {
  if (spec.structure == Structure::Unrestricted) return gamma_of_corr(c);
  return eta_of_cells(block_cells(c, spec), spec);
}

double equicorr_eta(double rho, Index n) {
  const double m = static_cast<double>(n);
  return std::log1p(m * rho / (1.0 - rho)) / m;
}

double equicorr_rho(double eta, Index n) {
  const double m = static_cast<double>(n);
  if (m * eta > 700.0) throw DomainError("block_of_eta: exponential overflow");
  const double e = std::expm1(m * eta);
  return e / (e + m);
}

Matrix cells_of_eta(const Vector& eta, const BlockSpec& spec, const BlockOfEtaOptions& opt) {
  if (spec.structure == Structure::Unrestricted)
    throw SpecError("cells_of_eta: unrestricted structure has no cell representation");
  if (!eta.allFinite()) throw DomainError("block_of_eta: non-finite eta");
  const auto layout = eta_cells(spec);
  if (static_cast<Index>(layout.size()) != eta.size()) throw SpecError("block_of_eta: eta length does not match spec");
  const Index K = spec.K();
  Matrix e = Matrix::Zero(K, K);
  for (std::size_t j = 0; j < layout.size(); ++j) {
    e(layout[j].first, layout[j].second) = eta(static_cast<Index>(j));
    e(layout[j].second, layout[j].first) = eta(static_cast<Index>(j));
  }
  Matrix cells = Matrix::Zero(K, K);
  if (spec.structure == Structure::DiagonalBlock) {
    for (Index k = 0; k < K; ++k)
      if (spec.size(k) > 1) cells(k, k) = equicorr_rho(e(k, k), spec.size(k));
    return cells;
  }
  Vector nk(K);
  for (Index k = 0; k < K; ++k) nk(k) = static_cast<double>(spec.size(k));
  Vector d = Vector::Zero(K);
  Matrix log_a(K, K);
  double resid = kInf;
  for (int it = 0; it < opt.max_iter; ++it) {
    for (Index k = 0; k < K; ++k)
      for (Index l = 0; l < K; ++l)
        log_a(k, l) = k == l ? d(k) + (nk(k) - 1.0) * e(k, k) : std::sqrt(nk(k) * nk(l)) * e(k, l);
    const SymEig se = sym_eig(log_a);
    if (se.values.maxCoeff() > 700.0) throw DomainError("block_of_eta: matrix exponential overflow");
    const Matrix a = sym_apply(se, [](double x) { return std::exp(x); });
    Vector c(K);
    Vector delta(K);
    for (Index k = 0; k < K; ++k) {
      delta(k) = std::exp(d(k) - e(k, k));
      c(k) = a(k, k) / nk(k) + (nk(k) - 1.0) * delta(k) / nk(k);
    }
    resid = (c.array() - 1.0).abs().maxCoeff();
    if (resid < opt.tol) {
      for (Index k = 0; k < K; ++k)
        for (Index l = 0; l < K; ++l) {
          if (k == l)
            cells(k, k) = nk(k) > 1 ? (a(k, k) - delta(k)) / (nk(k) * c(k)) : 0.0;
          else
            cells(k, l) = a(k, l) / std::sqrt(nk(k) * nk(l) * c(k) * c(l));
        }
      return cells;
    }
    d.array() -= c.array().log();
  }
  throw ConvergenceError("block_of_eta: diagonal fixed point did not converge", resid);
}

Matrix block_of_eta(const Vector& eta, const BlockSpec& spec, const BlockOfEtaOptions& opt) {
  if (spec.structure == Structure::Unrestricted) return corr_of_gamma(eta, {opt.tol, opt.max_iter});
  return dense_of_cells(cells_of_eta(eta, spec, opt), spec);
}

Matrix eta_direction(const Vector& eta, const BlockSpec& spec) {
  if (spec.structure == Structure::Unrestricted) return unvecl(eta, spec.n(), 0.0);
  const auto layout = eta_cells(spec);
  Matrix e = Matrix::Zero(spec.K(), spec.K());
  for (std::size_t j = 0; j < layout.size(); ++j) {
    e(layout[j].first, layout[j].second) = eta(static_cast<Index>(j));
    e(layout[j].second, layout[j].first) = eta(static_cast<Index>(j));
  }
  Matrix out = dense_of_cells(e, spec);
  out.diagonal().setZero();
  return out;
}

// ---------------------------------------------------------------------------

Matrix BitMap::dense() const {
  Matrix b = Matrix::Zero(static_cast<Index>(eta_of_vecl.size()), p);
  for (std::size_t j = 0; j < eta_of_vecl.size(); ++j)
    if (eta_of_vecl[j] >= 0) b(static_cast<Index>(j), eta_of_vecl[j]) = 1.0;
  return b;
}

Vector BitMap::expand(const Vector& eta) const {
  Vector g = Vector::Zero(static_cast<Index>(eta_of_vecl.size()));
  for (std::size_t j = 0; j < eta_of_vecl.size(); ++j)
    if (eta_of_vecl[j] >= 0) g(static_cast<Index>(j)) = eta(eta_of_vecl[j]);
  return g;
}

BitMap bit_matrix(const BlockSpec& spec) {
  spec.validate();
  const Index n = spec.n();
  BitMap bm;
  bm.eta_of_vecl.assign(static_cast<std::size_t>(vecl_size(n)), -1);
  if (spec.structure == Structure::Unrestricted) {
    bm.p = vecl_size(n);
    for (Index j = 0; j < bm.p; ++j) bm.eta_of_vecl[static_cast<std::size_t>(j)] = j;
    return bm;
  }
  const auto layout = eta_cells(spec);
  bm.p = static_cast<Index>(layout.size());
  Matrix idx = Matrix::Constant(spec.K(), spec.K(), -1.0);
  for (std::size_t j = 0; j < layout.size(); ++j) {
    idx(layout[j].first, layout[j].second) = static_cast<double>(j);
    idx(layout[j].second, layout[j].first) = static_cast<double>(j);
  }
  const auto g = spec.group_of_asset();
  Index pos = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i, ++pos)
      bm.eta_of_vecl[static_cast<std::size_t>(pos)] =
          static_cast<Index>(idx(g[static_cast<std::size_t>(i)], g[static_cast<std::size_t>(j)]));
  return bm;
}

BlockQuadForms block_loglik_helpers(const CanonicalBlock& cb, const Vector& y) {
  const Index K = cb.K();
  BlockQuadForms out;
  const SymEig e = sym_eig(cb.A);
  if (!(e.values.minCoeff() > 1e-12)) throw DomainError("block likelihood: A is singular or indefinite");
  out.logdet = e.values.array().log().sum();
  const Vector y0 = y.head(K);
  const Vector z0 = e.vectors * (e.vectors.transpose() * y0).cwiseQuotient(e.values.cwiseSqrt());  // A^{-1/2} y0
  out.group_quad = z0.cwiseAbs2();
  out.quad = z0.squaredNorm();
  Index col = K;
  for (Index k = 0; k < K; ++k) {
    const Index m = cb.sizes[static_cast<std::size_t>(k)];
    if (m > 1) {
      if (!(cb.delta(k) > 0.0)) throw DomainError("block likelihood: non-positive delta");
      const double s = y.segment(col, m - 1).squaredNorm() / cb.delta(k);
      out.group_quad(k) += s;
      out.quad += s;
      out.logdet += static_cast<double>(m - 1) * std::log(cb.delta(k));
    }
    col += m - 1;
  }
  return out;
}

StaticBlockEstimate static_block_corr(const Matrix& residuals, const BlockSpec& spec, double truncate_below) {
  spec.validate();
  const Index n = spec.n();
  const Index T = residuals.rows();
  if (residuals.cols() != n) throw SpecError("static_block_corr: residual panel width does not match spec");
  if (T <= *std::max_element(spec.group_sizes.begin(), spec.group_sizes.end()))
    throw SpecError("static_block_corr: too few observations for the block sizes");
  const Vector mean = residuals.colwise().mean();
  const Matrix centered = residuals.rowwise() - mean.transpose();
  Matrix cov = centered.transpose() * centered / static_cast<double>(T - 1);
  const Vector sd = cov.diagonal().cwiseSqrt();
  const Matrix sample = sd.cwiseInverse().asDiagonal() * cov * sd.cwiseInverse().asDiagonal();

  const Index K = spec.K();
  const auto starts = spec.group_starts();
  Matrix cells = Matrix::Zero(K, K);
  for (Index k = 0; k < K; ++k)
    for (Index l = 0; l <= k; ++l) {
      if (spec.structure == Structure::DiagonalBlock && k != l) continue;
      if (spec.structure == Structure::SparseBlock && spec.sector(k) != spec.sector(l)) continue;
      double sum = 0.0;
      Index cnt = 0;
      for (Index i = 0; i < spec.size(k); ++i)
        for (Index j = 0; j < spec.size(l); ++j) {
          if (k == l && i == j) continue;
          sum += sample(starts[static_cast<std::size_t>(k)] + i, starts[static_cast<std::size_t>(l)] + j);
          ++cnt;
        }
      const double v = cnt ? sum / static_cast<double>(cnt) : 0.0;
      cells(k, l) = cells(l, k) = std::abs(v) < truncate_below ? 0.0 : v;
    }

  StaticBlockEstimate est;
  CanonicalBlock cb = canonical_of_cells(cells, spec);
  const double floor = 1e-6;
  SymEig e = sym_eig(cb.A);
  if (e.values.minCoeff() < floor) {
    e.values = e.values.cwiseMax(floor);
    cb.A = sym_apply(e, [](double x) { return x; });
    est.repaired = true;
  }
  for (Index k = 0; k < K; ++k)
    if (spec.size(k) > 1 && cb.delta(k) < floor) {
      cb.delta(k) = floor;
      est.repaired = true;
    }
  Matrix c = cb.dense(spec);
  if (est.repaired) {
    // rebuild with a unit diagonal: the diagonal is constant per group
    Vector dg(n);
    const auto g = spec.group_of_asset();
    for (Index i = 0; i < n; ++i) {
      const Index k = g[static_cast<std::size_t>(i)];
      const double nk = static_cast<double>(spec.size(k));
      dg(i) = cb.A(k, k) / nk + (nk - 1.0) * cb.delta(k) / nk;
    }
    Matrix full = build_Q(spec);
    Matrix dmat = Matrix::Zero(n, n);
    dmat.topLeftCorner(K, K) = cb.A;
    Index col = K;
    for (Index k = 0; k < K; ++k)
      for (Index j = 1; j < spec.size(k); ++j, ++col) dmat(col, col) = cb.delta(k);
    c = full * dmat * full.transpose();
    const Vector inv = dg.cwiseSqrt().cwiseInverse();
    c = inv.asDiagonal() * c * inv.asDiagonal();
    c = 0.5 * (c + c.transpose());
    c.diagonal().setOnes();
    cells = block_cells(c, spec, 1e-8);
  }
  est.corr = c;
  est.cells = cells;
  return est;
}

}  // namespace dfc
