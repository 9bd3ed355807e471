#pragma once

// Block correlation matrices: correlations are constant within cells defined
// by a partition of the assets into K groups, and groups are nested in
// sectors. The canonical form C = Q D Q' with D = diag(A, delta_1 I, ...,
// delta_K I) reduces determinants, inverses and the matrix logarithm to K x K
// problems.

#include "dfc/common.hpp"

#include <string>
#include <utility>
#include <vector>

namespace dfc {

enum class Structure { Unrestricted, FullBlock, SparseBlock, DiagonalBlock };

std::string to_string(Structure s);
Structure structure_from_string(const std::string& s);

struct BlockSpec {
  std::vector<Index> group_sizes;
  std::vector<Index> sector_of_group;  // empty means one sector
  Structure structure = Structure::FullBlock;

  BlockSpec() = default;
  BlockSpec(std::vector<Index> sizes, std::vector<Index> sectors, Structure s);

  Index n() const;
  Index K() const { return static_cast<Index>(group_sizes.size()); }
  Index num_sectors() const;
  Index sector(Index k) const { return sector_of_group.empty() ? 0 : sector_of_group[static_cast<std::size_t>(k)]; }
  Index size(Index k) const { return group_sizes[static_cast<std::size_t>(k)]; }
  std::vector<Index> group_starts() const;
  std::vector<Index> group_of_asset() const;
  // Groups belonging to sector s, in order.
  std::vector<Index> groups_in_sector(Index s) const;
  // Restriction to one sector (FullBlock on the sector's groups).
  BlockSpec sector_spec(Index s) const;
  // Restriction to one group.
  BlockSpec group_spec(Index k) const;
  // First asset and count of sector s.
  std::pair<Index, Index> sector_range(Index s) const;

  // Throws SpecError on empty/zero groups or non-contiguous sectors.
  void validate() const;
};

// Cells (k, l), k >= l, that carry a free log-domain parameter, in the order
// used for eta. FullBlock: column-major vech of the K x K cell matrix;
// SparseBlock: per-sector vechs concatenated; DiagonalBlock: (k, k).
// Within-group cells of singleton groups are dropped. Empty for Unrestricted.
std::vector<std::pair<Index, Index>> eta_cells(const BlockSpec& spec);
Index eta_size(const BlockSpec& spec);

// Orthonormal n x n matrix: normalized group indicators, then Helmert
// contrasts group by group.
Matrix build_Q(const BlockSpec& spec);
// Q' x and Q y without forming Q.
Vector apply_Qt(const BlockSpec& spec, const Vector& x);
Vector apply_Q(const BlockSpec& spec, const Vector& y);

struct CanonicalBlock {
  Matrix A;      // K x K
  Vector delta;  // K; 1 for singleton groups (unused)
  std::vector<Index> sizes;

  Index K() const { return A.rows(); }
  // log|C| = log|A| + sum (n_k - 1) log delta_k
  double logdet() const;
  Matrix dense(const BlockSpec& spec) const;
};

// Cell values: rho(k, l) the correlation between groups k and l, rho(k, k)
// the within-group correlation (0 for singletons).
Matrix block_cells(const Matrix& c, const BlockSpec& spec, double tol = 1e-10);
Matrix dense_of_cells(const Matrix& cells, const BlockSpec& spec);

CanonicalBlock canonical_of_cells(const Matrix& cells, const BlockSpec& spec);
CanonicalBlock canonical_of_block(const Matrix& c, const BlockSpec& spec, double tol = 1e-10);

// Matrix logarithm of a block correlation matrix from its canonical form.
struct BlockLog {
  Matrix cells;  // off-diagonal log values per cell (within-group cells on the diagonal)
  Vector diag;   // diagonal of log C per group
};
BlockLog block_log(const CanonicalBlock& cb);
Matrix dense_of_block_log(const BlockLog& bl, const BlockSpec& spec);

Vector eta_of_block(const Matrix& c, const BlockSpec& spec);
Vector eta_of_cells(const Matrix& cells, const BlockSpec& spec);

struct BlockOfEtaOptions {
  double tol = 1e-12;
  int max_iter = 500;
};
// Cell correlations for a given eta.
Matrix cells_of_eta(const Vector& eta, const BlockSpec& spec, const BlockOfEtaOptions& opt = {});
Matrix block_of_eta(const Vector& eta, const BlockSpec& spec, const BlockOfEtaOptions& opt = {});
// Zero-diagonal symmetric n x n log-domain matrix with the eta pattern.
Matrix eta_direction(const Vector& eta, const BlockSpec& spec);

// Equicorrelation closed forms.
double equicorr_eta(double rho, Index n);
double equicorr_rho(double eta, Index n);

// Selection from eta-space into vecl positions: eta_of_vecl[j] is the eta
// index feeding vecl position j, or -1 for structural zeros.
struct BitMap {
  std::vector<Index> eta_of_vecl;
  Index p = 0;
  Matrix dense() const;  // n(n-1)/2 x p
  Vector expand(const Vector& eta) const;
};
BitMap bit_matrix(const BlockSpec& spec);

struct BlockQuadForms {
  double logdet = 0.0;
  double quad = 0.0;   // Y0' A^{-1} Y0 + sum_k Y_k'Y_k / delta_k
  Vector group_quad;   // per group: ((A^{-1/2} Y0)_k)^2 + Y_k'Y_k / delta_k
};
// `y` is Q'(x - mu).
BlockQuadForms block_loglik_helpers(const CanonicalBlock& cb, const Vector& y);

// Method-of-moments block estimate: average the sample correlation within
// cells (cross-sector / cross-group cells zeroed per structure), then repair
// positive definiteness with an eigenvalue floor in the canonical form.
struct StaticBlockEstimate {
  Matrix corr;
  Matrix cells;
  bool repaired = false;
};
StaticBlockEstimate static_block_corr(const Matrix& residuals, const BlockSpec& spec,
                                      double truncate_below = 0.0);

}  // namespace dfc
