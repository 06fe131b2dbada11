#ifndef UNGSL_ADJACENCY_HPP
#define UNGSL_ADJACENCY_HPP

#include <cmath>

#include "ungsl/sparse.hpp"

namespace ungsl {

/// Square nonnegative sparse matrix. Entry (i, j) is the weight of the
/// directed edge feeding node i's aggregation from node j.
struct WeightedAdjacency {
  SparseMatrix mat;
  bool nonneg = true;
  bool symmetric_hint = false;

  std::size_t n() const { return mat.n_rows(); }

  void validate() const {
    require(mat.n_rows() == mat.n_cols(), "WeightedAdjacency: not square");
    if (nonneg) require(mat.all_nonneg(), "WeightedAdjacency: negative weight");
    if (symmetric_hint) {
      for (std::size_t i = 0; i < mat.n_rows(); ++i)
        for (std::size_t k = mat.row_begin(i); k < mat.row_end(i); ++k) {
          std::size_t j = mat.col(k);
          std::size_t kk = mat.find(j, i);
          require(kk != SparseMatrix::npos &&
                      std::fabs(mat.value(kk) - mat.value(k)) <= 1e-12,
                  "WeightedAdjacency: symmetric_hint violated");
        }
    }
  }
};

inline WeightedAdjacency adjacency_from_triplets(std::size_t n,
                                                 std::vector<Triplet> ts,
                                                 bool symmetric_hint = false) {
  WeightedAdjacency a;
  a.mat = SparseMatrix::from_triplets(n, n, std::move(ts));
  a.symmetric_hint = symmetric_hint;
  a.validate();
  return a;
}

enum class NormMode { kSymmetric, kRow };

/// Degree-normalized adjacency. With self-loops the degree is
/// D_ii = 1 + Σ_j A_ij; a zero-degree row without self-loops is rejected.
inline WeightedAdjacency normalize(const WeightedAdjacency& adj, NormMode mode,
                                   bool add_self_loops) {
  require(adj.mat.n_rows() == adj.mat.n_cols(), "normalize: not square");
  require(adj.mat.all_nonneg(), "normalize: negative weight");
  const std::size_t n = adj.n();

  std::vector<Triplet> ts = adj.mat.to_triplets();
  if (add_self_loops)
    for (std::size_t i = 0; i < n; ++i) ts.push_back({i, i, 1.0});
  SparseMatrix t = SparseMatrix::from_triplets(n, n, std::move(ts));

  std::vector<double> deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    deg[i] = t.row_sum(i);
    if (deg[i] <= 0.0) fail("normalize: zero-degree row " + std::to_string(i));
    // Rows already normalized up to rounding pass through unchanged,
    // making row normalization exactly idempotent.
    if (mode == NormMode::kRow && std::fabs(deg[i] - 1.0) <= 1e-12) deg[i] = 1.0;
  }

  std::vector<Triplet> out;
  out.reserve(t.nnz());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = t.row_begin(i); k < t.row_end(i); ++k) {
      const std::size_t j = t.col(k);
      const double w = mode == NormMode::kRow
                           ? t.value(k) / deg[i]
                           : t.value(k) / std::sqrt(deg[i] * deg[j]);
      out.push_back({i, j, w});
    }
  WeightedAdjacency r;
  r.mat = SparseMatrix::from_triplets(n, n, std::move(out));
  r.symmetric_hint = mode == NormMode::kSymmetric && adj.symmetric_hint;
  return r;
}

/// (M + Mᵀ)/2 over the union of supports.
inline WeightedAdjacency symmetrize(const WeightedAdjacency& adj) {
  require(adj.mat.n_rows() == adj.mat.n_cols(), "symmetrize: not square");
  std::vector<Triplet> ts;
  ts.reserve(2 * adj.mat.nnz());
  for (const Triplet& t : adj.mat.to_triplets()) {
    ts.push_back({t.row, t.col, 0.5 * t.value});
    ts.push_back({t.col, t.row, 0.5 * t.value});
  }
  WeightedAdjacency r;
  r.mat = SparseMatrix::from_triplets(adj.n(), adj.n(), std::move(ts));
  r.nonneg = adj.nonneg;
  r.symmetric_hint = true;
  return r;
}

}  // namespace ungsl

#endif  // UNGSL_ADJACENCY_HPP
