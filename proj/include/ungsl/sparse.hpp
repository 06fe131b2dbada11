#ifndef UNGSL_SPARSE_HPP
#define UNGSL_SPARSE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "ungsl/common.hpp"
#include "ungsl/dense.hpp"

namespace ungsl {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed row-major sparse matrix. Column indices are strictly
/// increasing within each row; structural zeros are never stored.
class SparseMatrix {
 public:
  SparseMatrix() : n_rows_(0), n_cols_(0), row_ptr_(1, 0) {}

  SparseMatrix(std::size_t n_rows, std::size_t n_cols)
      : n_rows_(n_rows), n_cols_(n_cols), row_ptr_(n_rows + 1, 0) {}

  /// Duplicate (row, col) entries are merged by summing weights; entries
  /// whose merged weight is exactly zero are dropped.
  static SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                    std::vector<Triplet> ts) {
    for (const Triplet& t : ts) {
      require(t.row < n_rows && t.col < n_cols, "from_triplets: index out of range");
      require(std::isfinite(t.value), "from_triplets: non-finite weight");
    }
    std::sort(ts.begin(), ts.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    SparseMatrix m(n_rows, n_cols);
    std::size_t i = 0;
    for (std::size_t r = 0; r < n_rows; ++r) {
      while (i < ts.size() && ts[i].row == r) {
        double w = ts[i].value;
        std::size_t c = ts[i].col;
        ++i;
        while (i < ts.size() && ts[i].row == r && ts[i].col == c) {
          w += ts[i].value;
          ++i;
        }
        if (w != 0.0) {
          m.col_.push_back(c);
          m.val_.push_back(w);
        }
      }
      m.row_ptr_[r + 1] = m.col_.size();
    }
    return m;
  }

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t nnz() const { return val_.size(); }

  std::size_t row_begin(std::size_t r) const { return row_ptr_[r]; }
  std::size_t row_end(std::size_t r) const { return row_ptr_[r + 1]; }
  std::size_t col(std::size_t k) const { return col_[k]; }
  double value(std::size_t k) const { return val_[k]; }
  double& value(std::size_t k) { return val_[k]; }

  /// Index of entry (r, c) in the value array, or npos when absent.
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t find(std::size_t r, std::size_t c) const {
    auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r]);
    auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[r + 1]);
    auto it = std::lower_bound(first, last, c);
    if (it == last || *it != c) return npos;
    return static_cast<std::size_t>(it - col_.begin());
  }

  double get(std::size_t r, std::size_t c) const {
    std::size_t k = find(r, c);
    return k == npos ? 0.0 : val_[k];
  }

  double row_sum(std::size_t r) const {
    double s = 0.0;
    for (std::size_t k = row_begin(r); k < row_end(r); ++k) s += val_[k];
    return s;
  }

  DenseMatrix to_dense() const {
    DenseMatrix d(n_rows_, n_cols_);
    for (std::size_t r = 0; r < n_rows_; ++r)
      for (std::size_t k = row_begin(r); k < row_end(r); ++k) d(r, col_[k]) = val_[k];
    return d;
  }

  std::vector<Triplet> to_triplets() const {
    std::vector<Triplet> ts;
    ts.reserve(nnz());
    for (std::size_t r = 0; r < n_rows_; ++r)
      for (std::size_t k = row_begin(r); k < row_end(r); ++k)
        ts.push_back({r, col_[k], val_[k]});
    return ts;
  }

  bool all_nonneg() const {
    for (double w : val_)
      if (w < 0.0) return false;
    return true;
  }

 private:
  std::size_t n_rows_, n_cols_;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::size_t> col_;
  std::vector<double> val_;
};

/// Sparse-dense product. Per-row summation runs in ascending column order,
/// which pins the floating-point result across runs.
inline DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& x) {
  require(a.n_cols() == x.rows(), "spmm: dimension mismatch");
  DenseMatrix y(a.n_rows(), x.cols());
  for (std::size_t r = 0; r < a.n_rows(); ++r)
    for (std::size_t k = a.row_begin(r); k < a.row_end(r); ++k) {
      const double w = a.value(k);
      const std::size_t c = a.col(k);
      for (std::size_t j = 0; j < x.cols(); ++j) y(r, j) += w * x(c, j);
    }
  return y;
}

/// y = aᵀ·x computed by scattering rows of a; iteration order is fixed so
/// the result is deterministic.
inline DenseMatrix spmm_transposed(const SparseMatrix& a, const DenseMatrix& x) {
  require(a.n_rows() == x.rows(), "spmm_transposed: dimension mismatch");
  DenseMatrix y(a.n_cols(), x.cols());
  for (std::size_t r = 0; r < a.n_rows(); ++r)
    for (std::size_t k = a.row_begin(r); k < a.row_end(r); ++k) {
      const double w = a.value(k);
      const std::size_t c = a.col(k);
      for (std::size_t j = 0; j < x.cols(); ++j) y(c, j) += w * x(r, j);
    }
  return y;
}

}  // namespace ungsl

#endif  // UNGSL_SPARSE_HPP
