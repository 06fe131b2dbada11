#ifndef UNGSL_DENSE_HPP
#define UNGSL_DENSE_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "ungsl/common.hpp"

namespace ungsl {

/// Row-major dense matrix of 64-bit reals. A vector is a 1-column (or
/// 1-row) matrix.
class DenseMatrix {
 public:
  DenseMatrix() : rows_(0), cols_(0) {}
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return v_.size(); }

  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }

  void fill(double x) { std::fill(v_.begin(), v_.end(), x); }

  bool same_shape(const DenseMatrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  bool all_finite() const {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

 private:
  std::size_t rows_, cols_;
  std::vector<double> v_;
};

inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), "matmul: inner dimensions differ");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

inline DenseMatrix transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

/// c = aᵀ·b without materializing the transpose.
inline DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows(), "matmul_at_b: row counts differ");
  DenseMatrix c(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k)
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aki * b(k, j);
    }
  return c;
}

/// c = a·bᵀ.
inline DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.cols(), "matmul_a_bt: column counts differ");
  DenseMatrix c(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(j, k);
      c(i, j) = s;
    }
  return c;
}

inline void axpy(double alpha, const DenseMatrix& x, DenseMatrix& y) {
  require(x.same_shape(y), "axpy: shape mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y.data()[i] += alpha * x.data()[i];
}

/// Numerically stable logistic function; exact saturation for |x| beyond
/// double range.
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double sigmoid_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 - s);
}

/// Row-wise softmax with max-subtraction.
inline DenseMatrix softmax_rows(const DenseMatrix& logits) {
  DenseMatrix p(logits.rows(), logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    double mx = logits(i, 0);
    for (std::size_t k = 1; k < logits.cols(); ++k) mx = std::max(mx, logits(i, k));
    double z = 0.0;
    for (std::size_t k = 0; k < logits.cols(); ++k) {
      p(i, k) = std::exp(logits(i, k) - mx);
      z += p(i, k);
    }
    for (std::size_t k = 0; k < logits.cols(); ++k) p(i, k) /= z;
  }
  return p;
}

inline DenseMatrix relu(const DenseMatrix& a) {
  DenseMatrix r(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i)
    r.data()[i] = a.data()[i] > 0.0 ? a.data()[i] : 0.0;
  return r;
}

}  // namespace ungsl

#endif  // UNGSL_DENSE_HPP
