#ifndef UNGSL_GCN_HPP
#define UNGSL_GCN_HPP

#include <random>

#include "ungsl/adjacency.hpp"
#include "ungsl/graph.hpp"
#include "ungsl/optim.hpp"

namespace ungsl {

inline DenseMatrix glorot_init(std::size_t rows, std::size_t cols,
                               std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseMatrix w(rows, cols);
  for (double& x : w.data()) x = dist(rng);
  return w;
}

/// Two-layer GCN: logits = Â·relu(Â·X·W1)·W2, dropout after the first
/// layer in training mode only.
struct GcnModel {
  ParamTensor w1;  // d × h
  ParamTensor w2;  // h × K
  double dropout = 0.5;

  static GcnModel init(std::size_t d, std::size_t h, std::size_t k,
                       double dropout, std::mt19937_64& rng) {
    GcnModel m;
    m.w1 = ParamTensor(d, h, "gcn.w1");
    m.w2 = ParamTensor(h, k, "gcn.w2");
    m.w1.value = glorot_init(d, h, rng);
    m.w2.value = glorot_init(h, k, rng);
    m.dropout = dropout;
    return m;
  }

  std::vector<ParamTensor*> params() { return {&w1, &w2}; }
};

struct GcnCache {
  const SparseMatrix* adj = nullptr;
  const DenseMatrix* x = nullptr;
  DenseMatrix h0;        // Â X
  DenseMatrix z1pre;     // h0 W1
  DenseMatrix z1d;       // dropout(relu(z1pre))
  DenseMatrix drop_mask; // per-entry keep scale; empty when dropout inactive
  DenseMatrix h1;        // Â z1d
};

inline DenseMatrix gcn_forward(GcnModel& model, const WeightedAdjacency& adj_norm,
                               const DenseMatrix& x, bool training,
                               std::mt19937_64* dropout_rng, GcnCache* cache) {
  require(x.cols() == model.w1.value.rows(), "gcn_forward: feature dim mismatch");
  require(adj_norm.n() == x.rows(), "gcn_forward: adjacency size mismatch");
  GcnCache local;
  GcnCache& c = cache ? *cache : local;
  c.adj = &adj_norm.mat;
  c.x = &x;
  c.h0 = spmm(adj_norm.mat, x);
  c.z1pre = matmul(c.h0, model.w1.value);
  DenseMatrix z1 = relu(c.z1pre);
  if (training && model.dropout > 0.0) {
    require(dropout_rng != nullptr, "gcn_forward: dropout needs an rng");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    c.drop_mask = DenseMatrix(z1.rows(), z1.cols());
    const double keep = 1.0 - model.dropout;
    for (std::size_t i = 0; i < z1.size(); ++i)
      c.drop_mask.data()[i] = u(*dropout_rng) < keep ? 1.0 / keep : 0.0;
    c.z1d = z1;
    for (std::size_t i = 0; i < z1.size(); ++i)
      c.z1d.data()[i] *= c.drop_mask.data()[i];
  } else {
    c.drop_mask = DenseMatrix();
    c.z1d = std::move(z1);
  }
  c.h1 = spmm(adj_norm.mat, c.z1d);
  return matmul(c.h1, model.w2.value);
}

/// Backward pass of gcn_forward. Accumulates into w1.grad / w2.grad.
/// When adj_grad is non-null it receives dLoss/d(adjacency weight) for
/// every stored entry, aligned with the sparse value index.
inline void gcn_backward(GcnModel& model, const GcnCache& cache,
                         const DenseMatrix& dlogits,
                         std::vector<double>* adj_grad) {
  require(cache.adj != nullptr && cache.x != nullptr, "gcn_backward: stale cache");
  const SparseMatrix& a = *cache.adj;

  axpy(1.0, matmul_at_b(cache.h1, dlogits), model.w2.grad);
  DenseMatrix dh1 = matmul_a_bt(dlogits, model.w2.value);

  if (adj_grad) adj_grad->assign(a.nnz(), 0.0);
  if (adj_grad) {
    for (std::size_t i = 0; i < a.n_rows(); ++i)
      for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k) {
        const std::size_t j = a.col(k);
        double g = 0.0;
        for (std::size_t cidx = 0; cidx < dh1.cols(); ++cidx)
          g += dh1(i, cidx) * cache.z1d(j, cidx);
        (*adj_grad)[k] += g;
      }
  }

  DenseMatrix dz1pre = spmm_transposed(a, dh1);
  if (cache.drop_mask.size() > 0)
    for (std::size_t i = 0; i < dz1pre.size(); ++i)
      dz1pre.data()[i] *= cache.drop_mask.data()[i];
  for (std::size_t i = 0; i < dz1pre.size(); ++i)
    if (cache.z1pre.data()[i] <= 0.0) dz1pre.data()[i] = 0.0;

  axpy(1.0, matmul_at_b(cache.h0, dz1pre), model.w1.grad);
  DenseMatrix dh0 = matmul_a_bt(dz1pre, model.w1.value);

  if (adj_grad) {
    const DenseMatrix& x = *cache.x;
    for (std::size_t i = 0; i < a.n_rows(); ++i)
      for (std::size_t k = a.row_begin(i); k < a.row_end(i); ++k) {
        const std::size_t j = a.col(k);
        double g = 0.0;
        for (std::size_t cidx = 0; cidx < dh0.cols(); ++cidx)
          g += dh0(i, cidx) * x(j, cidx);
        (*adj_grad)[k] += g;
      }
  }
}

/// Mean negative log softmax-probability of the true class over masked
/// nodes, with its gradient on the logits.
struct CrossEntropyResult {
  double loss = 0.0;
  DenseMatrix dlogits;
};

inline CrossEntropyResult cross_entropy(const DenseMatrix& logits,
                                        const std::vector<int>& labels,
                                        const std::vector<bool>& mask) {
  const std::size_t n = logits.rows();
  const std::size_t k = logits.cols();
  require(labels.size() == n && mask.size() == n, "cross_entropy: length mismatch");
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (mask[i]) ++count;
  require(count > 0, "cross_entropy: empty mask");

  CrossEntropyResult r;
  r.dlogits = DenseMatrix(n, k);
  DenseMatrix p = softmax_rows(logits);
  for (std::size_t i = 0; i < n; ++i) {
    if (!mask[i]) continue;
    const int y = labels[i];
    require(y >= 0 && static_cast<std::size_t>(y) < k,
            "cross_entropy: label out of range at node " + std::to_string(i));
    // log p directly from stabilized logits to keep -log exact for
    // confident predictions
    double mx = logits(i, 0);
    for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, logits(i, c));
    double z = 0.0;
    for (std::size_t c = 0; c < k; ++c) z += std::exp(logits(i, c) - mx);
    r.loss += -(logits(i, static_cast<std::size_t>(y)) - mx - std::log(z));
    for (std::size_t c = 0; c < k; ++c)
      r.dlogits(i, c) = (p(i, c) - (static_cast<int>(c) == y ? 1.0 : 0.0)) /
                        static_cast<double>(count);
  }
  r.loss /= static_cast<double>(count);
  return r;
}

inline double accuracy(const DenseMatrix& logits, const std::vector<int>& labels,
                       const std::vector<bool>& mask) {
  std::size_t correct = 0, total = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (!mask[i] || labels[i] == kUnlabeled) continue;
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.cols(); ++c)
      if (logits(i, c) > logits(i, best)) best = c;
    if (static_cast<int>(best) == labels[i]) ++correct;
    ++total;
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

/// SGC: logits = Â^k X W, computed by k successive sparse products.
struct SgcModel {
  std::size_t depth = 2;
  ParamTensor w;  // d × K

  static SgcModel init(std::size_t d, std::size_t k_classes, std::size_t depth,
                       std::mt19937_64& rng) {
    require(depth >= 1, "SgcModel: depth must be >= 1");
    SgcModel m;
    m.depth = depth;
    m.w = ParamTensor(d, k_classes, "sgc.w");
    m.w.value = glorot_init(d, k_classes, rng);
    return m;
  }
};

inline DenseMatrix sgc_propagate(const SgcModel& model,
                                 const WeightedAdjacency& adj_norm,
                                 const DenseMatrix& x) {
  DenseMatrix p = x;
  for (std::size_t i = 0; i < model.depth; ++i) p = spmm(adj_norm.mat, p);
  return p;
}

inline DenseMatrix sgc_forward(const SgcModel& model,
                               const WeightedAdjacency& adj_norm,
                               const DenseMatrix& x) {
  return matmul(sgc_propagate(model, adj_norm, x), model.w.value);
}

}  // namespace ungsl

#endif  // UNGSL_GCN_HPP
