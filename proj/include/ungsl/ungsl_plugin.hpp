#ifndef UNGSL_UNGSL_PLUGIN_HPP
#define UNGSL_UNGSL_PLUGIN_HPP

#include "ungsl/adjacency.hpp"
#include "ungsl/optim.hpp"
#include "ungsl/uncertainty.hpp"

namespace ungsl {

/// Hyperparameters of the confidence-thresholded reweighting.
struct UnGslConfig {
  double tau = 2.0;    // amplification on the high-confidence branch
  double beta = 0.1;   // constant multiplier on the low-confidence branch
  double eps_lr = 0.01;  // learning rate for the per-node thresholds

  void validate() const {
    require(tau > 0.0, "UnGslConfig: tau must be > 0");
    require(beta >= 0.0, "UnGslConfig: beta must be >= 0");
    require(eps_lr > 0.0, "UnGslConfig: eps_lr must be > 0");
  }
};

/// Learnable per-node threshold separating low-confidence in-neighbors
/// from high-confidence ones. Unconstrained during optimization;
/// initialization is uniform in [0, 1].
struct ThresholdVector {
  ParamTensor eps;  // n × 1

  static ThresholdVector init_uniform(std::size_t n, std::mt19937_64& rng) {
    ThresholdVector t;
    t.eps = ParamTensor(n, 1, "ungsl.epsilon");
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double& x : t.eps.value.data()) x = u(rng);
    return t;
  }

  static ThresholdVector fixed(std::vector<double> values) {
    ThresholdVector t;
    t.eps = ParamTensor(values.size(), 1, "ungsl.epsilon.fixed");
    for (std::size_t i = 0; i < values.size(); ++i) t.eps.value(i, 0) = values[i];
    return t;
  }

  std::size_t size() const { return eps.value.rows(); }
};

/// Branching activation applied to (confidence - threshold):
/// x >= 0 -> tau * sigmoid(x), x < 0 -> beta. Returns the value and the
/// derivative (zero on the constant branch; the smooth branch owns x = 0).
struct PsiValue {
  double value;
  double deriv;
};

inline PsiValue psi(double x, const UnGslConfig& cfg) {
  if (x >= 0.0) {
    const double s = sigmoid(x);
    return {cfg.tau * s, cfg.tau * s * (1.0 - s)};
  }
  return {cfg.beta, 0.0};
}

/// Result of one reweighting pass. Keeps per-entry provenance so the
/// backward pass can route gradients to the thresholds and the base
/// structure. Entries whose reweighted value is exactly zero (beta = 0)
/// are dropped, so support(s_hat) is always a subset of support(S).
struct RefinedAdjacency {
  WeightedAdjacency s_hat;
  std::size_t base_nnz = 0;    // entry count of the base S
  std::size_t psi_evals = 0;   // == off-diagonal entries of S
  // aligned with s_hat entries:
  std::vector<std::size_t> src_index;  // entry index into the base S
  std::vector<double> base_value;      // S_ij
  std::vector<double> mult;            // psi(c_j - eps_i); 1 for self-loops
  std::vector<double> mult_deriv;      // dpsi/dx; 0 for self-loops
};

/// S_hat_ij = S_ij * psi(c_j - eps_i) for every stored off-diagonal entry;
/// self-loops pass through unscaled. Single pass over stored entries.
inline RefinedAdjacency reweight(const WeightedAdjacency& s,
                                 const UncertaintyVector& u,
                                 const ThresholdVector& eps,
                                 const UnGslConfig& cfg) {
  const std::size_t n = s.n();
  require(s.mat.n_rows() == s.mat.n_cols(), "reweight: S not square");
  require(u.size() == n && eps.size() == n, "reweight: size mismatch");
  cfg.validate();

  RefinedAdjacency r;
  r.base_nnz = s.mat.nnz();
  std::vector<Triplet> ts;
  ts.reserve(s.mat.nnz());
  for (std::size_t i = 0; i < n; ++i) {
    const double eps_i = eps.eps.value(i, 0);
    for (std::size_t k = s.mat.row_begin(i); k < s.mat.row_end(i); ++k) {
      const std::size_t j = s.mat.col(k);
      double m = 1.0, dm = 0.0;
      if (i != j) {
        const PsiValue pv = psi(u.c[j] - eps_i, cfg);
        m = pv.value;
        dm = pv.deriv;
        ++r.psi_evals;
      }
      const double w = s.mat.value(k) * m;
      if (w == 0.0) continue;
      ts.push_back({i, j, w});
      r.src_index.push_back(k);
      r.base_value.push_back(s.mat.value(k));
      r.mult.push_back(m);
      r.mult_deriv.push_back(dm);
    }
  }
  r.s_hat.mat = SparseMatrix::from_triplets(n, n, std::move(ts));
  r.s_hat.symmetric_hint = false;
  return r;
}

struct ReweightGrads {
  std::vector<double> d_eps;   // length n
  std::vector<double> d_base;  // aligned with the base S entries
};

/// Backward pass of reweight. d_shat is aligned with s_hat entries.
/// dL/deps_i sums -tau*s'(c_j - eps_i) * S_ij * dL/dS_hat_ij over smooth-
/// branch edges of row i; beta-branch edges contribute nothing.
inline ReweightGrads reweight_backward(const RefinedAdjacency& refined,
                                       const std::vector<double>& d_shat) {
  require(d_shat.size() == refined.s_hat.mat.nnz(),
          "reweight_backward: provenance mismatch");
  ReweightGrads g;
  g.d_eps.assign(refined.s_hat.n(), 0.0);
  g.d_base.assign(refined.base_nnz, 0.0);
  const SparseMatrix& m = refined.s_hat.mat;
  for (std::size_t i = 0; i < m.n_rows(); ++i)
    for (std::size_t k = m.row_begin(i); k < m.row_end(i); ++k) {
      g.d_base[refined.src_index[k]] += d_shat[k] * refined.mult[k];
      g.d_eps[i] += d_shat[k] * refined.base_value[k] * (-refined.mult_deriv[k]);
    }
  return g;
}

}  // namespace ungsl

#endif  // UNGSL_UNGSL_PLUGIN_HPP
