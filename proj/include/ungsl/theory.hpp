#ifndef UNGSL_THEORY_HPP
#define UNGSL_THEORY_HPP

#include <fstream>
#include <limits>

#include "ungsl/gcn.hpp"
#include "ungsl/graph.hpp"
#include "ungsl/uncertainty.hpp"

namespace ungsl {

/// Convex-combination weights of the per-node entropy lower bound:
/// eta_j = Â_ij Σ_k(O'_jk + 1) / Σ_{j'} Â_ij' Σ_k(O'_j'k + 1), taken over
/// the stored entries of row i of the row-normalized adjacency (the
/// self-loop participates as neighbor j = i).
struct EtaCoefficients {
  std::vector<std::size_t> neighbor;  // column ids, ascending
  std::vector<double> eta;

  double sum() const {
    double s = 0.0;
    for (double e : eta) s += e;
    return s;
  }
};

inline EtaCoefficients compute_eta(const SparseMatrix& a_row_norm, std::size_t i,
                                   const DenseMatrix& o_prime) {
  EtaCoefficients r;
  double denom = 0.0;
  for (std::size_t k = a_row_norm.row_begin(i); k < a_row_norm.row_end(i); ++k) {
    const std::size_t j = a_row_norm.col(k);
    double mass = 0.0;
    for (std::size_t c = 0; c < o_prime.cols(); ++c) {
      require(std::fabs(o_prime(j, c)) < 1.0, "compute_eta: |logit| >= 1");
      mass += o_prime(j, c) + 1.0;
    }
    const double term = a_row_norm.value(k) * mass;
    r.neighbor.push_back(j);
    r.eta.push_back(term);
    denom += term;
  }
  require(denom > 0.0, "compute_eta: empty neighborhood");
  for (double& e : r.eta) e /= denom;
  return r;
}

/// Rescales logits into the open unit ball: o * 0.99 / (max|o| + 1e-6).
/// All-zero logits pass through (uniform probabilities downstream).
inline DenseMatrix rescale_logits(const DenseMatrix& o) {
  double mx = 0.0;
  for (double x : o.data()) mx = std::max(mx, std::fabs(x));
  DenseMatrix r = o;
  const double f = 0.99 / (mx + 1e-6);
  if (mx > 0.0)
    for (double& x : r.data()) x *= f;
  return r;
}

/// Per-node check of the aggregation entropy lower bound
/// u_i >= Σ_j eta_j u'_j under row normalization with self-loops.
struct Prop1Report {
  std::vector<double> u;      // entropy after aggregation
  std::vector<double> bound;  // Σ eta_j u'_j
  std::vector<double> slack;  // u - bound
  double min_slack = 0.0;

  void save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) fail("cannot write " + path);
    out.precision(17);
    out << "node,u_i,bound,slack\n";
    for (std::size_t i = 0; i < u.size(); ++i)
      out << i << ',' << u[i] << ',' << bound[i] << ',' << slack[i] << '\n';
  }
};

inline Prop1Report check_prop1(const Graph& graph, const DenseMatrix& w) {
  WeightedAdjacency a_norm = normalize(graph.adjacency, NormMode::kRow, true);
  DenseMatrix o_prime = rescale_logits(matmul(graph.features, w));
  DenseMatrix o_agg = spmm(a_norm.mat, o_prime);
  UncertaintyVector u_agg = entropy(linearized_probs(o_agg));
  UncertaintyVector u_init = entropy(linearized_probs(o_prime));

  Prop1Report rep;
  rep.u = u_agg.u;
  rep.bound.resize(graph.n);
  rep.slack.resize(graph.n);
  rep.min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < graph.n; ++i) {
    EtaCoefficients eta = compute_eta(a_norm.mat, i, o_prime);
    double b = 0.0;
    for (std::size_t t = 0; t < eta.eta.size(); ++t)
      b += eta.eta[t] * u_init.u[eta.neighbor[t]];
    rep.bound[i] = b;
    rep.slack[i] = rep.u[i] - b;
    rep.min_slack = std::min(rep.min_slack, rep.slack[i]);
  }
  return rep;
}

struct LogSumResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Σ a_i ln(a_i/b_i) >= (Σa) ln(Σa/Σb) with the 0·ln(0/b) = 0 convention.
inline LogSumResult log_sum_oracle(const std::vector<double>& a,
                                   const std::vector<double>& b) {
  require(a.size() == b.size() && !a.empty(), "log_sum_oracle: length mismatch");
  double sa = 0.0, sb = 0.0, lhs = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    require(a[i] >= 0.0 && std::isfinite(a[i]), "log_sum_oracle: negative entry in a");
    require(b[i] > 0.0 && std::isfinite(b[i]), "log_sum_oracle: non-positive entry in b");
    if (a[i] > 0.0) lhs += a[i] * std::log(a[i] / b[i]);
    sa += a[i];
    sb += b[i];
  }
  LogSumResult r;
  r.lhs = lhs;
  r.rhs = sa > 0.0 ? sa * std::log(sa / sb) : 0.0;
  r.holds = r.lhs >= r.rhs - 1e-12 * std::max(1.0, std::fabs(r.rhs));
  return r;
}

/// Scatter data of the entropy-correlation experiment: (u_i, Â-weighted
/// neighbor entropy) pairs plus Pearson r, degenerate-flagged when either
/// coordinate has zero variance.
struct CorrelationReport {
  std::vector<double> u;             // entropy after aggregation
  std::vector<double> neighbor_avg;  // Σ_j Â_ij u'_j
  double pearson_r = 0.0;
  bool degenerate = false;

  void save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) fail("cannot write " + path);
    out.precision(17);
    out << "node,u_i,neighbor_avg_entropy\n";
    for (std::size_t i = 0; i < u.size(); ++i)
      out << i << ',' << u[i] << ',' << neighbor_avg[i] << '\n';
  }
};

inline double pearson(const std::vector<double>& x, const std::vector<double>& y,
                      bool* degenerate) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    if (degenerate) *degenerate = true;
    return 0.0;
  }
  if (degenerate) *degenerate = false;
  return sxy / std::sqrt(sxx * syy);
}

/// Correlation between post-aggregation entropy and the Â-weighted
/// entropy of the neighbors' initial features, for a linear classifier W
/// (the 1-layer GCN + linear classifier setup).
inline CorrelationReport entropy_correlation(const Graph& graph,
                                             const DenseMatrix& w) {
  require(graph.n >= 3, "entropy_correlation: need at least 3 nodes");
  WeightedAdjacency a_norm = normalize(graph.adjacency, NormMode::kRow, true);
  DenseMatrix o_prime = rescale_logits(matmul(graph.features, w));
  UncertaintyVector u_agg = entropy(linearized_probs(spmm(a_norm.mat, o_prime)));
  UncertaintyVector u_init = entropy(linearized_probs(o_prime));

  CorrelationReport rep;
  rep.u = u_agg.u;
  rep.neighbor_avg.resize(graph.n, 0.0);
  for (std::size_t i = 0; i < graph.n; ++i)
    for (std::size_t k = a_norm.mat.row_begin(i); k < a_norm.mat.row_end(i); ++k)
      rep.neighbor_avg[i] += a_norm.mat.value(k) * u_init.u[a_norm.mat.col(k)];
  rep.pearson_r = pearson(rep.u, rep.neighbor_avg, &rep.degenerate);
  return rep;
}

/// Trains the linear classifier of the 1-layer setup (logits = Â X W) by
/// cross-entropy on the train mask. Deterministic per seed.
inline DenseMatrix train_linear_classifier(const Graph& graph, std::size_t epochs,
                                           double lr, std::uint64_t seed) {
  WeightedAdjacency a_norm = normalize(graph.adjacency, NormMode::kRow, true);
  DenseMatrix ax = spmm(a_norm.mat, graph.features);
  std::mt19937_64 rng = make_rng(seed, "linear-init");
  ParamTensor w(graph.feature_dim(), graph.num_classes, "linear.w");
  w.value = glorot_init(graph.feature_dim(), graph.num_classes, rng);
  AdamState adam;
  adam.lr = lr;
  std::vector<ParamTensor*> params = {&w};
  for (std::size_t e = 0; e < epochs; ++e) {
    DenseMatrix logits = matmul(ax, w.value);
    CrossEntropyResult ce = cross_entropy(logits, graph.labels, graph.masks.train);
    if (!std::isfinite(ce.loss)) fail("train_linear_classifier: divergence");
    w.zero_grad();
    axpy(1.0, matmul_at_b(ax, ce.dlogits), w.grad);
    adam_step(params, adam);
  }
  return w.value;
}

}  // namespace ungsl

#endif  // UNGSL_THEORY_HPP
