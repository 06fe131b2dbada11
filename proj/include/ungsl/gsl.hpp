#ifndef UNGSL_GSL_HPP
#define UNGSL_GSL_HPP

#include <algorithm>
#include <optional>

#include "ungsl/graph.hpp"
#include "ungsl/train.hpp"
#include "ungsl/ungsl_plugin.hpp"

namespace ungsl {

enum class GslMethod { kSimilarityResidual, kMetricKnn };
enum class Similarity { kInnerProduct, kCosine };

struct GslConfig {
  GslMethod method = GslMethod::kMetricKnn;
  std::size_t k = 8;          // neighbors kept per node
  double alpha = 0.5;         // mixing weight with the original adjacency
  double lambda = 0.0;        // regularizer trade-off
  bool reg_l1 = false;
  bool reg_smooth = false;
  std::size_t encoder_width = 16;
  std::optional<Similarity> similarity;  // defaults per method

  Similarity resolved_similarity() const {
    if (similarity) return *similarity;
    return method == GslMethod::kMetricKnn ? Similarity::kCosine
                                           : Similarity::kInnerProduct;
  }

  void validate() const {
    require(k >= 1, "GslConfig: k must be >= 1");
    require(alpha >= 0.0 && lambda >= 0.0, "GslConfig: alpha, lambda must be >= 0");
    require(encoder_width >= 1, "GslConfig: encoder width must be >= 1");
  }
};

struct RegularizerResult {
  double penalty = 0.0;
  std::vector<double> grad;  // aligned with stored S entries
};

/// L1 sparsity Σ|S_ij| and feature smoothness ½ Σ S_ij ||x_i - x_j||²,
/// with exact gradients on the stored entries.
inline RegularizerResult regularize(const WeightedAdjacency& s, const DenseMatrix& x,
                                    bool l1, bool smooth) {
  require(s.mat.n_rows() == s.mat.n_cols(), "regularize: S not square");
  RegularizerResult r;
  r.grad.assign(s.mat.nnz(), 0.0);
  for (std::size_t i = 0; i < s.n(); ++i)
    for (std::size_t k = s.mat.row_begin(i); k < s.mat.row_end(i); ++k) {
      const std::size_t j = s.mat.col(k);
      const double w = s.mat.value(k);
      if (l1) {
        r.penalty += std::fabs(w);
        r.grad[k] += w > 0.0 ? 1.0 : (w < 0.0 ? -1.0 : 0.0);
      }
      if (smooth) {
        double d2 = 0.0;
        for (std::size_t c = 0; c < x.cols(); ++c) {
          const double d = x(i, c) - x(j, c);
          d2 += d * d;
        }
        r.penalty += 0.5 * w * d2;
        r.grad[k] += 0.5 * d2;
      }
    }
  return r;
}

/// An embedding-based structure learner: one-layer auxiliary encoder,
/// pairwise similarity scores, per-row top-k sparsification, combination
/// with the original normalized adjacency, optional uncertainty-aware
/// reweighting, then row normalization for the downstream GCN.
class StructureLearner {
 public:
  StructureLearner(GslConfig cfg, const Graph& graph) : cfg_(cfg) {
    cfg_.validate();
    require(cfg_.k < graph.n, "StructureLearner: k must be < n");
    a_norm_ = normalize(graph.adjacency, NormMode::kRow, true);
  }

  const GslConfig& config() const { return cfg_; }
  bool trained() const { return trained_; }
  bool ungsl_attached() const { return ungsl_attached_; }
  GcnModel& downstream() { return downstream_; }
  const WeightedAdjacency& original_normalized() const { return a_norm_; }
  const std::vector<double>& learned_thresholds_flat() const {
    return thresholds_.eps.value.data();
  }

  /// Plugs in the reweighting stage. The uncertainty vector stays frozen.
  /// With learn_eps=false the provided thresholds are held fixed
  /// (the fixed-threshold ablation).
  void attach(const UncertaintyVector& u, const UnGslConfig& ucfg,
              ThresholdVector thresholds, bool learn_eps = true) {
    require(!ungsl_attached_, "StructureLearner: UnGSL already attached");
    ucfg.validate();
    uncert_ = u;
    ungsl_cfg_ = ucfg;
    thresholds_ = std::move(thresholds);
    learn_eps_ = learn_eps;
    ungsl_attached_ = true;
  }

  /// Symmetrizes the refined structure every epoch before normalization
  /// (the symmetrization ablation).
  void set_symmetrize_each_epoch(bool on) { symmetrize_each_epoch_ = on; }

  struct BuildCache {
    DenseMatrix m;       // Â X (fixed per run)
    DenseMatrix epre;    // m · W_enc
    DenseMatrix e;       // tanh(epre)
    std::vector<double> norms;
    struct Kept {
      std::size_t i, j;
      double raw;  // similarity score before clamping / sigmoid
    };
    std::vector<Kept> kept;
    WeightedAdjacency s;          // combined structure, pre-reweight
    RefinedAdjacency refined;     // valid when UnGSL attached
    WeightedAdjacency s_final;    // post-reweight (+ optional symmetrize)
    WeightedAdjacency s_norm;     // row-normalized for the downstream GCN
    bool self_loops_added = false;
    std::vector<double> row_sums; // of s_final (+ I when loops were added)
    std::size_t psi_evals = 0;
  };

  /// Forward structure generation from the current encoder parameters.
  WeightedAdjacency build_structure(const Graph& graph) {
    ensure_initialized(graph, 0);
    BuildCache cache;
    build(graph, cache);
    return cache.s_final;
  }

  /// Joint training of the auxiliary encoder, downstream GCN, and (when
  /// attached) the per-node thresholds. The structure is rebuilt every
  /// epoch from the live encoder. Deterministic per seed.
  TrainReport train(const Graph& graph, const TrainConfig& tcfg) {
    tcfg.validate();
    require(!mask_indices(graph.masks.train).empty(), "train_gsl: empty train mask");
    WallTimer timer;
    ensure_initialized(graph, tcfg.seed, tcfg.hidden, tcfg.dropout);
    std::mt19937_64 drop_rng = make_rng(tcfg.seed, "dropout");

    AdamState adam;
    adam.lr = tcfg.lr;
    adam.weight_decay = tcfg.weight_decay;
    std::vector<ParamTensor*> params = {&downstream_.w1, &downstream_.w2, &w_enc_};
    if (ungsl_attached_ && learn_eps_) {
      thresholds_.eps.lr_scale = ungsl_cfg_.eps_lr / tcfg.lr;
      params.push_back(&thresholds_.eps);
    }

    TrainReport rep;
    std::size_t since_best = 0;
    for (std::size_t epoch = 0; epoch < tcfg.epochs; ++epoch) {
      BuildCache cache;
      build(graph, cache);

      GcnCache gcache;
      DenseMatrix logits = gcn_forward(downstream_, cache.s_norm, graph.features,
                                       true, &drop_rng, &gcache);
      CrossEntropyResult ce =
          cross_entropy(logits, graph.labels, graph.masks.train);
      RegularizerResult reg;
      if (cfg_.lambda > 0.0 && (cfg_.reg_l1 || cfg_.reg_smooth))
        reg = regularize(cache.s_final, graph.features, cfg_.reg_l1, cfg_.reg_smooth);
      const double loss = ce.loss + cfg_.lambda * reg.penalty;
      if (!std::isfinite(loss))
        fail("train_gsl: divergence at epoch " + std::to_string(epoch));
      rep.loss_series.push_back(loss);

      for (ParamTensor* p : params) p->zero_grad();
      std::vector<double> adj_grad;
      gcn_backward(downstream_, gcache, ce.dlogits, &adj_grad);
      backward_structure(graph, cache, adj_grad, reg);
      adam_step(params, adam);

      DenseMatrix eval_logits = gcn_forward(downstream_, cache.s_norm,
                                            graph.features, false, nullptr, nullptr);
      const double val = accuracy(eval_logits, graph.labels, graph.masks.val);
      rep.epochs_run = epoch + 1;
      last_psi_evals_ = cache.psi_evals;
      if (val > rep.best_val_acc || epoch == 0) {
        rep.best_val_acc = val;
        rep.test_acc = accuracy(eval_logits, graph.labels, graph.masks.test);
        since_best = 0;
      } else {
        if (val == rep.best_val_acc)
          rep.test_acc = accuracy(eval_logits, graph.labels, graph.masks.test);
        if (++since_best >= tcfg.patience) break;
      }
    }

    // Final structure and logits from the trained encoder, eval mode.
    BuildCache cache;
    build(graph, cache);
    s_ = cache.s_final;
    s_norm_ = cache.s_norm;
    final_logits_ = gcn_forward(downstream_, cache.s_norm, graph.features, false,
                                nullptr, nullptr);
    trained_ = true;
    rep.wall_seconds = timer.seconds();
    return rep;
  }

  /// Final learned structure (reweighted when UnGSL is attached),
  /// consumable by any backbone after normalization.
  const WeightedAdjacency& export_structure() const {
    require(trained_, "export_structure: learner not trained");
    return s_;
  }

  const WeightedAdjacency& final_normalized() const {
    require(trained_, "final_normalized: learner not trained");
    return s_norm_;
  }

  /// Eval-mode logits of the downstream GCN on the final structure; the
  /// input to uncertainty pretraining.
  const DenseMatrix& final_logits() const {
    require(trained_, "final_logits: learner not trained");
    return final_logits_;
  }

  std::size_t last_psi_evals() const { return last_psi_evals_; }

  /// Loss as a pure function of the current parameters (gradient-check
  /// hook; eval mode, no dropout).
  double loss_at_params(const Graph& graph) {
    BuildCache cache;
    build(graph, cache);
    GcnCache gcache;
    DenseMatrix logits = gcn_forward(downstream_, cache.s_norm, graph.features,
                                     false, nullptr, &gcache);
    CrossEntropyResult ce = cross_entropy(logits, graph.labels, graph.masks.train);
    double loss = ce.loss;
    if (cfg_.lambda > 0.0 && (cfg_.reg_l1 || cfg_.reg_smooth))
      loss += cfg_.lambda * regularize(cache.s_final, graph.features, cfg_.reg_l1,
                                       cfg_.reg_smooth)
                                .penalty;
    return loss;
  }

  /// One backward pass at the current parameters (pairs with
  /// loss_at_params for finite-difference checks).
  void grads_at_params(const Graph& graph) {
    BuildCache cache;
    build(graph, cache);
    GcnCache gcache;
    DenseMatrix logits = gcn_forward(downstream_, cache.s_norm, graph.features,
                                     false, nullptr, &gcache);
    CrossEntropyResult ce = cross_entropy(logits, graph.labels, graph.masks.train);
    RegularizerResult reg;
    if (cfg_.lambda > 0.0 && (cfg_.reg_l1 || cfg_.reg_smooth))
      reg = regularize(cache.s_final, graph.features, cfg_.reg_l1, cfg_.reg_smooth);
    downstream_.w1.zero_grad();
    downstream_.w2.zero_grad();
    w_enc_.zero_grad();
    if (ungsl_attached_) thresholds_.eps.zero_grad();
    std::vector<double> adj_grad;
    gcn_backward(downstream_, gcache, ce.dlogits, &adj_grad);
    backward_structure(graph, cache, adj_grad, reg);
  }

  ParamTensor& encoder_params() { return w_enc_; }
  ParamTensor& threshold_params() { return thresholds_.eps; }

  /// Initializes encoder and downstream weights for a given seed without
  /// training (used by gradient-check harnesses).
  void init_params(const Graph& graph, std::uint64_t seed, std::size_t hidden,
                   double dropout) {
    ensure_initialized(graph, seed, hidden, dropout);
  }

 private:
  void ensure_initialized(const Graph& graph, std::uint64_t seed,
                          std::size_t hidden = 16, double dropout = 0.5) {
    if (initialized_) return;
    std::mt19937_64 enc_rng = make_rng(seed, "enc-init");
    w_enc_ = ParamTensor(graph.feature_dim(), cfg_.encoder_width, "gsl.w_enc");
    w_enc_.value = glorot_init(graph.feature_dim(), cfg_.encoder_width, enc_rng);
    std::mt19937_64 gcn_rng = make_rng(seed, "gcn-init");
    downstream_ = GcnModel::init(graph.feature_dim(), hidden, graph.num_classes,
                                 dropout, gcn_rng);
    initialized_ = true;
  }

  void build(const Graph& graph, BuildCache& cache) {
    const std::size_t n = graph.n;
    if (m_fixed_.rows() == 0) m_fixed_ = spmm(a_norm_.mat, graph.features);
    cache.m = m_fixed_;
    cache.epre = matmul(cache.m, w_enc_.value);
    cache.e = cache.epre;
    for (double& x : cache.e.data()) x = std::tanh(x);

    const Similarity sim = cfg_.resolved_similarity();
    cache.norms.assign(n, 0.0);
    if (sim == Similarity::kCosine) {
      for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < cache.e.cols(); ++c)
          s += cache.e(i, c) * cache.e(i, c);
        cache.norms[i] = std::sqrt(s);
        if (cache.norms[i] == 0.0)
          fail("build_structure: zero-norm embedding row " + std::to_string(i));
      }
    }

    // Per-row top-k over all candidate columns j != i; ties broken by
    // smaller column index. Scores are clamped at 0 from below before use
    // as weights.
    std::vector<Triplet> ts;
    std::vector<std::pair<double, std::size_t>> scores;
    for (std::size_t i = 0; i < n; ++i) {
      scores.clear();
      scores.reserve(n - 1);
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        double dot = 0.0;
        for (std::size_t c = 0; c < cache.e.cols(); ++c)
          dot += cache.e(i, c) * cache.e(j, c);
        const double raw = sim == Similarity::kCosine
                               ? dot / (cache.norms[i] * cache.norms[j])
                               : dot;
        scores.emplace_back(raw, j);
      }
      auto better = [](const std::pair<double, std::size_t>& a,
                       const std::pair<double, std::size_t>& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
      };
      const std::size_t kk = std::min(cfg_.k, scores.size());
      std::partial_sort(scores.begin(), scores.begin() + static_cast<std::ptrdiff_t>(kk),
                        scores.end(), better);
      for (std::size_t t = 0; t < kk; ++t) {
        const double raw = scores[t].first;
        const std::size_t j = scores[t].second;
        double w;
        if (cfg_.method == GslMethod::kMetricKnn) {
          if (raw <= 0.0) continue;  // clamped at zero, structural zeros dropped
          w = cfg_.alpha * raw;
        } else {
          w = sigmoid(raw);
        }
        if (w == 0.0) continue;
        cache.kept.push_back({i, j, raw});
        ts.push_back({i, j, w});
      }
    }

    // Combine with the original normalized graph.
    const double base_scale =
        cfg_.method == GslMethod::kMetricKnn ? 1.0 - cfg_.alpha : 1.0;
    for (const Triplet& t : a_norm_.mat.to_triplets())
      ts.push_back({t.row, t.col, base_scale * t.value});
    cache.s.mat = SparseMatrix::from_triplets(n, n, std::move(ts));
    cache.s.nonneg = true;

    if (ungsl_attached_) {
      cache.refined = reweight(cache.s, uncert_, thresholds_, ungsl_cfg_);
      cache.psi_evals = cache.refined.psi_evals;
      cache.s_final = cache.refined.s_hat;
    } else {
      cache.s_final = cache.s;
    }
    if (symmetrize_each_epoch_) cache.s_final = symmetrize(cache.s_final);

    // Row normalization for the downstream GCN. The combined structure
    // already carries self-loops through the Â term; unit self-loops are
    // added only when some diagonal entry is missing.
    bool all_diag = true;
    for (std::size_t i = 0; i < n && all_diag; ++i)
      all_diag = cache.s_final.mat.find(i, i) != SparseMatrix::npos;
    cache.self_loops_added = !all_diag;
    cache.row_sums.assign(n, 1.0);
    std::vector<Triplet> norm_ts = cache.s_final.mat.to_triplets();
    if (cache.self_loops_added)
      for (std::size_t i = 0; i < n; ++i) norm_ts.push_back({i, i, 1.0});
    SparseMatrix t_mat = SparseMatrix::from_triplets(n, n, std::move(norm_ts));
    for (std::size_t i = 0; i < n; ++i) {
      cache.row_sums[i] = t_mat.row_sum(i);
      if (std::fabs(cache.row_sums[i] - 1.0) <= 1e-12) cache.row_sums[i] = 1.0;
    }
    std::vector<Triplet> out;
    out.reserve(t_mat.nnz());
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = t_mat.row_begin(i); k < t_mat.row_end(i); ++k)
        out.push_back({i, t_mat.col(k), t_mat.value(k) / cache.row_sums[i]});
    cache.s_norm.mat = SparseMatrix::from_triplets(n, n, std::move(out));
  }

  /// Routes dLoss/d(normalized adjacency entries) back through row
  /// normalization, reweighting, combination, similarity, and the encoder.
  void backward_structure(const Graph& graph, const BuildCache& cache,
                          const std::vector<double>& d_norm,
                          const RegularizerResult& reg) {
    const std::size_t n = graph.n;
    const SparseMatrix& pn = cache.s_norm.mat;

    // Row normalization: P_ij = T_ij / r_i with T = S_final + I.
    std::vector<double> d_final(cache.s_final.mat.nnz(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double r = cache.row_sums[i];
      double inner = 0.0;
      for (std::size_t k = pn.row_begin(i); k < pn.row_end(i); ++k)
        inner += d_norm[k] * pn.value(k) * r;  // d_norm · T values
      for (std::size_t k = cache.s_final.mat.row_begin(i);
           k < cache.s_final.mat.row_end(i); ++k) {
        const std::size_t j = cache.s_final.mat.col(k);
        const std::size_t kp = pn.find(i, j);
        const double dp = kp == SparseMatrix::npos ? 0.0 : d_norm[kp];
        d_final[k] = dp / r - inner / (r * r);
      }
    }
    if (!reg.grad.empty())
      for (std::size_t k = 0; k < reg.grad.size(); ++k)
        d_final[k] += cfg_.lambda * reg.grad[k];

    // Optional symmetrization: out_ij = (in_ij + in_ji)/2.
    std::vector<double> d_rw;
    const WeightedAdjacency& rw_out =
        ungsl_attached_ ? cache.refined.s_hat : cache.s;
    if (symmetrize_each_epoch_) {
      d_rw.assign(rw_out.mat.nnz(), 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = rw_out.mat.row_begin(i); k < rw_out.mat.row_end(i);
             ++k) {
          const std::size_t j = rw_out.mat.col(k);
          const std::size_t kf = cache.s_final.mat.find(i, j);
          const std::size_t kb = cache.s_final.mat.find(j, i);
          double g = 0.0;
          if (kf != SparseMatrix::npos) g += 0.5 * d_final[kf];
          if (kb != SparseMatrix::npos) g += 0.5 * d_final[kb];
          d_rw[k] = g;
        }
    } else {
      d_rw = std::move(d_final);
    }

    // Reweighting: thresholds and base-structure gradients.
    std::vector<double> d_s;
    if (ungsl_attached_) {
      ReweightGrads rg = reweight_backward(cache.refined, d_rw);
      if (learn_eps_)
        for (std::size_t i = 0; i < n; ++i) thresholds_.eps.grad(i, 0) += rg.d_eps[i];
      d_s = std::move(rg.d_base);
    } else {
      d_s = std::move(d_rw);
    }

    // Combination and similarity: gradients flow only through kept
    // score entries; the original-graph part is constant.
    DenseMatrix d_e(n, cache.e.cols());
    const Similarity sim = cfg_.resolved_similarity();
    for (const BuildCache::Kept& kept : cache.kept) {
      const std::size_t ks = cache.s.mat.find(kept.i, kept.j);
      if (ks == SparseMatrix::npos) continue;
      const double g_s = d_s[ks];
      if (g_s == 0.0) continue;
      double d_raw;
      if (cfg_.method == GslMethod::kMetricKnn)
        d_raw = cfg_.alpha * g_s;
      else
        d_raw = g_s * sigmoid_grad(kept.raw);

      if (sim == Similarity::kInnerProduct) {
        for (std::size_t c = 0; c < cache.e.cols(); ++c) {
          d_e(kept.i, c) += d_raw * cache.e(kept.j, c);
          d_e(kept.j, c) += d_raw * cache.e(kept.i, c);
        }
      } else {
        const double ni = cache.norms[kept.i], nj = cache.norms[kept.j];
        const double cosv = kept.raw;
        for (std::size_t c = 0; c < cache.e.cols(); ++c) {
          d_e(kept.i, c) += d_raw * (cache.e(kept.j, c) / (ni * nj) -
                                     cosv * cache.e(kept.i, c) / (ni * ni));
          d_e(kept.j, c) += d_raw * (cache.e(kept.i, c) / (ni * nj) -
                                     cosv * cache.e(kept.j, c) / (nj * nj));
        }
      }
    }

    // tanh encoder: dW_enc = Mᵀ (d_e ⊙ (1 - E²)).
    DenseMatrix d_pre = d_e;
    for (std::size_t i = 0; i < d_pre.size(); ++i)
      d_pre.data()[i] *= 1.0 - cache.e.data()[i] * cache.e.data()[i];
    axpy(1.0, matmul_at_b(cache.m, d_pre), w_enc_.grad);
  }

  GslConfig cfg_;
  WeightedAdjacency a_norm_;
  DenseMatrix m_fixed_;
  ParamTensor w_enc_;
  GcnModel downstream_;
  bool initialized_ = false;
  bool trained_ = false;

  bool ungsl_attached_ = false;
  bool learn_eps_ = true;
  bool symmetrize_each_epoch_ = false;
  UnGslConfig ungsl_cfg_;
  UncertaintyVector uncert_;
  ThresholdVector thresholds_;

  WeightedAdjacency s_;
  WeightedAdjacency s_norm_;
  DenseMatrix final_logits_;
  std::size_t last_psi_evals_ = 0;
};

/// Frozen uncertainty from a pretrained learner's classifier: softmax of
/// the final logits, reduced to per-node entropy. Rejects untrained models.
inline UncertaintyVector pretrain_uncertainty(const StructureLearner& learner) {
  return uncertainty_from_logits(learner.final_logits());
}

}  // namespace ungsl

#endif  // UNGSL_GSL_HPP
