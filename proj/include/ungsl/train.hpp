#ifndef UNGSL_TRAIN_HPP
#define UNGSL_TRAIN_HPP

#include <chrono>
#include <cstdint>

#include "ungsl/gcn.hpp"

namespace ungsl {

struct TrainConfig {
  std::size_t epochs = 200;
  double lr = 0.01;
  double weight_decay = 5e-4;
  double dropout = 0.5;
  std::size_t hidden = 64;
  std::size_t patience = 100;
  std::uint64_t seed = 0;

  void validate() const {
    require(epochs >= 1, "TrainConfig: epochs must be >= 1");
    require(patience >= 1, "TrainConfig: patience must be >= 1");
  }
};

struct TrainReport {
  double best_val_acc = 0.0;
  double test_acc = 0.0;
  std::vector<double> loss_series;
  double wall_seconds = 0.0;
  std::size_t epochs_run = 0;
};

class WallTimer {
 public:
  WallTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

/// Trains a two-layer GCN on a fixed normalized adjacency. Deterministic
/// given the seed: weight init and dropout draws come from named streams.
/// Reports the test accuracy at the best-validation epoch.
inline TrainReport train_gcn(GcnModel& model, const Graph& graph,
                             const WeightedAdjacency& adj_norm,
                             const TrainConfig& cfg) {
  cfg.validate();
  require(!mask_indices(graph.masks.train).empty(), "train_gcn: empty train mask");
  WallTimer timer;
  std::mt19937_64 drop_rng = make_rng(cfg.seed, "dropout");

  AdamState adam;
  adam.lr = cfg.lr;
  adam.weight_decay = cfg.weight_decay;
  auto params = model.params();

  TrainReport rep;
  std::size_t since_best = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    GcnCache cache;
    DenseMatrix logits = gcn_forward(model, adj_norm, graph.features, true,
                                     &drop_rng, &cache);
    CrossEntropyResult ce = cross_entropy(logits, graph.labels, graph.masks.train);
    if (!std::isfinite(ce.loss))
      fail("train_gcn: divergence at epoch " + std::to_string(epoch));
    rep.loss_series.push_back(ce.loss);
    for (ParamTensor* p : params) p->zero_grad();
    gcn_backward(model, cache, ce.dlogits, nullptr);
    adam_step(params, adam);

    DenseMatrix eval_logits =
        gcn_forward(model, adj_norm, graph.features, false, nullptr, nullptr);
    const double val = accuracy(eval_logits, graph.labels, graph.masks.val);
    rep.epochs_run = epoch + 1;
    if (val > rep.best_val_acc || epoch == 0) {
      rep.best_val_acc = val;
      rep.test_acc = accuracy(eval_logits, graph.labels, graph.masks.test);
      since_best = 0;
    } else {
      // ties refresh the snapshot (later epochs are better trained) but
      // do not extend patience
      if (val == rep.best_val_acc)
        rep.test_acc = accuracy(eval_logits, graph.labels, graph.masks.test);
      if (++since_best >= cfg.patience) break;
    }
  }
  rep.wall_seconds = timer.seconds();
  return rep;
}

/// Convenience wrapper: seeds the model from the config and trains on the
/// row-normalized input adjacency.
inline TrainReport train_gcn_on(const Graph& graph, const WeightedAdjacency& adj,
                                const TrainConfig& cfg, GcnModel* out_model = nullptr,
                                const WeightedAdjacency* pre_normalized = nullptr) {
  WeightedAdjacency adj_norm =
      pre_normalized ? *pre_normalized : normalize(adj, NormMode::kRow, true);
  std::mt19937_64 init_rng = make_rng(cfg.seed, "gcn-init");
  GcnModel model = GcnModel::init(graph.feature_dim(), cfg.hidden,
                                  graph.num_classes, cfg.dropout, init_rng);
  TrainReport rep = train_gcn(model, graph, adj_norm, cfg);
  if (out_model) *out_model = std::move(model);
  return rep;
}

/// Trains an SGC head (logits = Â^k X W). Propagation is precomputed once.
inline TrainReport train_sgc(SgcModel& model, const Graph& graph,
                             const WeightedAdjacency& adj_norm,
                             const TrainConfig& cfg) {
  cfg.validate();
  WallTimer timer;
  DenseMatrix p = sgc_propagate(model, adj_norm, graph.features);

  AdamState adam;
  adam.lr = cfg.lr;
  adam.weight_decay = cfg.weight_decay;
  std::vector<ParamTensor*> params = {&model.w};

  TrainReport rep;
  std::size_t since_best = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    DenseMatrix logits = matmul(p, model.w.value);
    CrossEntropyResult ce = cross_entropy(logits, graph.labels, graph.masks.train);
    if (!std::isfinite(ce.loss))
      fail("train_sgc: divergence at epoch " + std::to_string(epoch));
    rep.loss_series.push_back(ce.loss);
    model.w.zero_grad();
    axpy(1.0, matmul_at_b(p, ce.dlogits), model.w.grad);
    adam_step(params, adam);

    DenseMatrix eval_logits = matmul(p, model.w.value);
    const double val = accuracy(eval_logits, graph.labels, graph.masks.val);
    rep.epochs_run = epoch + 1;
    if (val > rep.best_val_acc || epoch == 0) {
      rep.best_val_acc = val;
      rep.test_acc = accuracy(eval_logits, graph.labels, graph.masks.test);
      since_best = 0;
    } else {
      // ties refresh the snapshot (later epochs are better trained) but
      // do not extend patience
      if (val == rep.best_val_acc)
        rep.test_acc = accuracy(eval_logits, graph.labels, graph.masks.test);
      if (++since_best >= cfg.patience) break;
    }
  }
  rep.wall_seconds = timer.seconds();
  return rep;
}

}  // namespace ungsl

#endif  // UNGSL_TRAIN_HPP
