#ifndef UNGSL_SBM_HPP
#define UNGSL_SBM_HPP

#include <random>

#include "ungsl/graph.hpp"

namespace ungsl {

/// Stochastic block model with Gaussian features around class prototypes.
struct SbmConfig {
  std::size_t n = 500;
  std::size_t num_classes = 4;
  double p_in = 0.05;
  double p_out = 0.005;
  std::size_t feature_dim = 16;
  double signal = 1.0;  // prototype scale vs unit noise
  std::uint64_t seed = 0;
  double train_frac = 0.1;
  double val_frac = 0.1;

  void validate() const {
    require(num_classes >= 2 && n >= num_classes, "SbmConfig: bad sizes");
    require(p_out >= 0.0 && p_out <= p_in && p_in <= 1.0,
            "SbmConfig: need 0 <= p_out <= p_in <= 1");
    require(p_in > 0.0, "SbmConfig: expected degree would be zero");
  }

  double analytic_homophily() const {
    return p_in / (p_in + static_cast<double>(num_classes - 1) * p_out);
  }
};

/// Samples a block-model graph: labels are block ids assigned round-robin,
/// each unordered pair drawn once (no duplicates), features are
/// prototype·signal + standard Gaussian noise, split
/// train/val/test stratified by class.
inline Graph generate_sbm(const SbmConfig& cfg) {
  cfg.validate();
  Graph g;
  g.n = cfg.n;
  g.num_classes = cfg.num_classes;
  g.labels.resize(cfg.n);
  for (std::size_t i = 0; i < cfg.n; ++i)
    g.labels[i] = static_cast<int>(i % cfg.num_classes);

  std::mt19937_64 edge_rng = make_rng(cfg.seed, "sbm-edges");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Triplet> ts;
  for (std::size_t i = 0; i < cfg.n; ++i)
    for (std::size_t j = i + 1; j < cfg.n; ++j) {
      const double p = g.labels[i] == g.labels[j] ? cfg.p_in : cfg.p_out;
      if (u(edge_rng) < p) {
        ts.push_back({i, j, 1.0});
        ts.push_back({j, i, 1.0});
      }
    }
  g.adjacency = adjacency_from_triplets(cfg.n, std::move(ts), true);

  std::mt19937_64 feat_rng = make_rng(cfg.seed, "sbm-features");
  std::normal_distribution<double> gauss(0.0, 1.0);
  DenseMatrix proto(cfg.num_classes, cfg.feature_dim);
  for (double& x : proto.data()) x = gauss(feat_rng);
  g.features = DenseMatrix(cfg.n, cfg.feature_dim);
  for (std::size_t i = 0; i < cfg.n; ++i) {
    const std::size_t c = static_cast<std::size_t>(g.labels[i]);
    for (std::size_t d = 0; d < cfg.feature_dim; ++d)
      g.features(i, d) = cfg.signal * proto(c, d) + gauss(feat_rng);
  }

  // Stratified split: per class, shuffle then cut train/val/test.
  std::mt19937_64 split_rng = make_rng(cfg.seed, "sbm-split");
  g.masks = SplitMasks::empty(cfg.n);
  for (std::size_t c = 0; c < cfg.num_classes; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < cfg.n; ++i)
      if (g.labels[i] == static_cast<int>(c)) idx.push_back(i);
    std::shuffle(idx.begin(), idx.end(), split_rng);
    const std::size_t n_train =
        std::max<std::size_t>(1, static_cast<std::size_t>(
                                     cfg.train_frac * static_cast<double>(idx.size())));
    const std::size_t n_val =
        std::max<std::size_t>(1, static_cast<std::size_t>(
                                     cfg.val_frac * static_cast<double>(idx.size())));
    for (std::size_t t = 0; t < idx.size(); ++t) {
      if (t < n_train)
        g.masks.train[idx[t]] = true;
      else if (t < n_train + n_val)
        g.masks.val[idx[t]] = true;
      else
        g.masks.test[idx[t]] = true;
    }
  }
  g.validate();
  return g;
}

/// Fraction of (undirected) edges joining same-class endpoints.
inline double empirical_homophily(const Graph& g) {
  std::size_t same = 0, total = 0;
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t k = g.adjacency.mat.row_begin(i);
         k < g.adjacency.mat.row_end(i); ++k) {
      const std::size_t j = g.adjacency.mat.col(k);
      if (j <= i) continue;
      ++total;
      if (g.labels[i] == g.labels[j]) ++same;
    }
  return total == 0 ? 0.0 : static_cast<double>(same) / static_cast<double>(total);
}

}  // namespace ungsl

#endif  // UNGSL_SBM_HPP
