#ifndef UNGSL_NOISE_HPP
#define UNGSL_NOISE_HPP

#include <random>
#include <set>

#include "ungsl/graph.hpp"

namespace ungsl {

enum class NoiseKind { kEdgeAdd, kEdgeDelete, kFeatureMask, kLabelFlip };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kEdgeAdd;
  double level = 0.0;  // fraction in [0, 1]
  std::uint64_t seed = 0;

  void validate() const {
    require(level >= 0.0 && level <= 1.0, "NoiseSpec: level outside [0, 1]");
  }
};

inline const char* noise_kind_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::kEdgeAdd: return "edge_add";
    case NoiseKind::kEdgeDelete: return "edge_delete";
    case NoiseKind::kFeatureMask: return "feature_mask";
    case NoiseKind::kLabelFlip: return "label_flip";
  }
  return "?";
}

namespace detail {

inline std::vector<std::pair<std::size_t, std::size_t>> undirected_edges(
    const Graph& g) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t k = g.adjacency.mat.row_begin(i);
         k < g.adjacency.mat.row_end(i); ++k) {
      const std::size_t j = g.adjacency.mat.col(k);
      if (i < j) edges.emplace_back(i, j);
    }
  return edges;
}

}  // namespace detail

/// Perturbs the undirected input graph. Counts round with floor.
/// edge_delete removes floor(level·m) existing undirected edges;
/// edge_add inserts floor(level·m) uniformly chosen non-edges;
/// feature_mask zeroes floor(level·n·d) feature entries;
/// label_flip reassigns floor(level·|train|) training labels to a
/// uniformly chosen different class. Deterministic per seed.
inline Graph inject_noise(const Graph& g, const NoiseSpec& spec) {
  spec.validate();
  Graph out = g;
  if (spec.level == 0.0) return out;
  std::mt19937_64 rng = make_rng(spec.seed,
                                 std::string("noise-") + noise_kind_name(spec.kind));

  switch (spec.kind) {
    case NoiseKind::kEdgeDelete: {
      auto edges = detail::undirected_edges(g);
      const std::size_t m = edges.size();
      const std::size_t del =
          static_cast<std::size_t>(spec.level * static_cast<double>(m));
      std::shuffle(edges.begin(), edges.end(), rng);
      std::set<std::pair<std::size_t, std::size_t>> removed(edges.begin(),
                                                            edges.begin() + static_cast<std::ptrdiff_t>(del));
      std::vector<Triplet> ts;
      for (const Triplet& t : g.adjacency.mat.to_triplets()) {
        const auto key = t.row < t.col ? std::make_pair(t.row, t.col)
                                       : std::make_pair(t.col, t.row);
        if (removed.count(key)) continue;
        ts.push_back(t);
      }
      out.adjacency = adjacency_from_triplets(g.n, std::move(ts),
                                              g.adjacency.symmetric_hint);
      break;
    }
    case NoiseKind::kEdgeAdd: {
      auto edges = detail::undirected_edges(g);
      const std::size_t m = edges.size();
      const std::size_t add =
          static_cast<std::size_t>(spec.level * static_cast<double>(m));
      std::set<std::pair<std::size_t, std::size_t>> existing(edges.begin(),
                                                             edges.end());
      const std::size_t max_edges = g.n * (g.n - 1) / 2;
      require(existing.size() + add <= max_edges,
              "inject_noise: edge_add infeasible on near-complete graph");
      std::uniform_int_distribution<std::size_t> pick(0, g.n - 1);
      std::vector<Triplet> ts = g.adjacency.mat.to_triplets();
      std::size_t added = 0;
      while (added < add) {
        std::size_t i = pick(rng), j = pick(rng);
        if (i == j) continue;
        auto key = i < j ? std::make_pair(i, j) : std::make_pair(j, i);
        if (existing.count(key)) continue;
        existing.insert(key);
        ts.push_back({key.first, key.second, 1.0});
        ts.push_back({key.second, key.first, 1.0});
        ++added;
      }
      out.adjacency = adjacency_from_triplets(g.n, std::move(ts),
                                              g.adjacency.symmetric_hint);
      break;
    }
    case NoiseKind::kFeatureMask: {
      const std::size_t total = g.features.size();
      const std::size_t zero =
          static_cast<std::size_t>(spec.level * static_cast<double>(total));
      std::vector<std::size_t> idx(total);
      for (std::size_t i = 0; i < total; ++i) idx[i] = i;
      std::shuffle(idx.begin(), idx.end(), rng);
      for (std::size_t t = 0; t < zero; ++t) out.features.data()[idx[t]] = 0.0;
      break;
    }
    case NoiseKind::kLabelFlip: {
      // Only training labels are flipped; evaluation labels stay clean so
      // accuracy remains meaningful.
      std::vector<std::size_t> train = mask_indices(g.masks.train);
      const std::size_t flips =
          static_cast<std::size_t>(spec.level * static_cast<double>(train.size()));
      std::shuffle(train.begin(), train.end(), rng);
      std::uniform_int_distribution<int> cls(0, static_cast<int>(g.num_classes) - 2);
      for (std::size_t t = 0; t < flips; ++t) {
        const std::size_t i = train[t];
        int c = cls(rng);
        if (c >= out.labels[i]) ++c;  // uniform over the other classes
        out.labels[i] = c;
      }
      break;
    }
  }
  out.validate();
  return out;
}

}  // namespace ungsl

#endif  // UNGSL_NOISE_HPP
