#ifndef UNGSL_GRAPH_HPP
#define UNGSL_GRAPH_HPP

#include <cstdint>
#include <vector>

#include "ungsl/adjacency.hpp"
#include "ungsl/dense.hpp"

namespace ungsl {

constexpr int kUnlabeled = -1;

struct SplitMasks {
  std::vector<bool> train, val, test;

  void validate(std::size_t n) const {
    require(train.size() == n && val.size() == n && test.size() == n,
            "SplitMasks: length mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      int c = (train[i] ? 1 : 0) + (val[i] ? 1 : 0) + (test[i] ? 1 : 0);
      require(c <= 1, "SplitMasks: masks overlap at node " + std::to_string(i));
    }
  }

  static SplitMasks empty(std::size_t n) {
    return {std::vector<bool>(n, false), std::vector<bool>(n, false),
            std::vector<bool>(n, false)};
  }
};

/// The dataset object: nodes, sparse adjacency, dense features, optional
/// labels, split masks. Immutable after construction by convention.
struct Graph {
  std::size_t n = 0;
  WeightedAdjacency adjacency;
  DenseMatrix features;                 // n × d
  std::vector<int> labels;              // class id in [0, K) or kUnlabeled
  std::size_t num_classes = 0;
  SplitMasks masks;

  std::size_t feature_dim() const { return features.cols(); }

  void validate() const {
    require(adjacency.n() == n, "Graph: adjacency size != n");
    require(features.rows() == n, "Graph: feature rows != n");
    require(labels.size() == n, "Graph: label count != n");
    for (std::size_t i = 0; i < n; ++i)
      require(labels[i] == kUnlabeled ||
                  (labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < num_classes),
              "Graph: label out of range at node " + std::to_string(i));
    masks.validate(n);
    adjacency.validate();
  }
};

inline std::vector<std::size_t> mask_indices(const std::vector<bool>& mask) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) idx.push_back(i);
  return idx;
}

}  // namespace ungsl

#endif  // UNGSL_GRAPH_HPP
