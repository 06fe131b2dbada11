#ifndef UNGSL_GRAPH_IO_HPP
#define UNGSL_GRAPH_IO_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ungsl/graph.hpp"

namespace ungsl {

// Plain-text dataset format:
//   graph.edges    one "src<TAB>dst<TAB>weight" per line, 0-based ids,
//                  weight optional (default 1.0)
//   graph.features CSV, row i = features of node i
//   graph.labels   one integer per line, -1 for unlabeled
//   graph.masks    three lines of space-separated node ids (train/val/test)

inline std::ifstream open_or_fail(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  return in;
}

/// Reads an edge list. Duplicate (src, dst) lines are merged by summing
/// weights. Returns triplets in (dst-row, src-col) orientation: line
/// "j i w" means weight w from v_j into v_i's aggregation.
inline std::vector<Triplet> load_edge_triplets(const std::string& path,
                                               std::size_t& max_id) {
  std::ifstream in = open_or_fail(path);
  std::vector<Triplet> ts;
  max_id = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::size_t src, dst;
    double w = 1.0;
    if (!(ss >> src >> dst)) fail(path + ":" + std::to_string(lineno) + ": bad edge line");
    ss >> w;
    max_id = std::max({max_id, src, dst});
    ts.push_back({dst, src, w});
  }
  return ts;
}

inline DenseMatrix load_features_csv(const std::string& path) {
  std::ifstream in = open_or_fail(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows[0].size())
      fail(path + ": ragged feature rows");
    rows.push_back(std::move(row));
  }
  DenseMatrix x(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) x(i, j) = rows[i][j];
  return x;
}

inline std::vector<int> load_labels(const std::string& path) {
  std::ifstream in = open_or_fail(path);
  std::vector<int> labels;
  int v;
  while (in >> v) labels.push_back(v);
  return labels;
}

inline SplitMasks load_masks(const std::string& path, std::size_t n) {
  std::ifstream in = open_or_fail(path);
  SplitMasks m = SplitMasks::empty(n);
  auto read_line = [&](std::vector<bool>& mask) {
    std::string line;
    if (!std::getline(in, line)) fail(path + ": expected three mask lines");
    std::istringstream ss(line);
    std::size_t id;
    while (ss >> id) {
      require(id < n, path + ": mask id out of range");
      mask[id] = true;
    }
  };
  read_line(m.train);
  read_line(m.val);
  read_line(m.test);
  return m;
}

/// Loads the four-file dataset rooted at `dir` (graph.edges etc.).
/// Undirected inputs are expected to list both directions; a `symmetric`
/// flag only sets the hint, the data is taken as given.
inline Graph load_graph(const std::string& dir, bool symmetric_hint = true) {
  namespace fs = std::filesystem;
  Graph g;
  std::size_t max_id = 0;
  auto ts = load_edge_triplets((fs::path(dir) / "graph.edges").string(), max_id);
  g.features = load_features_csv((fs::path(dir) / "graph.features").string());
  g.n = g.features.rows();
  require(max_id < g.n, "load_graph: edge id exceeds feature rows");
  g.adjacency = adjacency_from_triplets(g.n, std::move(ts), symmetric_hint);
  g.labels = load_labels((fs::path(dir) / "graph.labels").string());
  require(g.labels.size() == g.n, "load_graph: label count != node count");
  int mx = -1;
  for (int l : g.labels) mx = std::max(mx, l);
  g.num_classes = static_cast<std::size_t>(mx + 1);
  g.masks = load_masks((fs::path(dir) / "graph.masks").string(), g.n);
  g.validate();
  return g;
}

/// Writes a structure in the edge-list format, directed interpretation:
/// a stored entry (i, j) with weight w becomes line "j i w" (edge from
/// v_j into v_i's aggregation).
inline void save_structure(const WeightedAdjacency& adj, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot write " + path);
  out.precision(17);
  for (std::size_t i = 0; i < adj.n(); ++i)
    for (std::size_t k = adj.mat.row_begin(i); k < adj.mat.row_end(i); ++k)
      out << adj.mat.col(k) << '\t' << i << '\t' << adj.mat.value(k) << '\n';
}

inline WeightedAdjacency load_structure(const std::string& path, std::size_t n) {
  std::size_t max_id = 0;
  auto ts = load_edge_triplets(path, max_id);
  require(max_id < n, "load_structure: id out of range");
  return adjacency_from_triplets(n, std::move(ts));
}

}  // namespace ungsl

#endif  // UNGSL_GRAPH_IO_HPP
