#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "ungsl/adjacency.hpp"
#include "ungsl/graph_io.hpp"

using namespace ungsl;

namespace {

// Dense oracles, independent of the sparse implementation path.

std::vector<std::vector<double>> dense_from_triplets(
    std::size_t n, std::size_t m, const std::vector<Triplet>& ts) {
  std::vector<std::vector<double>> d(n, std::vector<double>(m, 0.0));
  for (const Triplet& t : ts) d[t.row][t.col] += t.value;
  return d;
}

std::vector<std::vector<double>> dense_sym_normalize(
    std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) a[i][i] += 1.0;
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) deg[i] += a[i][j];
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i][j] /= std::sqrt(deg[i] * deg[j]);
  return a;
}

WeightedAdjacency random_adjacency(std::size_t n, double density,
                                   std::mt19937_64& rng, bool symmetric = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Triplet> ts;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (symmetric && j < i) continue;
      if (i != j && u(rng) < density) {
        const double w = u(rng);
        ts.push_back({i, j, w});
        if (symmetric && i != j) ts.push_back({j, i, w});
      }
    }
  return adjacency_from_triplets(n, std::move(ts), symmetric);
}

}  // namespace

TEST_CASE("normalize: isolated node with self-loops, row mode") {
  WeightedAdjacency a = adjacency_from_triplets(1, {});
  WeightedAdjacency r = normalize(a, NormMode::kRow, true);
  CHECK(r.mat.nnz() == 1);
  CHECK(r.mat.get(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("normalize: one unit neighbor plus self-loop, row mode") {
  WeightedAdjacency a = adjacency_from_triplets(2, {{0, 1, 1.0}, {1, 0, 1.0}});
  WeightedAdjacency r = normalize(a, NormMode::kRow, true);
  CHECK(r.mat.get(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r.mat.get(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("normalize: 3-node path, symmetric mode vs dense oracle") {
  std::vector<Triplet> ts = {{0, 1, 1.0}, {1, 0, 1.0}, {1, 2, 1.0}, {2, 1, 1.0}};
  WeightedAdjacency a = adjacency_from_triplets(3, ts, true);
  WeightedAdjacency r = normalize(a, NormMode::kSymmetric, true);
  auto oracle = dense_sym_normalize(dense_from_triplets(3, 3, ts));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(r.mat.get(i, j) == doctest::Approx(oracle[i][j]).epsilon(1e-12));
}

TEST_CASE("normalize: zero-degree row without self-loops is rejected") {
  WeightedAdjacency a = adjacency_from_triplets(2, {{0, 1, 1.0}});
  CHECK_THROWS(normalize(a, NormMode::kRow, false));
}

TEST_CASE("normalize: row mode rows sum to 1, random graphs") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    WeightedAdjacency a = random_adjacency(12, 0.3, rng);
    WeightedAdjacency r = normalize(a, NormMode::kRow, true);
    for (std::size_t i = 0; i < 12; ++i)
      CHECK(r.mat.row_sum(i) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("normalize: idempotent in row mode on already-normalized input") {
  std::mt19937_64 rng(8);
  WeightedAdjacency a = random_adjacency(10, 0.4, rng);
  WeightedAdjacency r1 = normalize(a, NormMode::kRow, true);
  WeightedAdjacency r2 = normalize(r1, NormMode::kRow, false);
  REQUIRE(r1.mat.nnz() == r2.mat.nnz());
  for (std::size_t k = 0; k < r1.mat.nnz(); ++k)
    CHECK(r1.mat.value(k) == r2.mat.value(k));  // bit-exact
}

TEST_CASE("spmm: identity and zero") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  DenseMatrix m(4, 3);
  for (double& x : m.data()) x = u(rng);

  std::vector<Triplet> id;
  for (std::size_t i = 0; i < 4; ++i) id.push_back({i, i, 1.0});
  SparseMatrix eye = SparseMatrix::from_triplets(4, 4, id);
  DenseMatrix r = spmm(eye, m);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(r.data()[i] == m.data()[i]);

  SparseMatrix zero(4, 4);
  SparseMatrix z = SparseMatrix::from_triplets(4, 4, {});
  DenseMatrix rz = spmm(z, m);
  for (double x : rz.data()) CHECK(x == 0.0);
}

TEST_CASE("spmm: random 5x5 sparse times 5x3 dense vs dense oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Triplet> ts;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      if ((rng() & 1u) == 0) ts.push_back({i, j, u(rng)});
  SparseMatrix a = SparseMatrix::from_triplets(5, 5, ts);
  DenseMatrix x(5, 3);
  for (double& v : x.data()) v = u(rng);
  DenseMatrix y = spmm(a, x);

  auto ad = dense_from_triplets(5, 5, ts);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 3; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 5; ++k) s += ad[i][k] * x(k, j);
      CHECK(y(i, j) == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("spmm: dimension mismatch rejected") {
  SparseMatrix a = SparseMatrix::from_triplets(3, 4, {{0, 0, 1.0}});
  DenseMatrix x(3, 2);
  CHECK_THROWS(spmm(a, x));
}

TEST_CASE("spmm equals dense product on random graphs up to n=64") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<std::size_t> nd(1, 64);
  for (int t = 0; t < 25; ++t) {
    const std::size_t n = nd(rng);
    std::vector<Triplet> ts;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (u(rng) > 0.6) ts.push_back({i, j, u(rng)});
    SparseMatrix a = SparseMatrix::from_triplets(n, n, ts);
    DenseMatrix x(n, 4);
    for (double& v : x.data()) v = u(rng);
    DenseMatrix y = spmm(a, x);
    auto ad = dense_from_triplets(n, n, ts);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < 4; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k) s += ad[i][k] * x(k, j);
        CHECK(y(i, j) == doctest::Approx(s).epsilon(1e-10));
      }
  }
}

TEST_CASE("symmetrize: fixed point on symmetric input") {
  std::mt19937_64 rng(5);
  WeightedAdjacency a = random_adjacency(6, 0.4, rng, true);
  WeightedAdjacency s = symmetrize(a);
  REQUIRE(s.mat.nnz() == a.mat.nnz());
  for (std::size_t k = 0; k < a.mat.nnz(); ++k)
    CHECK(s.mat.value(k) == a.mat.value(k));
}

TEST_CASE("symmetrize: mean of an asymmetric pair") {
  WeightedAdjacency a = adjacency_from_triplets(2, {{0, 1, 0.8}, {1, 0, 0.2}});
  WeightedAdjacency s = symmetrize(a);
  CHECK(s.mat.get(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.mat.get(1, 0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.symmetric_hint);
}

TEST_CASE("symmetrize: random 6x6 vs (M+Mt)/2 dense oracle, idempotent") {
  std::mt19937_64 rng(9);
  WeightedAdjacency a = random_adjacency(6, 0.5, rng);
  WeightedAdjacency s = symmetrize(a);
  auto ad = dense_from_triplets(6, 6, a.mat.to_triplets());
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j)
      CHECK(s.mat.get(i, j) ==
            doctest::Approx(0.5 * (ad[i][j] + ad[j][i])).epsilon(1e-14));

  WeightedAdjacency s2 = symmetrize(s);
  REQUIRE(s2.mat.nnz() == s.mat.nnz());
  for (std::size_t k = 0; k < s.mat.nnz(); ++k)
    CHECK(s2.mat.value(k) == s.mat.value(k));
}

TEST_CASE("sparse invariants: sorted columns, merged duplicates") {
  SparseMatrix m = SparseMatrix::from_triplets(
      2, 3, {{0, 2, 1.0}, {0, 0, 2.0}, {0, 2, 0.5}, {1, 1, -1.0}, {1, 1, 1.0}});
  CHECK(m.nnz() == 2);  // (1,1) merged to zero and dropped
  CHECK(m.get(0, 0) == 2.0);
  CHECK(m.get(0, 2) == 1.5);
  for (std::size_t r = 0; r < m.n_rows(); ++r)
    for (std::size_t k = m.row_begin(r); k + 1 < m.row_end(r); ++k)
      CHECK(m.col(k) < m.col(k + 1));
}

TEST_CASE("graph file round-trip") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "ungsl_io_test";
  fs::create_directories(dir);

  {
    std::ofstream e(dir / "graph.edges");
    e << "0\t1\t0.5\n1\t0\t0.5\n1\t2\n2\t1\n";
    std::ofstream f(dir / "graph.features");
    f << "1.0,2.0\n3.0,4.0\n5.0,6.0\n";
    std::ofstream l(dir / "graph.labels");
    l << "0\n1\n-1\n";
    std::ofstream m(dir / "graph.masks");
    m << "0\n1\n2\n";
  }
  Graph g = load_graph(dir.string());
  CHECK(g.n == 3);
  CHECK(g.feature_dim() == 2);
  // line "0 1 0.5" means edge from v_0 into v_1's aggregation
  CHECK(g.adjacency.mat.get(1, 0) == 0.5);
  CHECK(g.adjacency.mat.get(2, 1) == 1.0);
  CHECK(g.labels[2] == kUnlabeled);
  CHECK(g.masks.train[0]);
  CHECK(g.masks.val[1]);
  CHECK(g.masks.test[2]);

  // structure export round-trip
  fs::path sp = dir / "structure.edges";
  save_structure(g.adjacency, sp.string());
  WeightedAdjacency back = load_structure(sp.string(), g.n);
  REQUIRE(back.mat.nnz() == g.adjacency.mat.nnz());
  for (std::size_t k = 0; k < back.mat.nnz(); ++k)
    CHECK(back.mat.value(k) ==
          doctest::Approx(g.adjacency.mat.value(k)).epsilon(1e-12));
  fs::remove_all(dir);
}
