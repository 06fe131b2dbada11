#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <sstream>

#include "ungsl/experiments.hpp"

using namespace ungsl;

namespace {

std::size_t undirected_edge_count(const Graph& g) {
  std::size_t m = 0;
  for (const Triplet& t : g.adjacency.mat.to_triplets())
    if (t.row < t.col) ++m;
  return m;
}

}  // namespace

TEST_CASE("generate_sbm: p_out = 0 gives homophily exactly 1") {
  SbmConfig cfg;
  cfg.n = 100;
  cfg.num_classes = 4;
  cfg.p_in = 0.2;
  cfg.p_out = 0.0;
  cfg.seed = 1;
  Graph g = generate_sbm(cfg);
  CHECK(empirical_homophily(g) == 1.0);
  CHECK(cfg.analytic_homophily() == 1.0);
}

TEST_CASE("generate_sbm: signal carries the only class dependence") {
  SbmConfig a;
  a.n = 40;
  a.num_classes = 2;
  a.p_in = 0.2;
  a.p_out = 0.05;
  a.feature_dim = 5;
  a.signal = 0.0;
  a.seed = 9;
  SbmConfig b = a;
  b.signal = 2.0;
  Graph ga = generate_sbm(a), gb = generate_sbm(b);
  // same seed: identical noise draws, so the difference is exactly
  // signal * prototype(label), i.e. constant within each class
  DenseMatrix diff(40, 5);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t d = 0; d < 5; ++d)
      diff(i, d) = gb.features(i, d) - ga.features(i, d);
  for (std::size_t i = 2; i < 40; ++i) {
    const std::size_t ref = static_cast<std::size_t>(ga.labels[i]);
    for (std::size_t d = 0; d < 5; ++d)
      CHECK(diff(i, d) == doctest::Approx(diff(ref, d)).epsilon(1e-12));
  }
}

TEST_CASE("generate_sbm: empirical homophily within 0.05 of analytic, 10 seeds") {
  SbmConfig cfg;
  cfg.n = 500;
  cfg.num_classes = 4;
  cfg.p_in = 0.05;
  cfg.p_out = 0.005;
  cfg.signal = 1.0;
  const double h = cfg.analytic_homophily();
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    cfg.seed = seed;
    Graph g = generate_sbm(cfg);
    CHECK(std::fabs(empirical_homophily(g) - h) <= 0.05);
  }
}

TEST_CASE("generate_sbm: stratified 10/10/80 split") {
  SbmConfig cfg;
  cfg.n = 200;
  cfg.num_classes = 4;
  cfg.p_in = 0.1;
  cfg.p_out = 0.01;
  cfg.seed = 3;
  Graph g = generate_sbm(cfg);
  CHECK(mask_indices(g.masks.train).size() == 20);
  CHECK(mask_indices(g.masks.val).size() == 20);
  CHECK(mask_indices(g.masks.test).size() == 160);
  for (std::size_t c = 0; c < 4; ++c) {
    std::size_t in_train = 0;
    for (std::size_t i : mask_indices(g.masks.train))
      if (g.labels[i] == static_cast<int>(c)) ++in_train;
    CHECK(in_train == 5);
  }
}

TEST_CASE("inject_noise: level 0 is a bit-identical copy") {
  SbmConfig cfg;
  cfg.n = 50;
  cfg.num_classes = 2;
  cfg.p_in = 0.2;
  cfg.p_out = 0.05;
  cfg.seed = 2;
  Graph g = generate_sbm(cfg);
  for (NoiseKind kind : {NoiseKind::kEdgeAdd, NoiseKind::kEdgeDelete,
                         NoiseKind::kFeatureMask, NoiseKind::kLabelFlip}) {
    Graph h = inject_noise(g, {kind, 0.0, 7});
    CHECK(h.adjacency.mat.nnz() == g.adjacency.mat.nnz());
    for (std::size_t i = 0; i < g.features.size(); ++i)
      CHECK(h.features.data()[i] == g.features.data()[i]);
    CHECK(h.labels == g.labels);
  }
}

TEST_CASE("inject_noise: exact floor counts for every kind") {
  SbmConfig cfg;
  cfg.n = 50;
  cfg.num_classes = 2;
  cfg.p_in = 0.25;
  cfg.p_out = 0.05;
  cfg.feature_dim = 20;  // 1000 feature entries
  cfg.seed = 5;
  Graph g = generate_sbm(cfg);
  const std::size_t m = undirected_edge_count(g);

  Graph del = inject_noise(g, {NoiseKind::kEdgeDelete, 0.2, 11});
  CHECK(undirected_edge_count(del) ==
        m - static_cast<std::size_t>(0.2 * static_cast<double>(m)));

  Graph add = inject_noise(g, {NoiseKind::kEdgeAdd, 0.3, 11});
  CHECK(undirected_edge_count(add) ==
        m + static_cast<std::size_t>(0.3 * static_cast<double>(m)));

  Graph masked = inject_noise(g, {NoiseKind::kFeatureMask, 0.4, 11});
  std::size_t changed = 0;
  for (std::size_t i = 0; i < g.features.size(); ++i)
    if (masked.features.data()[i] != g.features.data()[i]) {
      CHECK(masked.features.data()[i] == 0.0);
      ++changed;
    }
  CHECK(changed == 400);  // exactly floor(0.4 * 1000); entries were nonzero

  Graph flipped = inject_noise(g, {NoiseKind::kLabelFlip, 0.5, 11});
  std::size_t flips = 0;
  for (std::size_t i = 0; i < g.n; ++i) {
    if (flipped.labels[i] != g.labels[i]) {
      CHECK(g.masks.train[i]);  // only training labels move
      CHECK(flipped.labels[i] >= 0);
      CHECK(flipped.labels[i] < 2);
      ++flips;
    }
  }
  CHECK(flips == mask_indices(g.masks.train).size() / 2);
}

TEST_CASE("inject_noise: deterministic per seed, n preserved, m monotone") {
  SbmConfig cfg;
  cfg.n = 60;
  cfg.num_classes = 3;
  cfg.p_in = 0.2;
  cfg.p_out = 0.04;
  cfg.seed = 8;
  Graph g = generate_sbm(cfg);
  Graph a = inject_noise(g, {NoiseKind::kEdgeAdd, 0.25, 13});
  Graph b = inject_noise(g, {NoiseKind::kEdgeAdd, 0.25, 13});
  CHECK(a.adjacency.mat.nnz() == b.adjacency.mat.nnz());
  auto ta = a.adjacency.mat.to_triplets(), tb = b.adjacency.mat.to_triplets();
  for (std::size_t k = 0; k < ta.size(); ++k) {
    CHECK(ta[k].row == tb[k].row);
    CHECK(ta[k].col == tb[k].col);
  }
  CHECK(a.n == g.n);
  CHECK(undirected_edge_count(a) >= undirected_edge_count(g));
  Graph d = inject_noise(g, {NoiseKind::kEdgeDelete, 0.5, 13});
  CHECK(d.n == g.n);
  CHECK(undirected_edge_count(d) <= undirected_edge_count(g));
}

TEST_CASE("inject_noise: edge_add on a near-complete graph is rejected") {
  std::vector<Triplet> ts;
  const std::size_t n = 6;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) ts.push_back({i, j, 1.0});
  Graph g;
  g.n = n;
  g.num_classes = 2;
  g.adjacency = adjacency_from_triplets(n, std::move(ts), true);
  g.features = DenseMatrix(n, 2, 1.0);
  g.labels.assign(n, 0);
  g.masks = SplitMasks::empty(n);
  CHECK_THROWS_AS(inject_noise(g, {NoiseKind::kEdgeAdd, 0.5, 1}),
                  std::runtime_error);
}

TEST_CASE("prune: ratio bounds, floor counts, minimum degree one") {
  // star: node 0 has 5 in-neighbors, nodes 1..5 have one each
  std::vector<Triplet> ts;
  for (std::size_t j = 1; j <= 5; ++j) {
    ts.push_back({0, j, 1.0});
    ts.push_back({j, 0, 1.0});
  }
  Graph g;
  g.n = 6;
  g.num_classes = 2;
  g.adjacency = adjacency_from_triplets(6, std::move(ts), true);
  g.features = DenseMatrix(6, 2, 1.0);
  g.labels.assign(6, 0);
  g.masks = SplitMasks::empty(6);
  std::vector<double> u = {0.0, 0.5, 0.4, 0.3, 0.2, 0.1};

  CHECK_THROWS_AS(prune_in_neighbors(g, u, 1.0, true, 0), std::runtime_error);

  // ratio 0.5 on degree 5: floor(2.5) = 2 removed from node 0's row;
  // degree-1 rows keep their only neighbor
  Graph p = prune_in_neighbors(g, u, 0.5, true, 0);
  std::size_t deg0 = 0;
  for (std::size_t k = p.adjacency.mat.row_begin(0);
       k < p.adjacency.mat.row_end(0); ++k)
    ++deg0;
  CHECK(deg0 == 3);
  // the two highest-entropy in-neighbors (1 and 2) are gone
  CHECK(p.adjacency.mat.find(0, 1) == SparseMatrix::npos);
  CHECK(p.adjacency.mat.find(0, 2) == SparseMatrix::npos);
  CHECK(p.adjacency.mat.find(0, 3) != SparseMatrix::npos);
  for (std::size_t j = 1; j <= 5; ++j)
    CHECK(p.adjacency.mat.find(j, 0) != SparseMatrix::npos);

  // ratio 0.9 would strip the whole row; one in-neighbor must survive
  Graph q = prune_in_neighbors(g, u, 0.9, true, 0);
  CHECK(q.adjacency.mat.find(0, 5) != SparseMatrix::npos);
  std::size_t deg0q = q.adjacency.mat.row_end(0) - q.adjacency.mat.row_begin(0);
  CHECK(deg0q == 1);
}

TEST_CASE("prune_experiment: ratio 0 equals a direct training run") {
  SbmConfig cfg;
  cfg.n = 60;
  cfg.num_classes = 2;
  cfg.p_in = 0.2;
  cfg.p_out = 0.05;
  cfg.signal = 2.0;
  cfg.seed = 4;
  Graph g = generate_sbm(cfg);
  TrainConfig tcfg;
  tcfg.epochs = 20;
  tcfg.hidden = 8;

  PruneCurve curve = prune_experiment(g, {0.0}, {21}, tcfg);
  TrainConfig direct = tcfg;
  direct.seed = 21;
  const double expect = train_gcn_on(g, g.adjacency, direct).test_acc;
  CHECK(curve.guided[0] == expect);
  CHECK(curve.random[0] == expect);

  const std::string path = "/tmp/ungsl_test_prune.csv";
  curve.save_csv(path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "ratio,entropy_guided,random");
}

TEST_CASE("quantile_thresholds: q = 0 all smooth, q = 1 all constant") {
  std::vector<Triplet> ts = {{0, 1, 1.0}, {0, 2, 1.0}, {1, 0, 1.0},
                             {2, 0, 1.0}, {0, 0, 1.0}};
  WeightedAdjacency s;
  s.mat = SparseMatrix::from_triplets(3, 3, std::move(ts));
  UncertaintyVector u = UncertaintyVector::from_entropy({0.2, 0.8, 1.4});

  std::vector<double> lo = quantile_thresholds(s, u, 0.0);
  for (std::size_t i = 0; i < 3; ++i) CHECK(lo[i] == 0.0);

  std::vector<double> hi = quantile_thresholds(s, u, 1.0);
  CHECK(hi[0] > u.c[1]);
  CHECK(hi[0] > u.c[2]);
  CHECK(hi[1] > u.c[0]);

  // midpoint: with q = 0.5 on node 0's two in-neighbors (c_1, c_2 sorted),
  // the threshold separates them
  std::vector<double> mid = quantile_thresholds(s, u, 0.5);
  const double c1 = u.c[1], c2 = u.c[2];
  CHECK(mid[0] > std::min(c1, c2));
  CHECK(mid[0] < std::max(c1, c2));

  CHECK_THROWS_AS(quantile_thresholds(s, u, 1.5), std::runtime_error);
}

TEST_CASE("ablations: fixed epsilon and symmetrization records") {
  SbmConfig cfg;
  cfg.n = 50;
  cfg.num_classes = 2;
  cfg.p_in = 0.2;
  cfg.p_out = 0.05;
  cfg.signal = 1.5;
  cfg.seed = 6;
  Graph g = generate_sbm(cfg);
  GslConfig gcfg;
  gcfg.k = 4;
  TrainConfig tcfg;
  tcfg.epochs = 15;
  tcfg.hidden = 8;
  tcfg.seed = 6;

  AblationRecord fixed = ablation_fixed_epsilon(g, gcfg, UnGslConfig{}, tcfg, 0.5);
  CHECK(fixed.name == "fixed_epsilon");
  CHECK(fixed.standard_acc >= 0.0);
  CHECK(fixed.variant_acc >= 0.0);
  // pinned thresholds come back verbatim on a rerun
  AblationRecord again = ablation_fixed_epsilon(g, gcfg, UnGslConfig{}, tcfg, 0.5);
  CHECK(again.variant_run.thresholds == fixed.variant_run.thresholds);
  CHECK_THROWS_AS(ablation_fixed_epsilon(g, gcfg, UnGslConfig{}, tcfg, 1.2),
                  std::runtime_error);

  AblationRecord sym = ablation_symmetrize(g, gcfg, UnGslConfig{}, tcfg);
  // the symmetrized export has no asymmetric pair
  const WeightedAdjacency& s = sym.variant_run.exported;
  for (const Triplet& t : s.mat.to_triplets()) {
    const std::size_t kb = s.mat.find(t.col, t.row);
    REQUIRE(kb != SparseMatrix::npos);
    CHECK(s.mat.value(kb) == doctest::Approx(t.value).epsilon(1e-12));
  }
}

TEST_CASE("sweep: single value equals one pipeline run") {
  RunConfig cfg;
  cfg.sbm.n = 40;
  cfg.sbm.num_classes = 2;
  cfg.sbm.p_in = 0.25;
  cfg.sbm.p_out = 0.05;
  cfg.sbm.signal = 2.0;
  cfg.gsl.k = 3;
  cfg.train.epochs = 10;
  cfg.train.hidden = 8;

  SweepSeries series = sweep(SweepParam::kTau, {2.0}, cfg, {17});
  REQUIRE(series.points.size() == 1);
  CHECK(series.points[0].enhanced_acc.count == 1);
  CHECK(series.points[0].enhanced_acc.stddev == 0.0);

  cfg.seed = 17;
  cfg.sbm.seed = 17;
  cfg.train.seed = 17;
  Graph g = cfg.load_dataset();
  PipelineResult direct = run_pipeline(g, cfg.gsl, cfg.ungsl, cfg.train);
  CHECK(series.points[0].enhanced_acc.mean == direct.enhanced_report.test_acc);
  CHECK(series.points[0].base_acc.mean == direct.base_report.test_acc);

  const std::string path = "/tmp/ungsl_test_sweep.csv";
  series.save_csv(path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "tau,base_mean,base_std,ungsl_mean,ungsl_std,seeds");
}

TEST_CASE("records: fingerprint stability and seed independence") {
  RunConfig a;
  RunConfig b;
  CHECK(a.fingerprint() == b.fingerprint());
  b.seed = 999;
  CHECK(a.fingerprint() == b.fingerprint());  // seed excluded
  b.ungsl.beta = 0.2;
  CHECK(a.fingerprint() != b.fingerprint());
  RunConfig c;
  c.noise.push_back({NoiseKind::kEdgeAdd, 0.3, 0});
  CHECK(a.fingerprint() != c.fingerprint());
}

TEST_CASE("records: jsonl round trip and grouped statistics") {
  const std::string path = "/tmp/ungsl_test_runs.jsonl";
  std::remove(path.c_str());
  std::vector<double> accs = {0.8, 0.85, 0.9};
  for (std::size_t s = 0; s < accs.size(); ++s) {
    ExperimentRecord rec;
    rec.fingerprint = 42;
    rec.seed = s;
    rec.metrics["test_acc"] = accs[s];
    rec.timings_seconds["stage1"] = 1.0;
    rec.artifacts.push_back("structure.edges");
    append_record(rec, path);
  }
  std::vector<ExperimentRecord> recs = load_records(path);
  REQUIRE(recs.size() == 3);
  CHECK(recs[1].metrics.at("test_acc") == 0.85);
  CHECK(recs[2].artifacts[0] == "structure.edges");

  auto grouped = group_records(recs);
  REQUIRE(grouped.count(42) == 1);
  const MetricSummary& s = grouped[42]["test_acc"];
  CHECK(s.count == 3);
  CHECK(s.mean == doctest::Approx(0.85).epsilon(1e-12));
  // population std of {0.8, 0.85, 0.9}
  CHECK(s.stddev == doctest::Approx(std::sqrt(0.0025 / 1.5)).epsilon(1e-9));
}

TEST_CASE("records: malformed line is reported with its position") {
  const std::string path = "/tmp/ungsl_test_bad.jsonl";
  std::ofstream out(path);
  out << "{\"fingerprint\":1,\"seed\":0,\"metrics\":{},\"timings_seconds\":{},"
         "\"artifacts\":[]}\n";
  out << "not json\n";
  out.close();
  CHECK_THROWS_WITH_AS(load_records(path), doctest::Contains(":2"),
                       std::runtime_error);
}

TEST_CASE("config: defaults, parsing, unknown keys rejected") {
  std::istringstream ok(R"(
# comment
[run]
seed = 7

[dataset]
n = 64
classes = 2
p_in = 0.2

[gsl]
method = similarity_residual
k = 5
reg_l1 = true

[ungsl]
beta = 0.05

[train]
epochs = 33

[noise]
edge_add = 0.25
label_flip = 0.1
)");
  RunConfig cfg = parse_run_config(ok, "<test>");
  CHECK(cfg.seed == 7);
  CHECK(cfg.sbm.n == 64);
  CHECK(cfg.sbm.num_classes == 2);
  CHECK(cfg.sbm.p_out == 0.005);  // default untouched
  CHECK(cfg.gsl.method == GslMethod::kSimilarityResidual);
  CHECK(cfg.gsl.k == 5);
  CHECK(cfg.gsl.reg_l1);
  CHECK(cfg.ungsl.beta == 0.05);
  CHECK(cfg.train.epochs == 33);
  CHECK(cfg.train.seed == 7);  // master seed propagates
  REQUIRE(cfg.noise.size() == 2);
  CHECK(cfg.noise[0].kind == NoiseKind::kEdgeAdd);
  CHECK(cfg.noise[1].kind == NoiseKind::kLabelFlip);
  CHECK(cfg.noise[1].seed == 7);

  std::istringstream unknown_key("[train]\nepoochs = 10\n");
  CHECK_THROWS_WITH_AS(parse_run_config(unknown_key, "<t>"),
                       doctest::Contains("unknown key"), std::runtime_error);
  std::istringstream unknown_section("[training]\nepochs = 10\n");
  CHECK_THROWS_WITH_AS(parse_run_config(unknown_section, "<t>"),
                       doctest::Contains("unknown section"), std::runtime_error);
  std::istringstream bad_value("[train]\nepochs = ten\n");
  CHECK_THROWS_AS(parse_run_config(bad_value, "<t>"), std::runtime_error);
  std::istringstream bad_line("[train]\nepochs\n");
  CHECK_THROWS_AS(parse_run_config(bad_line, "<t>"), std::runtime_error);
}

TEST_CASE("overhead_report: psi identity and populated points at two sizes") {
  RunConfig cfg;
  cfg.sbm.num_classes = 2;
  cfg.sbm.p_in = 0.15;
  cfg.sbm.p_out = 0.03;
  cfg.sbm.signal = 2.0;
  cfg.gsl.k = 3;
  cfg.train.epochs = 5;
  cfg.train.hidden = 8;
  OverheadReport rep = overhead_report(cfg, {40, 80});
  REQUIRE(rep.points.size() == 2);
  for (const OverheadPoint& p : rep.points) {
    CHECK(p.m_offdiag > 0);
    CHECK(p.base_seconds > 0.0);
    CHECK(p.enhanced_seconds > 0.0);
    CHECK(p.reweight_seconds > 0.0);
  }
  CHECK(rep.points[1].m_offdiag > rep.points[0].m_offdiag);
  CHECK_THROWS_AS(overhead_report(cfg, {40}), std::runtime_error);
}
