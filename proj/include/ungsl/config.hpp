#ifndef UNGSL_CONFIG_HPP
#define UNGSL_CONFIG_HPP

#include <fstream>
#include <map>
#include <sstream>

#include "ungsl/graph_io.hpp"
#include "ungsl/gsl.hpp"
#include "ungsl/noise.hpp"
#include "ungsl/records.hpp"
#include "ungsl/sbm.hpp"

namespace ungsl {

/// A full run description parsed from a sectioned key = value file.
/// Every key has a default; unknown sections or keys are rejected.
///
/// Sections and keys (defaults in parentheses):
///   [run]      seed (0)
///   [dataset]  source (sbm) | path; path (empty);
///              n (500), classes (4), p_in (0.05), p_out (0.005),
///              feature_dim (16), signal (1.0),
///              train_frac (0.1), val_frac (0.1)
///   [gsl]      method (metric_knn | similarity_residual; metric_knn),
///              k (8), alpha (0.5), lambda (0.0),
///              reg_l1 (false), reg_smooth (false), encoder_width (16),
///              similarity (default | inner_product | cosine; default)
///   [ungsl]    tau (2.0), beta (0.1), eps_lr (0.01)
///   [train]    epochs (200), lr (0.01), weight_decay (0.0005),
///              dropout (0.5), hidden (64), patience (100)
///   [noise]    edge_add, edge_delete, feature_mask, label_flip
///              (levels in [0,1]; keys absent by default, applied in the
///              order listed here, all seeded from [run] seed)
struct RunConfig {
  std::uint64_t seed = 0;

  bool dataset_is_sbm = true;
  std::string dataset_path;
  SbmConfig sbm;

  GslConfig gsl;
  UnGslConfig ungsl;
  TrainConfig train;
  std::vector<NoiseSpec> noise;

  /// Materializes the dataset, then applies the noise list in file order.
  Graph load_dataset() const {
    Graph g = dataset_is_sbm ? generate_sbm(sbm) : load_graph(dataset_path);
    for (const NoiseSpec& s : noise) g = inject_noise(g, s);
    return g;
  }

  /// Fingerprint over everything but the seed, keys in a fixed order.
  std::uint64_t fingerprint() const {
    Fingerprint fp;
    fp.add("dataset.source", dataset_is_sbm ? "sbm" : "path");
    if (dataset_is_sbm) {
      fp.add("dataset.n", sbm.n)
          .add("dataset.classes", sbm.num_classes)
          .add("dataset.p_in", sbm.p_in)
          .add("dataset.p_out", sbm.p_out)
          .add("dataset.feature_dim", sbm.feature_dim)
          .add("dataset.signal", sbm.signal)
          .add("dataset.train_frac", sbm.train_frac)
          .add("dataset.val_frac", sbm.val_frac);
    } else {
      fp.add("dataset.path", dataset_path);
    }
    fp.add("gsl.method",
           gsl.method == GslMethod::kMetricKnn ? "metric_knn" : "similarity_residual")
        .add("gsl.k", gsl.k)
        .add("gsl.alpha", gsl.alpha)
        .add("gsl.lambda", gsl.lambda)
        .add("gsl.reg_l1", gsl.reg_l1)
        .add("gsl.reg_smooth", gsl.reg_smooth)
        .add("gsl.encoder_width", gsl.encoder_width)
        .add("gsl.similarity",
             !gsl.similarity ? "default"
             : *gsl.similarity == Similarity::kInnerProduct ? "inner_product"
                                                            : "cosine");
    fp.add("ungsl.tau", ungsl.tau)
        .add("ungsl.beta", ungsl.beta)
        .add("ungsl.eps_lr", ungsl.eps_lr);
    fp.add("train.epochs", train.epochs)
        .add("train.lr", train.lr)
        .add("train.weight_decay", train.weight_decay)
        .add("train.dropout", train.dropout)
        .add("train.hidden", train.hidden)
        .add("train.patience", train.patience);
    for (const NoiseSpec& s : noise)
      fp.add(std::string("noise.") + noise_kind_name(s.kind), s.level);
    return fp.value();
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct KeyValue {
  std::string section, key, value;
};

inline std::vector<KeyValue> parse_ini(std::istream& in, const std::string& name) {
  std::vector<KeyValue> out;
  std::string line, section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail(name + ":" + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(name + ":" + std::to_string(lineno) + ": expected key = value");
    out.push_back({section, trim(line.substr(0, eq)), trim(line.substr(eq + 1))});
  }
  return out;
}

template <typename T>
T parse_number(const std::string& value, const std::string& where) {
  std::istringstream is(value);
  T v;
  is >> v;
  if (is.fail() || !(is >> std::ws).eof())
    fail(where + ": cannot parse '" + value + "'");
  return v;
}

inline bool parse_bool(const std::string& value, const std::string& where) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  fail(where + ": expected a boolean, got '" + value + "'");
}

}  // namespace detail

inline RunConfig parse_run_config(std::istream& in, const std::string& name) {
  RunConfig cfg;
  for (const detail::KeyValue& kv : detail::parse_ini(in, name)) {
    const std::string where = name + ": [" + kv.section + "] " + kv.key;
    if (kv.section == "run") {
      if (kv.key == "seed")
        cfg.seed = detail::parse_number<std::uint64_t>(kv.value, where);
      else
        fail(where + ": unknown key");
    } else if (kv.section == "dataset") {
      if (kv.key == "source") {
        if (kv.value == "sbm")
          cfg.dataset_is_sbm = true;
        else if (kv.value == "path")
          cfg.dataset_is_sbm = false;
        else
          fail(where + ": expected sbm or path");
      } else if (kv.key == "path")
        cfg.dataset_path = kv.value;
      else if (kv.key == "n")
        cfg.sbm.n = detail::parse_number<std::size_t>(kv.value, where);
      else if (kv.key == "classes")
        cfg.sbm.num_classes = detail::parse_number<std::size_t>(kv.value, where);
      else if (kv.key == "p_in")
        cfg.sbm.p_in = detail::parse_number<double>(kv.value, where);
      else if (kv.key == "p_out")
        cfg.sbm.p_out = detail::parse_number<double>(kv.value, where);
      else if (kv.key == "feature_dim")
        cfg.sbm.feature_dim = detail::parse_number<std::size_t>(kv.value, where);
      else if (kv.key == "signal")
        cfg.sbm.signal = detail::parse_number<double>(kv.value, where);
      else if (kv.key == "train_frac")
        cfg.sbm.train_frac = detail::parse_number<double>(kv.value, where);
      else if (kv.key == "val_frac")
        cfg.sbm.val_frac = detail::parse_number<double>(kv.value, where);
      else
        fail(where + ": unknown key");
    } else if (kv.section == "gsl") {
      if (kv.key == "method") {
        if (kv.value == "metric_knn")
          cfg.gsl.method = GslMethod::kMetricKnn;
        else if (kv.value == "similarity_residual")
          cfg.gsl.method = GslMethod::kSimilarityResidual;
        else
          fail(where + ": expected metric_knn or similarity_residual");
      } else if (kv.key == "k")
        cfg.gsl.k = detail::parse_number<std::size_t>(kv.value, where);
      else if (kv.key == "alpha")
        cfg.gsl.alpha = detail::parse_number<double>(kv.value, where);
      else if (kv.key == "lambda")
        cfg.gsl.lambda = detail::parse_number<double>(kv.value, where);
      else if (kv.key == "reg_l1")
        cfg.gsl.reg_l1 = detail::parse_bool(kv.value, where);
      else if (kv.key == "reg_smooth")
        cfg.gsl.reg_smooth = detail::parse_bool(kv.value, where);
      else if (kv.key == "encoder_width")
        cfg.gsl.encoder_width = detail::parse_number<std::size_t>(kv.value, where);
      else if (kv.key == "similarity") {
        if (kv.value == "default")
          cfg.gsl.similarity.reset();
        else if (kv.value == "inner_product")
          cfg.gsl.similarity = Similarity::kInnerProduct;
        else if (kv.value == "cosine")
          cfg.gsl.similarity = Similarity::kCosine;
        else
          fail(where + ": expected default, inner_product or cosine");
      } else
        fail(where + ": unknown key");
    } else if (kv.section == "ungsl") {
      if (kv.key == "tau")
        cfg.ungsl.tau = detail::parse_number<double>(kv.value, where);
      else if (kv.key == "beta")
        cfg.ungsl.beta = detail::parse_number<double>(kv.value, where);
      else if (kv.key == "eps_lr")
        cfg.ungsl.eps_lr = detail::parse_number<double>(kv.value, where);
      else
        fail(where + ": unknown key");
    } else if (kv.section == "train") {
      if (kv.key == "epochs")
        cfg.train.epochs = detail::parse_number<std::size_t>(kv.value, where);
      else if (kv.key == "lr")
        cfg.train.lr = detail::parse_number<double>(kv.value, where);
      else if (kv.key == "weight_decay")
        cfg.train.weight_decay = detail::parse_number<double>(kv.value, where);
      else if (kv.key == "dropout")
        cfg.train.dropout = detail::parse_number<double>(kv.value, where);
      else if (kv.key == "hidden")
        cfg.train.hidden = detail::parse_number<std::size_t>(kv.value, where);
      else if (kv.key == "patience")
        cfg.train.patience = detail::parse_number<std::size_t>(kv.value, where);
      else
        fail(where + ": unknown key");
    } else if (kv.section == "noise") {
      NoiseSpec spec;
      if (kv.key == "edge_add")
        spec.kind = NoiseKind::kEdgeAdd;
      else if (kv.key == "edge_delete")
        spec.kind = NoiseKind::kEdgeDelete;
      else if (kv.key == "feature_mask")
        spec.kind = NoiseKind::kFeatureMask;
      else if (kv.key == "label_flip")
        spec.kind = NoiseKind::kLabelFlip;
      else
        fail(where + ": unknown key");
      spec.level = detail::parse_number<double>(kv.value, where);
      spec.validate();
      cfg.noise.push_back(spec);
    } else {
      fail(name + ": unknown section [" + kv.section + "]");
    }
  }
  cfg.train.seed = cfg.seed;
  cfg.sbm.seed = cfg.seed;
  for (NoiseSpec& s : cfg.noise) s.seed = cfg.seed;
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot read config file " + path);
  return parse_run_config(in, path);
}

}  // namespace ungsl

#endif  // UNGSL_CONFIG_HPP
