#ifndef UNGSL_PIPELINE_HPP
#define UNGSL_PIPELINE_HPP

#include "ungsl/gsl.hpp"

namespace ungsl {

struct PipelineOptions {
  bool attach_ungsl = true;
  bool symmetrize_each_epoch = false;
  /// When in [0, 1], thresholds are pinned to the per-node confidence
  /// quantile at this fraction instead of being learned.
  double fixed_eps_fraction = -1.0;
};

struct PipelineResult {
  TrainReport base_report;
  TrainReport enhanced_report;
  WeightedAdjacency exported;
  UncertaintyVector uncertainty;
  std::vector<double> thresholds;
  double stage1_seconds = 0.0;
  double stage3_seconds = 0.0;
  std::size_t psi_evals = 0;
};

/// Per-node threshold at the given quantile of in-neighbor confidences:
/// floor(q·deg) in-neighbors fall on the constant branch. q = 0 puts every
/// edge on the smooth branch, q = 1 every non-self edge on the constant one.
inline std::vector<double> quantile_thresholds(const WeightedAdjacency& s,
                                               const UncertaintyVector& u,
                                               double q) {
  require(q >= 0.0 && q <= 1.0, "quantile_thresholds: fraction outside [0, 1]");
  std::vector<double> eps(s.n(), 0.0);
  for (std::size_t i = 0; i < s.n(); ++i) {
    std::vector<double> conf;
    for (std::size_t k = s.mat.row_begin(i); k < s.mat.row_end(i); ++k)
      if (s.mat.col(k) != i) conf.push_back(u.c[s.mat.col(k)]);
    if (conf.empty()) continue;
    std::sort(conf.begin(), conf.end());
    const std::size_t t =
        static_cast<std::size_t>(q * static_cast<double>(conf.size()));
    if (t == 0)
      eps[i] = 0.0;
    else if (t >= conf.size())
      eps[i] = conf.back() + 1.0;
    else
      eps[i] = 0.5 * (conf[t - 1] + conf[t]);
  }
  return eps;
}

/// The pretrain -> estimate -> re-train -> export pipeline. All stages
/// are seeded from the one master seed in the train config; stage 3
/// re-trains from fresh random weights with the frozen uncertainty.
inline PipelineResult run_pipeline(const Graph& graph, const GslConfig& gsl_cfg,
                                   const UnGslConfig& ungsl_cfg,
                                   const TrainConfig& tcfg,
                                   const PipelineOptions& opts = {}) {
  PipelineResult r;
  auto stage = [](int num, const char* label, auto&& fn) {
    try {
      fn();
    } catch (const std::exception& e) {
      fail("pipeline stage " + std::to_string(num) + " (" + label +
           ") failed: " + e.what());
    }
  };

  StructureLearner base(gsl_cfg, graph);
  stage(1, "base training", [&] { r.base_report = base.train(graph, tcfg); });
  r.stage1_seconds = r.base_report.wall_seconds;

  stage(2, "uncertainty estimation",
        [&] { r.uncertainty = pretrain_uncertainty(base); });

  if (!opts.attach_ungsl) {
    r.enhanced_report = r.base_report;
    r.exported = base.export_structure();
    r.stage3_seconds = r.stage1_seconds;
    return r;
  }

  StructureLearner enhanced(gsl_cfg, graph);
  stage(3, "re-training", [&] {
    ThresholdVector eps;
    bool learn = true;
    if (opts.fixed_eps_fraction >= 0.0) {
      eps = ThresholdVector::fixed(quantile_thresholds(
          base.export_structure(), r.uncertainty, opts.fixed_eps_fraction));
      learn = false;
    } else {
      std::mt19937_64 eps_rng = make_rng(tcfg.seed, "epsilon-init");
      eps = ThresholdVector::init_uniform(graph.n, eps_rng);
    }
    enhanced.attach(r.uncertainty, ungsl_cfg, std::move(eps), learn);
    enhanced.set_symmetrize_each_epoch(opts.symmetrize_each_epoch);
    r.enhanced_report = enhanced.train(graph, tcfg);
  });
  r.stage3_seconds = r.enhanced_report.wall_seconds;

  stage(4, "export", [&] {
    r.exported = enhanced.export_structure();
    r.thresholds = enhanced.learned_thresholds_flat();
    r.psi_evals = enhanced.last_psi_evals();
  });
  return r;
}

/// Sidecar CSV beside an exported structure: per node, its frozen
/// uncertainty and the learned threshold.
inline void save_pipeline_sidecar(const PipelineResult& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail("cannot write " + path);
  out.precision(17);
  out << "node,entropy,confidence,epsilon\n";
  for (std::size_t i = 0; i < r.uncertainty.size(); ++i)
    out << i << ',' << r.uncertainty.u[i] << ',' << r.uncertainty.c[i] << ','
        << (i < r.thresholds.size() ? r.thresholds[i] : 0.0) << '\n';
}

}  // namespace ungsl

#endif  // UNGSL_PIPELINE_HPP
