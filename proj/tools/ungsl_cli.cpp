// ungsl: command-line front end for the structure-learning pipeline.
//
// Subcommands:
//   train       run the pretrain / estimate / re-train / export pipeline
//   verify      randomized checks of the proven bounds and the entropy link
//   experiment  pruning curves, robustness grids, sweeps, ablations, overhead
//   report      aggregate runs.jsonl into mean +/- std comparison tables
//
// Exit codes: 0 success, 2 configuration or precondition error,
// 3 training divergence, 4 proven-bound violation.
//
// The default output directory is taken from UNGSL_OUT_DIR when set.

#include <cstdlib>
#include <filesystem>
#include <future>
#include <iomanip>
#include <iostream>
#include <mutex>

#include <CLI11.hpp>

#include "ungsl/experiments.hpp"
#include "ungsl/theory.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kDivergence = 3;
constexpr int kBoundViolation = 4;

int classify(const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  return std::string(e.what()).find("divergence") != std::string::npos
             ? kDivergence
             : kConfigError;
}

std::string default_out_dir() {
  const char* env = std::getenv("UNGSL_OUT_DIR");
  return env && *env ? env : ".";
}

std::filesystem::path ensure_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  std::filesystem::create_directories(p);
  return p;
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, std::size_t count) {
  std::vector<std::uint64_t> s(count);
  for (std::size_t i = 0; i < count; ++i) s[i] = base + i;
  return s;
}

void reseed(ungsl::RunConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.sbm.seed = seed;
  cfg.train.seed = seed;
  for (ungsl::NoiseSpec& n : cfg.noise) n.seed = seed;
}

/// Runs fn(seed) for every seed with at most `jobs` in flight.
template <typename Fn>
void for_each_seed(const std::vector<std::uint64_t>& seeds, std::size_t jobs, Fn fn) {
  if (jobs <= 1) {
    for (std::uint64_t s : seeds) fn(s);
    return;
  }
  std::vector<std::future<void>> inflight;
  for (std::uint64_t s : seeds) {
    if (inflight.size() >= jobs) {
      inflight.front().get();
      inflight.erase(inflight.begin());
    }
    inflight.push_back(std::async(std::launch::async, [fn, s] { fn(s); }));
  }
  for (auto& f : inflight) f.get();
}

ungsl::ExperimentRecord pipeline_record(const ungsl::RunConfig& cfg,
                                        const ungsl::PipelineResult& r,
                                        bool attached) {
  ungsl::Fingerprint fp;
  fp.add("config", cfg.fingerprint()).add("ungsl", attached ? "on" : "off");
  ungsl::ExperimentRecord rec;
  rec.fingerprint = fp.value();
  rec.seed = cfg.seed;
  rec.metrics["base_val_acc"] = r.base_report.best_val_acc;
  rec.metrics["base_test_acc"] = r.base_report.test_acc;
  rec.timings_seconds["stage1_seconds"] = r.stage1_seconds;
  if (attached) {
    rec.metrics["ungsl_val_acc"] = r.enhanced_report.best_val_acc;
    rec.metrics["ungsl_test_acc"] = r.enhanced_report.test_acc;
    rec.metrics["psi_evals"] = static_cast<double>(r.psi_evals);
    rec.timings_seconds["stage3_seconds"] = r.stage3_seconds;
  }
  return rec;
}

// ---------------------------------------------------------------- train

int cmd_train(const std::string& config_path, bool attach, const std::string& out) {
  ungsl::RunConfig cfg = ungsl::load_run_config(config_path);
  ungsl::Graph g = cfg.load_dataset();
  ungsl::PipelineOptions opts;
  opts.attach_ungsl = attach;
  ungsl::PipelineResult r =
      ungsl::run_pipeline(g, cfg.gsl, cfg.ungsl, cfg.train, opts);

  const std::filesystem::path dir = ensure_dir(out);
  const std::string structure = (dir / "structure.edges").string();
  const std::string uncert = (dir / "uncertainty.csv").string();
  ungsl::save_structure(r.exported, structure);
  r.uncertainty.save_csv(uncert);

  ungsl::ExperimentRecord rec = pipeline_record(cfg, r, attach);
  rec.artifacts = {structure, uncert};
  if (attach) {
    const std::string sidecar = (dir / "thresholds.csv").string();
    ungsl::save_pipeline_sidecar(r, sidecar);
    rec.artifacts.push_back(sidecar);
  }
  ungsl::append_record(rec, (dir / "runs.jsonl").string());

  std::cout << "seed " << cfg.seed << "  base test acc " << std::fixed
            << std::setprecision(4) << r.base_report.test_acc;
  if (attach) std::cout << "  ungsl test acc " << r.enhanced_report.test_acc;
  std::cout << "\nartifacts in " << dir.string() << "\n";
  return kOk;
}

// ---------------------------------------------------------------- verify

int cmd_verify_prop1(std::size_t instances, const std::string& out) {
  std::mt19937_64 rng = ungsl::make_rng(0, "verify-prop1");
  double min_slack = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < instances; ++t) {
    ungsl::SbmConfig sc;
    sc.n = 5 + static_cast<std::size_t>(rng() % 46);
    sc.num_classes = 2 + static_cast<std::size_t>(rng() % 7);
    if (sc.n < sc.num_classes) sc.n = sc.num_classes;
    sc.p_in = 0.3;
    sc.p_out = 0.1;
    sc.feature_dim = 4 + static_cast<std::size_t>(rng() % 8);
    sc.seed = rng();
    ungsl::Graph g = ungsl::generate_sbm(sc);
    ungsl::DenseMatrix w =
        ungsl::glorot_init(g.feature_dim(), g.num_classes, rng);
    ungsl::Prop1Report rep = ungsl::check_prop1(g, w);
    min_slack = std::min(min_slack, rep.min_slack);

    // the mixing coefficients must stay a convex combination
    ungsl::WeightedAdjacency a_norm =
        ungsl::normalize(g.adjacency, ungsl::NormMode::kRow, true);
    ungsl::DenseMatrix o_prime =
        ungsl::rescale_logits(ungsl::matmul(g.features, w));
    for (std::size_t i = 0; i < g.n; ++i) {
      ungsl::EtaCoefficients eta = ungsl::compute_eta(a_norm.mat, i, o_prime);
      for (double e : eta.eta)
        if (!(e > 0.0 && e < 1.0 + 1e-12)) {
          std::cerr << "eta outside (0,1) at node " << i << "\n";
          return kBoundViolation;
        }
      if (std::fabs(eta.sum() - 1.0) > 1e-9) {
        std::cerr << "eta sum " << eta.sum() << " at node " << i << "\n";
        return kBoundViolation;
      }
    }
    if (t == 0) rep.save_csv((ensure_dir(out) / "prop1.csv").string());
  }
  std::cout << "prop1: " << instances << " instances, min slack " << min_slack
            << "\n";
  if (min_slack < -1e-9) {
    std::cerr << "bound violated\n";
    return kBoundViolation;
  }
  return kOk;
}

int cmd_verify_logsum(std::size_t trials) {
  std::mt19937_64 rng = ungsl::make_rng(0, "verify-logsum");
  std::uniform_real_distribution<double> ua(0.0, 2.0), ub(0.05, 2.0);
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t d = 1 + static_cast<std::size_t>(rng() % 16);
    std::vector<double> a(d), b(d);
    for (std::size_t i = 0; i < d; ++i) {
      a[i] = (t % 7 == 0 && i == 0) ? 0.0 : ua(rng);
      b[i] = ub(rng);
    }
    ungsl::LogSumResult r = ungsl::log_sum_oracle(a, b);
    if (!r.holds) {
      std::cerr << "log-sum inequality violated at trial " << t << " (lhs "
                << r.lhs << " rhs " << r.rhs << ")\n";
      return kBoundViolation;
    }
  }
  std::cout << "logsum: " << trials << " trials, all hold\n";
  return kOk;
}

int cmd_verify_correlation(const std::string& config_path, const std::string& out) {
  ungsl::RunConfig cfg;
  if (!config_path.empty()) cfg = ungsl::load_run_config(config_path);
  ungsl::Graph g = cfg.load_dataset();
  ungsl::DenseMatrix w = ungsl::train_linear_classifier(g, 100, 0.05, cfg.seed);
  ungsl::CorrelationReport rep = ungsl::entropy_correlation(g, w);
  if (rep.degenerate) {
    std::cerr << "correlation degenerate: constant entropies\n";
    return kConfigError;
  }
  rep.save_csv((ensure_dir(out) / "correlation.csv").string());
  std::cout << "correlation: pearson r " << rep.pearson_r << " over " << g.n
            << " nodes\n";
  return kOk;
}

// ------------------------------------------------------------ experiment

int cmd_experiment_prune(ungsl::RunConfig cfg, std::vector<double> ratios,
                         std::size_t num_seeds, const std::string& out) {
  if (ratios.empty()) ratios = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  ungsl::Graph g = cfg.load_dataset();
  ungsl::PruneCurve curve = ungsl::prune_experiment(
      g, ratios, seed_range(cfg.seed, num_seeds), cfg.train);
  const std::filesystem::path dir = ensure_dir(out);
  curve.save_csv((dir / "prune.csv").string());

  ungsl::Fingerprint fp;
  fp.add("config", cfg.fingerprint()).add("protocol", "prune");
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    ungsl::ExperimentRecord rec;
    rec.fingerprint = fp.value();
    rec.seed = cfg.seed;
    rec.metrics["ratio"] = ratios[i];
    rec.metrics["guided_acc"] = curve.guided[i];
    rec.metrics["random_acc"] = curve.random[i];
    rec.artifacts = {(dir / "prune.csv").string()};
    ungsl::append_record(rec, (dir / "runs.jsonl").string());
    std::cout << "ratio " << ratios[i] << "  guided " << curve.guided[i]
              << "  random " << curve.random[i] << "\n";
  }
  return kOk;
}

int cmd_experiment_robustness(const ungsl::RunConfig& base, std::vector<double> levels,
                              std::size_t num_seeds, std::size_t jobs,
                              const std::string& out) {
  if (levels.empty()) levels = {0.0, 0.1, 0.2, 0.3, 0.4};
  const std::filesystem::path dir = ensure_dir(out);
  const std::string records = (dir / "runs.jsonl").string();
  std::ofstream csv(dir / "robustness.csv");
  csv.precision(17);
  csv << "level,base_mean,base_std,ungsl_mean,ungsl_std,seeds\n";

  std::mutex mu;
  for (double level : levels) {
    ungsl::RunConfig cfg = base;
    if (cfg.noise.empty())
      cfg.noise.push_back({ungsl::NoiseKind::kEdgeAdd, 0.0, 0});
    for (ungsl::NoiseSpec& n : cfg.noise) n.level = level;

    std::vector<double> base_accs, enh_accs;
    for_each_seed(seed_range(base.seed, num_seeds), jobs, [&](std::uint64_t s) {
      ungsl::RunConfig run = cfg;
      reseed(run, s);
      ungsl::Graph g = run.load_dataset();
      ungsl::PipelineResult r =
          ungsl::run_pipeline(g, run.gsl, run.ungsl, run.train);
      std::lock_guard<std::mutex> lock(mu);
      base_accs.push_back(r.base_report.test_acc);
      enh_accs.push_back(r.enhanced_report.test_acc);
      ungsl::append_record(pipeline_record(run, r, true), records);
    });
    ungsl::MetricSummary b = ungsl::summarize(base_accs);
    ungsl::MetricSummary e = ungsl::summarize(enh_accs);
    csv << level << ',' << b.mean << ',' << b.stddev << ',' << e.mean << ','
        << e.stddev << ',' << e.count << '\n';
    std::cout << "level " << level << "  base " << b.mean << " +/- " << b.stddev
              << "  ungsl " << e.mean << " +/- " << e.stddev << "\n";
  }
  return kOk;
}

int cmd_experiment_sweep(const ungsl::RunConfig& cfg, const std::string& param,
                         std::vector<double> values, std::size_t num_seeds,
                         const std::string& out) {
  ungsl::SweepParam p;
  if (param == "beta") {
    p = ungsl::SweepParam::kBeta;
    if (values.empty()) values = {0.01, 0.1, 1.0};
  } else if (param == "tau") {
    p = ungsl::SweepParam::kTau;
    if (values.empty()) values = {1.0, 2.0, 3.0};
  } else if (param == "level") {
    p = ungsl::SweepParam::kNoiseLevel;
    if (values.empty()) values = {0.0, 0.2, 0.4};
  } else {
    std::cerr << "unknown sweep parameter '" << param
              << "' (expected beta, tau or level)\n";
    return kConfigError;
  }
  ungsl::SweepSeries series =
      ungsl::sweep(p, values, cfg, seed_range(cfg.seed, num_seeds));
  const std::filesystem::path dir = ensure_dir(out);
  const std::string csv = (dir / ("sweep_" + param + ".csv")).string();
  series.save_csv(csv);
  for (const ungsl::SweepPoint& pt : series.points)
    std::cout << param << ' ' << pt.value << "  base " << pt.base_acc.mean
              << "  ungsl " << pt.enhanced_acc.mean << "\n";
  std::cout << "series written to " << csv << "\n";
  return kOk;
}

int cmd_experiment_ablation(const ungsl::RunConfig& base, const std::string& name,
                            double fraction, std::size_t num_seeds,
                            const std::string& out) {
  if (name != "fixed_epsilon" && name != "symmetrize") {
    std::cerr << "unknown ablation '" << name
              << "' (expected fixed_epsilon or symmetrize)\n";
    return kConfigError;
  }
  const std::filesystem::path dir = ensure_dir(out);
  std::ofstream csv(dir / ("ablation_" + name + ".csv"));
  csv.precision(17);
  csv << "seed,standard_acc,variant_acc\n";
  double std_sum = 0.0, var_sum = 0.0;
  for (std::uint64_t s : seed_range(base.seed, num_seeds)) {
    ungsl::RunConfig cfg = base;
    reseed(cfg, s);
    ungsl::Graph g = cfg.load_dataset();
    ungsl::AblationRecord rec =
        name == "fixed_epsilon"
            ? ungsl::ablation_fixed_epsilon(g, cfg.gsl, cfg.ungsl, cfg.train,
                                            fraction)
            : ungsl::ablation_symmetrize(g, cfg.gsl, cfg.ungsl, cfg.train);
    csv << s << ',' << rec.standard_acc << ',' << rec.variant_acc << '\n';
    std_sum += rec.standard_acc;
    var_sum += rec.variant_acc;
  }
  const double d = static_cast<double>(num_seeds);
  std::cout << name << ": standard mean " << std_sum / d << "  variant mean "
            << var_sum / d << " over " << num_seeds << " seeds\n";
  return kOk;
}

int cmd_experiment_overhead(const ungsl::RunConfig& cfg,
                            std::vector<std::size_t> sizes,
                            const std::string& out) {
  if (sizes.empty()) sizes = {200, 400, 600, 800};
  ungsl::OverheadReport rep = ungsl::overhead_report(cfg, sizes);
  const std::filesystem::path dir = ensure_dir(out);
  rep.save_csv((dir / "overhead.csv").string());
  std::cout << "mean relative overhead " << rep.mean_relative_overhead
            << "  reweight linear fit r2 " << rep.reweight_fit_r2 << "\n";
  return kOk;
}

// ---------------------------------------------------------------- report

int cmd_report(const std::string& records_path, const std::string& csv_path) {
  std::vector<ungsl::ExperimentRecord> recs = ungsl::load_records(records_path);
  if (recs.empty()) {
    std::cerr << "no records in " << records_path << "\n";
    return kConfigError;
  }
  auto grouped = ungsl::group_records(recs);
  std::ofstream csv;
  if (!csv_path.empty()) {
    csv.open(csv_path);
    csv.precision(17);
    csv << "fingerprint,metric,mean,std,count\n";
  }
  std::cout << std::fixed << std::setprecision(4);
  for (const auto& [fp, metrics] : grouped) {
    std::cout << "config " << std::hex << fp << std::dec << "\n";
    for (const auto& [name, s] : metrics) {
      std::cout << "  " << std::left << std::setw(16) << name << std::right
                << s.mean << " +/- " << s.stddev << "  (n=" << s.count << ")\n";
      if (csv.is_open())
        csv << fp << ',' << name << ',' << s.mean << ',' << s.stddev << ','
            << s.count << '\n';
    }
    const auto base = metrics.find("base_test_acc");
    const auto enh = metrics.find("ungsl_test_acc");
    if (base != metrics.end() && enh != metrics.end()) {
      const double delta = enh->second.mean - base->second.mean;
      std::cout << "  delta " << std::showpos << delta << std::noshowpos;
      if (base->second.mean > 0.0)
        std::cout << "  (" << 100.0 * delta / base->second.mean << "%)";
      std::cout << "\n";
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uncertainty-aware graph structure learning toolkit"};
  app.require_subcommand(1);
  std::size_t jobs = 1;
  app.add_option("--jobs", jobs, "max concurrent seed evaluations")
      ->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "run the full pipeline once");
  std::string train_config, train_out = default_out_dir(), ungsl_mode = "on";
  train->add_option("config", train_config, "run configuration file")->required();
  train->add_option("--ungsl", ungsl_mode, "on | off")
      ->check(CLI::IsMember({"on", "off"}))
      ->capture_default_str();
  train->add_option("--out", train_out, "output directory");

  // verify
  auto* verify = app.add_subcommand("verify", "check proven bounds");
  bool v_prop1 = false, v_logsum = false, v_corr = false;
  std::size_t v_instances = 1000, v_trials = 10000;
  std::string verify_config, verify_out = default_out_dir();
  verify->add_flag("--prop1", v_prop1, "entropy lower bound on random instances");
  verify->add_flag("--logsum", v_logsum, "log-sum inequality oracle");
  verify->add_flag("--correlation", v_corr, "entropy vs neighborhood entropy");
  verify->add_option("--instances", v_instances, "prop1 instance count")
      ->capture_default_str();
  verify->add_option("--trials", v_trials, "logsum trial count")
      ->capture_default_str();
  verify->add_option("--config", verify_config, "dataset config for --correlation");
  verify->add_option("--out", verify_out, "output directory");

  // experiment
  auto* exp = app.add_subcommand("experiment", "run a measurement protocol");
  bool e_prune = false, e_robust = false, e_overhead = false;
  std::string exp_config, exp_sweep, exp_ablation, exp_out = default_out_dir();
  std::vector<double> exp_values, exp_ratios, exp_levels;
  std::vector<std::size_t> exp_sizes;
  std::size_t exp_seeds = 5;
  double exp_fraction = 0.5;
  exp->add_option("config", exp_config, "run configuration file")->required();
  exp->add_flag("--prune", e_prune, "entropy-guided vs random pruning curve");
  exp->add_flag("--robustness", e_robust, "accuracy vs noise level grid");
  exp->add_option("--sweep", exp_sweep, "sweep one parameter: beta | tau | level");
  exp->add_option("--ablation", exp_ablation,
                  "ablation: fixed_epsilon | symmetrize");
  exp->add_flag("--overhead", e_overhead, "wall-clock scaling report");
  exp->add_option("--values", exp_values, "sweep grid values");
  exp->add_option("--ratios", exp_ratios, "pruning ratios");
  exp->add_option("--levels", exp_levels, "noise levels");
  exp->add_option("--sizes", exp_sizes, "overhead graph sizes");
  exp->add_option("--seeds", exp_seeds, "number of seeds")->capture_default_str();
  exp->add_option("--fraction", exp_fraction, "fixed-epsilon quantile")
      ->capture_default_str();
  exp->add_option("--out", exp_out, "output directory");

  // report
  auto* report = app.add_subcommand("report", "aggregate recorded runs");
  std::string report_path, report_csv;
  report->add_option("records", report_path, "path to runs.jsonl")->required();
  report->add_option("--csv", report_csv, "also export the table as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*train) return cmd_train(train_config, ungsl_mode == "on", train_out);
    if (*verify) {
      if (static_cast<int>(v_prop1) + static_cast<int>(v_logsum) +
              static_cast<int>(v_corr) !=
          1) {
        std::cerr << "verify: pick exactly one of --prop1, --logsum, "
                     "--correlation\n";
        return kConfigError;
      }
      if (v_prop1) return cmd_verify_prop1(v_instances, verify_out);
      if (v_logsum) return cmd_verify_logsum(v_trials);
      return cmd_verify_correlation(verify_config, verify_out);
    }
    if (*exp) {
      const int picked = static_cast<int>(e_prune) + static_cast<int>(e_robust) +
                         static_cast<int>(e_overhead) +
                         static_cast<int>(!exp_sweep.empty()) +
                         static_cast<int>(!exp_ablation.empty());
      if (picked != 1) {
        std::cerr << "experiment: pick exactly one protocol\n";
        return kConfigError;
      }
      ungsl::RunConfig cfg = ungsl::load_run_config(exp_config);
      if (e_prune)
        return cmd_experiment_prune(cfg, exp_ratios, exp_seeds, exp_out);
      if (e_robust)
        return cmd_experiment_robustness(cfg, exp_levels, exp_seeds, jobs,
                                         exp_out);
      if (!exp_sweep.empty())
        return cmd_experiment_sweep(cfg, exp_sweep, exp_values, exp_seeds,
                                    exp_out);
      if (!exp_ablation.empty())
        return cmd_experiment_ablation(cfg, exp_ablation, exp_fraction,
                                       exp_seeds, exp_out);
      return cmd_experiment_overhead(cfg, exp_sizes, exp_out);
    }
    return cmd_report(report_path, report_csv);
  } catch (const std::exception& e) {
    return classify(e);
  }
}
