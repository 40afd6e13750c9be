// mntris: statistical multiport-network ensembles and 1-bit RIS optimizer
// benchmarks. Subcommands: generate, optimize, sweep, validate.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mnt/harness.hpp"
#include "mnt/mnts_io.hpp"
#include "mnt/rng.hpp"
#include "mnt/selfcheck.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mnt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPassivity = 3;
constexpr int kExitSweepErrors = 4;

struct GenerateArgs {
  int n_tx = 1, n_rx = 1, n_ris = 100;
  double kappa = -1.0;      // <0: unset
  double target_mu = -1.0;  // <0: unset
  std::string kappa_mode = "per-realization";
  int count = 1;
  std::uint64_t seed = 1;
  std::string out_dir = "mnts_out";
  double global_scale = 1.0 / 15.0;
  double offdiag_variance = 1.0;
  int probe_configs = 100;
  bool allow_nonpassive = false;
};

struct OptimizeArgs {
  std::string method = "mnt-cd";
  int m = 0;
  std::uint64_t seed = 1;
  std::string matrix_path;
  int n_tx = 1, n_rx = 1, n_ris = 32;
  double kappa = -1.0;
  double target_mu = -1.0;
  std::uint64_t matrix_seed = 1;
  double global_scale = 1.0 / 15.0;
  double offdiag_variance = 1.0;
  double rr_lambda = 1e-3;
  bool allow_nonpassive = false;
  bool paper_tabp = false;  // literal pseudocode schedule instead of the
                            // trainable sweep defaults
};

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["n_tx"] = cfg.partition.n_tx;
  j["n_rx"] = cfg.partition.n_rx;
  j["n_ris"] = cfg.partition.n_ris;
  j["mu_targets"] = cfg.mu_targets;
  j["m_values"] = cfg.m_values;
  j["n_realizations"] = cfg.n_realizations;
  std::vector<std::string> methods;
  for (const auto& m : cfg.methods) {
    std::string label = method_name(m.kind);
    label += ":";
    label += init_kind_name(m.init);
    methods.push_back(label);
  }
  j["methods"] = methods;
  j["master_seed"] = cfg.master_seed;
  j["rr_lambda"] = cfg.rr_lambda;
  j["tabp"] = {{"t_start", cfg.tabp_schedule.t_start},
               {"t_end", cfg.tabp_schedule.t_end},
               {"e_max", cfg.tabp_schedule.e_max},
               {"epsilon", cfg.tabp_schedule.epsilon},
               {"init_epsilon", cfg.tabp_schedule.init_epsilon}};
  j["adam"] = {{"learning_rate", cfg.adam.learning_rate},
               {"beta1", cfg.adam.beta1},
               {"beta2", cfg.adam.beta2},
               {"epsilon_adam", cfg.adam.epsilon_adam}};
  j["ga"] = {{"generations", cfg.ga.generations}, {"mutation_prob", cfg.ga.mutation_prob}};
  j["global_scale"] = cfg.global_scale;
  j["offdiag_variance"] = cfg.offdiag_variance;
  j["mu_probe_configs"] = cfg.mu_probe_configs;
  j["kappa_mode"] = cfg.kappa_mode == KappaMode::Ensemble ? "ensemble" : "per-realization";
  j["passivity"] = cfg.passivity == PassivityMode::Strict ? "strict" : "warn";
  j["calib_realizations"] = cfg.calib_realizations;
  j["workers"] = cfg.workers;
  j["record_wall_time"] = cfg.record_wall_time;
  return j;
}

int cmd_generate(const GenerateArgs& a) {
  if ((a.kappa < 0.0) == (a.target_mu < 0.0)) {
    std::cerr << "generate: exactly one of --kappa / --target-mu is required\n";
    return kExitConfig;
  }
  EnsembleSpec base;
  base.partition = {a.n_tx, a.n_rx, a.n_ris};
  base.global_scale = a.global_scale;
  base.offdiag_variance = a.offdiag_variance;
  base.enforce_passivity = !a.allow_nonpassive;
  try {
    base.partition.validate();

    fs::create_directories(a.out_dir);
    double ensemble_kappa = a.kappa;
    if (a.target_mu >= 0.0 && a.kappa_mode == "ensemble") {
      EnsembleSpec calib = base;
      calib.rng_seed = derive_seed(a.seed, {0x63616cULL});
      ensemble_kappa = calibrate_kappa(calib, a.target_mu, 200, a.allow_nonpassive ? 0 : 100);
    }

    std::ofstream report(fs::path(a.out_dir) / "report.csv");
    report << "realization,seed,kappa,realized_mu,sigma_max,file\n";

    for (int i = 0; i < a.count; ++i) {
      EnsembleSpec spec = base;
      spec.rng_seed = derive_seed(a.seed, {0x67656eULL, static_cast<std::uint64_t>(i)});
      const std::uint64_t probe_seed = detail::calib_probe_seed(spec.rng_seed);
      spec.kappa = a.target_mu >= 0.0 && a.kappa_mode == "per-realization"
                       ? per_realization_kappa(spec, a.target_mu, probe_seed, a.probe_configs)
                       : ensemble_kappa;

      const ScatteringMatrix S = draw_scattering_matrix(spec);
      const double realized_mu = mutual_coupling_strength(S, a.probe_configs, probe_seed);

      char name[32];
      std::snprintf(name, sizeof(name), "%04d.mnts", i);
      const std::string path = (fs::path(a.out_dir) / name).string();
      write_mnts(path, S);
      char row[256];
      std::snprintf(row, sizeof(row), "%d,%llu,%.17g,%.17g,%.17g,%s\n", i,
                    static_cast<unsigned long long>(spec.rng_seed), spec.kappa, realized_mu,
                    S.sigma_max(), name);
      report << row;
    }

    json manifest;
    manifest["version"] = kVersion;
    manifest["command"] = "generate";
    manifest["n_tx"] = a.n_tx;
    manifest["n_rx"] = a.n_rx;
    manifest["n_ris"] = a.n_ris;
    manifest["count"] = a.count;
    manifest["seed"] = a.seed;
    manifest["kappa"] = a.kappa;
    manifest["target_mu"] = a.target_mu;
    manifest["kappa_mode"] = a.kappa_mode;
    manifest["global_scale"] = a.global_scale;
    manifest["offdiag_variance"] = a.offdiag_variance;
    manifest["allow_nonpassive"] = a.allow_nonpassive;
    std::ofstream(fs::path(a.out_dir) / "manifest.json") << manifest.dump(2) << "\n";
    return kExitOk;
  } catch (const PassivityViolation& e) {
    std::cerr << "generate: " << e.what() << "\n";
    return kExitPassivity;
  } catch (const InfeasibleTarget& e) {
    std::cerr << "generate: " << e.what() << "\n";
    return kExitPassivity;
  } catch (const std::exception& e) {
    std::cerr << "generate: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_optimize(const OptimizeArgs& a) {
  try {
    const MethodSpec spec = parse_method_spec(a.method);

    std::unique_ptr<ScatteringMatrix> S;
    std::uint64_t probe_seed = 0;
    if (!a.matrix_path.empty()) {
      S = std::make_unique<ScatteringMatrix>(read_mnts(a.matrix_path, !a.allow_nonpassive));
      probe_seed = detail::calib_probe_seed(a.matrix_seed);
    } else {
      EnsembleSpec es;
      es.partition = {a.n_tx, a.n_rx, a.n_ris};
      es.global_scale = a.global_scale;
      es.offdiag_variance = a.offdiag_variance;
      es.rng_seed = a.matrix_seed;
      es.enforce_passivity = !a.allow_nonpassive;
      probe_seed = detail::calib_probe_seed(es.rng_seed);
      if ((a.kappa < 0.0) == (a.target_mu < 0.0))
        throw ConfigError("optimize: exactly one of --kappa / --target-mu is required");
      es.kappa =
          a.kappa >= 0.0 ? a.kappa : per_realization_kappa(es, a.target_mu, probe_seed, 100);
      S = std::make_unique<ScatteringMatrix>(draw_scattering_matrix(es));
    }
    const double realized_mu = mutual_coupling_strength(*S, 100, probe_seed);

    ExperimentConfig defaults;  // sweep-grade TABP/Adam settings
    const TabpSchedule sched = a.paper_tabp ? TabpSchedule{} : defaults.tabp_schedule;
    const AdamState adam = a.paper_tabp ? AdamState{} : defaults.adam;

    Dictionary dict;
    const Dictionary* dict_ptr = nullptr;
    if (a.m > 0) {
      EvalCounter dict_counter;
      dict = build_dictionary(
          *S, a.m, derive_seed(a.seed, {0x64696374ULL, static_cast<std::uint64_t>(a.m)}),
          dict_counter);
      dict_ptr = &dict;
    }
    const OptimizationReport rep = run_method(spec, *S, dict_ptr, a.m, a.rr_lambda, sched, adam,
                                              GaParams{}, derive_seed(a.seed, {0x72756eULL}));

    json out;
    out["version"] = kVersion;
    out["method"] = rep.method;
    out["m"] = a.m;
    out["seed"] = a.seed;
    out["realized_mu"] = realized_mu;
    out["sigma_max"] = S->sigma_max();
    out["final_gain"] = rep.final_gain_mnt;
    out["model_evals"] = rep.model_evaluations;
    out["init_evals"] = rep.init_evaluations;
    out["peak_configs"] = rep.peak_stored_configs;
    out["wall_time_us"] = rep.wall_time_us;
    out["converged"] = rep.converged;
    std::vector<double> config(rep.final_config.data(),
                               rep.final_config.data() + rep.final_config.size());
    out["final_config"] = config;
    json trace = json::array();
    for (const auto& p : rep.trace) trace.push_back({p.evaluation_index, p.best_cost});
    out["trace"] = trace;
    std::cout << out.dump(2) << "\n";
    return kExitOk;
  } catch (const PassivityViolation& e) {
    std::cerr << "optimize: " << e.what() << "\n";
    return kExitPassivity;
  } catch (const std::exception& e) {
    std::cerr << "optimize: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_sweep(const ExperimentConfig& cfg, const std::string& out_dir, bool dry_run) {
  try {
    ExperimentConfig resolved = cfg;
    if (resolved.methods.empty()) resolved.methods = ExperimentConfig::default_methods();
    resolved.validate();

    const std::size_t n_cells = resolved.mu_targets.size() * resolved.m_values.size() *
                                resolved.methods.size() *
                                static_cast<std::size_t>(resolved.n_realizations);
    if (dry_run) {
      json plan = config_to_json(resolved);
      plan["cells"] = n_cells;
      std::cout << plan.dump(2) << "\n";
      return kExitOk;
    }

    fs::create_directories(out_dir);
    std::cerr << "sweep: " << n_cells << " cells over "
              << resolved.mu_targets.size() * resolved.n_realizations << " realizations\n";

    int last_pct = -1;
    const ExperimentResult res = run_experiment(resolved, [&](int done, int total) {
      const int pct = 100 * done / total;
      if (pct != last_pct) {
        std::cerr << "\rsweep: " << pct << "% (" << done << "/" << total << " realizations)"
                  << std::flush;
        last_pct = pct;
      }
    });
    std::cerr << "\n";

    {
      std::ofstream os(fs::path(out_dir) / "results.csv");
      write_results_csv(os, res.cells);
    }
    {
      std::ofstream os(fs::path(out_dir) / "summary.csv");
      write_summary_csv(os, aggregate(res.cells));
    }

    int skipped = 0, failed = 0;
    for (const auto& c : res.cells) {
      if (c.skipped()) ++skipped;
      else if (c.failed()) ++failed;
    }
    json manifest;
    manifest["version"] = kVersion;
    manifest["command"] = "sweep";
    manifest["config"] = config_to_json(resolved);
    json kinfo = json::array();
    for (const auto& k : res.kappa_info)
      kinfo.push_back({{"mu_target", k.mu_target},
                       {"ensemble_kappa", k.kappa},
                       {"mean_mu1", k.mean_mu1},
                       {"worst_sigma_max", k.worst_sigma_max},
                       {"mean_sigma_max", k.mean_sigma_max},
                       {"n_draws", k.n_draws}});
    manifest["kappa_info"] = kinfo;
    manifest["cells"] = res.cells.size();
    manifest["skipped_cells"] = skipped;
    manifest["failed_cells"] = failed;
    std::ofstream(fs::path(out_dir) / "manifest.json") << manifest.dump(2) << "\n";

    std::cerr << "sweep: wrote " << out_dir << "/results.csv, summary.csv, manifest.json ("
              << skipped << " skipped, " << failed << " failed)\n";
    return res.any_failed ? kExitSweepErrors : kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "sweep: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_validate(const std::vector<std::string>& only, std::uint64_t seed) {
  selfcheck::Options opts;
  opts.seed = seed;
  std::vector<selfcheck::CheckResult> results;
  try {
    if (only.empty()) {
      results = selfcheck::run_all(opts);
    } else {
      for (const auto& name : only) results.push_back(selfcheck::run_named(name, opts));
    }
  } catch (const std::exception& e) {
    std::cerr << "validate: " << e.what() << "\n";
    return kExitConfig;
  }
  bool all_ok = true;
  for (const auto& r : results) {
    std::printf("%s %-15s observed %.3e  tolerance %.3e  (%s)\n", r.passed ? "PASS" : "FAIL",
                r.name.c_str(), r.observed, r.tolerance, r.detail.c_str());
    all_ok = all_ok && r.passed;
  }
  return all_ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Statistical multiport-network ensembles and 1-bit RIS optimization benchmarks"};
  app.require_subcommand(1);

  // generate ---------------------------------------------------------------
  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Draw scattering-matrix realizations");
  generate->add_option("--n-tx", gen.n_tx, "Transmit antenna ports");
  generate->add_option("--n-rx", gen.n_rx, "Receive antenna ports");
  generate->add_option("--n-ris", gen.n_ris, "RIS element ports");
  generate->add_option("--kappa", gen.kappa, "Coupling scale kappa (exclusive with --target-mu)");
  generate->add_option("--target-mu", gen.target_mu, "Target coupling metric mu_n in (0,1)");
  generate->add_option("--kappa-mode", gen.kappa_mode, "per-realization | ensemble")
      ->check(CLI::IsMember({"per-realization", "ensemble"}));
  generate->add_option("--count", gen.count, "Number of realizations");
  generate->add_option("--seed", gen.seed, "Master seed");
  generate->add_option("--out-dir", gen.out_dir, "Output directory");
  generate->add_option("--global-scale", gen.global_scale, "Passivity scale (default 1/15)");
  generate->add_option("--offdiag-variance", gen.offdiag_variance, "Base entry variance");
  generate->add_option("--probe-configs", gen.probe_configs, "Probes for mu_n");
  generate->add_flag("--allow-nonpassive", gen.allow_nonpassive,
                     "Record sigma_max >= 1 instead of failing");

  // optimize ---------------------------------------------------------------
  OptimizeArgs opt;
  auto* optimize = app.add_subcommand("optimize", "Run one optimizer on one realization");
  optimize->add_option("--method", opt.method,
                       "ds | rr-cd | casc-cd | mnt-cd | casc-tabp | mnt-tabp | ga "
                       "(CD/TABP accept :random / :ds / :rr-cd init suffixes)");
  optimize->add_option("--m", opt.m, "Dictionary / population size");
  optimize->add_option("--seed", opt.seed, "Run seed");
  optimize->add_option("--matrix", opt.matrix_path, "MNTS file (otherwise generate)");
  optimize->add_option("--n-tx", opt.n_tx, "Transmit ports (generated matrix)");
  optimize->add_option("--n-rx", opt.n_rx, "Receive ports (generated matrix)");
  optimize->add_option("--n-ris", opt.n_ris, "RIS ports (generated matrix)");
  optimize->add_option("--kappa", opt.kappa, "Coupling scale (exclusive with --target-mu)");
  optimize->add_option("--target-mu", opt.target_mu, "Target mu_n (per-realization kappa)");
  optimize->add_option("--matrix-seed", opt.matrix_seed, "Seed for the generated matrix");
  optimize->add_option("--global-scale", opt.global_scale, "Passivity scale");
  optimize->add_option("--offdiag-variance", opt.offdiag_variance, "Base entry variance");
  optimize->add_option("--rr-lambda", opt.rr_lambda, "Ridge regularization");
  optimize->add_flag("--allow-nonpassive", opt.allow_nonpassive, "Accept sigma_max >= 1");
  optimize->add_flag("--paper-tabp", opt.paper_tabp,
                     "Use the literal pseudocode TABP schedule (eps 1e-4, Adam lr 1e-3)");

  // sweep ------------------------------------------------------------------
  ExperimentConfig sweep_cfg = ExperimentConfig::desk_scale();
  std::vector<std::string> sweep_methods;
  std::string sweep_out = "sweep_out";
  std::string sweep_kappa_mode = "per-realization";
  std::string sweep_passivity = "warn";
  bool dry_run = false;
  bool no_wall_time = false;
  auto* sweep = app.add_subcommand("sweep", "Full Monte-Carlo benchmark sweep");
  sweep->set_config("--config", "", "TOML/INI key-value config file");
  sweep->add_option("--n-tx", sweep_cfg.partition.n_tx, "Transmit ports");
  sweep->add_option("--n-rx", sweep_cfg.partition.n_rx, "Receive ports");
  sweep->add_option("--n-ris", sweep_cfg.partition.n_ris, "RIS ports");
  sweep->add_option("--mu-targets", sweep_cfg.mu_targets, "Coupling targets in (0,1)");
  sweep->add_option("--m-values", sweep_cfg.m_values, "Dictionary-size grid");
  sweep->add_option("--realizations", sweep_cfg.n_realizations, "Realizations per target");
  sweep->add_option("--methods", sweep_methods, "Method list, e.g. mnt-cd:rr-cd ga");
  sweep->add_option("--master-seed", sweep_cfg.master_seed, "Master seed");
  sweep->add_option("--rr-lambda", sweep_cfg.rr_lambda, "Ridge regularization");
  sweep->add_option("--tabp-epsilon", sweep_cfg.tabp_schedule.epsilon, "TABP stop tolerance");
  sweep->add_option("--tabp-init-epsilon", sweep_cfg.tabp_schedule.init_epsilon,
                    "TABP init clip");
  sweep->add_option("--tabp-emax", sweep_cfg.tabp_schedule.e_max, "TABP epoch limit");
  sweep->add_option("--tabp-tstart", sweep_cfg.tabp_schedule.t_start, "TABP start temperature");
  sweep->add_option("--tabp-tend", sweep_cfg.tabp_schedule.t_end, "TABP end temperature");
  sweep->add_option("--adam-lr", sweep_cfg.adam.learning_rate, "Adam learning rate");
  sweep->add_option("--ga-generations", sweep_cfg.ga.generations, "GA generations");
  sweep->add_option("--ga-mutation", sweep_cfg.ga.mutation_prob, "GA per-gene mutation rate");
  sweep->add_option("--global-scale", sweep_cfg.global_scale, "Passivity scale");
  sweep->add_option("--offdiag-variance", sweep_cfg.offdiag_variance, "Base entry variance");
  sweep->add_option("--probe-configs", sweep_cfg.mu_probe_configs, "Probes for mu_n");
  sweep->add_option("--kappa-mode", sweep_kappa_mode, "per-realization | ensemble")
      ->check(CLI::IsMember({"per-realization", "ensemble"}));
  sweep->add_option("--passivity", sweep_passivity, "warn | strict")
      ->check(CLI::IsMember({"warn", "strict"}));
  sweep->add_option("--calib-realizations", sweep_cfg.calib_realizations,
                    "Draws for ensemble calibration");
  sweep->add_option("--workers", sweep_cfg.workers, "Worker threads (0 = auto)");
  sweep->add_option("--out-dir", sweep_out, "Output directory");
  sweep->add_flag("--dry-run", dry_run, "Print the resolved plan and cell count only");
  sweep->add_flag("--no-wall-time", no_wall_time,
                  "Zero the wall_time_us column for byte-reproducible output");

  // validate ---------------------------------------------------------------
  std::vector<std::string> only;
  std::uint64_t validate_seed = 42;
  auto* validate = app.add_subcommand("validate", "Run the built-in oracle suites");
  validate->add_option("--only", only, "Subset of checks")
      ->check(CLI::IsMember(selfcheck::check_names()));
  validate->add_option("--seed", validate_seed, "Check seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (generate->parsed()) return cmd_generate(gen);
  if (optimize->parsed()) return cmd_optimize(opt);
  if (sweep->parsed()) {
    try {
      for (const auto& text : sweep_methods)
        sweep_cfg.methods.push_back(parse_method_spec(text));
      sweep_cfg.kappa_mode =
          sweep_kappa_mode == "ensemble" ? KappaMode::Ensemble : KappaMode::PerRealization;
      sweep_cfg.passivity =
          sweep_passivity == "strict" ? PassivityMode::Strict : PassivityMode::Warn;
      sweep_cfg.record_wall_time = !no_wall_time;
    } catch (const std::exception& e) {
      std::cerr << "sweep: " << e.what() << "\n";
      return kExitConfig;
    }
    return cmd_sweep(sweep_cfg, sweep_out, dry_run);
  }
  if (validate->parsed()) return cmd_validate(only, validate_seed);
  return kExitConfig;
}
