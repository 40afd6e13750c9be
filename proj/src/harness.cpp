#include "mnt/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <ostream>
#include <thread>

#include "mnt/numeric.hpp"
#include "mnt/rng.hpp"

namespace mnt {

namespace {

constexpr std::uint64_t kTagDict = 0x64696374;   // "dict"
constexpr std::uint64_t kTagRun = 0x72756e;      // "run"
constexpr std::uint64_t kTagInit = 0x696e6974;   // "init"
constexpr std::uint64_t kTagGa = 0x6761;         // "ga"
constexpr std::uint64_t kTagCalib = 0x63616c;    // "cal"

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += "\"\"";
    else out += ch;
  }
  out += "\"";
  return out;
}

}  // namespace

const char* method_name(MethodKind k) {
  switch (k) {
    case MethodKind::Ds: return "ds";
    case MethodKind::RrCd: return "rr-cd";
    case MethodKind::CascCd: return "casc-cd";
    case MethodKind::MntCd: return "mnt-cd";
    case MethodKind::CascTabp: return "casc-tabp";
    case MethodKind::MntTabp: return "mnt-tabp";
    case MethodKind::Ga: return "ga";
  }
  return "?";
}

MethodKind parse_method(const std::string& name) {
  if (name == "ds") return MethodKind::Ds;
  if (name == "rr-cd") return MethodKind::RrCd;
  if (name == "casc-cd") return MethodKind::CascCd;
  if (name == "mnt-cd") return MethodKind::MntCd;
  if (name == "casc-tabp") return MethodKind::CascTabp;
  if (name == "mnt-tabp") return MethodKind::MntTabp;
  if (name == "ga") return MethodKind::Ga;
  throw ConfigError("unknown method: " + name);
}

InitKind parse_init(const std::string& name) {
  if (name == "random") return InitKind::Random;
  if (name == "ds") return InitKind::DictionaryBest;
  if (name == "rr-cd") return InitKind::RrCdResult;
  throw ConfigError("unknown initializer: " + name);
}

MethodSpec parse_method_spec(const std::string& text) {
  MethodSpec spec;
  const auto colon = text.find(':');
  if (colon == std::string::npos) {
    spec.kind = parse_method(text);
  } else {
    spec.kind = parse_method(text.substr(0, colon));
    spec.init = parse_init(text.substr(colon + 1));
  }
  return spec;
}

std::string method_spec_label(const MethodSpec& spec) {
  std::string label = method_name(spec.kind);
  const bool uses_init = spec.kind == MethodKind::CascCd || spec.kind == MethodKind::MntCd ||
                         spec.kind == MethodKind::CascTabp || spec.kind == MethodKind::MntTabp;
  if (uses_init && spec.init != InitKind::RrCdResult)
    label += std::string(":") + init_kind_name(spec.init);
  return label;
}

std::vector<MethodSpec> ExperimentConfig::default_methods() {
  return {
      {MethodKind::Ds, InitKind::Random},
      {MethodKind::RrCd, InitKind::Random},
      {MethodKind::CascCd, InitKind::RrCdResult},
      {MethodKind::MntCd, InitKind::RrCdResult},
      {MethodKind::CascTabp, InitKind::RrCdResult},
      {MethodKind::MntTabp, InitKind::RrCdResult},
      {MethodKind::Ga, InitKind::Random},
  };
}

ExperimentConfig ExperimentConfig::desk_scale() {
  ExperimentConfig cfg;
  cfg.partition = {1, 1, 32};
  cfg.mu_targets = {0.01, 0.5, 0.99};
  cfg.m_values = {0, 8, 32, 128};
  cfg.n_realizations = 200;
  cfg.methods = default_methods();
  return cfg;
}

void ExperimentConfig::validate() const {
  partition.validate();
  if (mu_targets.empty()) throw ConfigError("config: mu_targets must not be empty");
  for (double mu : mu_targets)
    if (!(mu > 0.0 && mu < 1.0)) throw ConfigError("config: mu_targets must lie in (0, 1)");
  if (m_values.empty()) throw ConfigError("config: m_values must not be empty");
  for (int m : m_values)
    if (m < 0) throw ConfigError("config: m_values must be non-negative");
  if (n_realizations < 1) throw ConfigError("config: n_realizations must be >= 1");
  if (rr_lambda < 0.0) throw ConfigError("config: rr_lambda must be >= 0");
  if (calib_realizations < 1) throw ConfigError("config: calib_realizations must be >= 1");
  if (mu_probe_configs < 1) throw ConfigError("config: mu_probe_configs must be >= 1");
}

bool method_applicable(MethodKind kind, int m, std::string* reason) {
  switch (kind) {
    case MethodKind::Ds:
    case MethodKind::RrCd:
      if (m < 1) {
        if (reason) *reason = std::string("skipped: ") + method_name(kind) + " requires m >= 1";
        return false;
      }
      return true;
    case MethodKind::Ga:
      if (m < 2 || m % 2 != 0) {
        if (reason) *reason = "skipped: ga requires an even population size m >= 2";
        return false;
      }
      return true;
    default:
      return true;
  }
}

OptimizationReport run_method(const MethodSpec& spec, const ScatteringMatrix& S,
                              const Dictionary* dict, int m, double rr_lambda,
                              const TabpSchedule& tabp_schedule, const AdamState& adam,
                              const GaParams& ga, std::uint64_t run_seed,
                              bool record_wall_time) {
  const auto t0 = std::chrono::steady_clock::now();
  OptimizationReport rep;
  rep.method = method_spec_label(spec);
  rep.converged = true;

  EvalCounter run_counter;
  const int ns = S.n_ris();

  const auto resolve_init = [&](InitKind wanted) {
    const InitKind kind = m == 0 ? InitKind::Random : wanted;
    EvalCounter init_counter;
    InitialConfig init = make_initial_config(kind, dict, rr_lambda, ns,
                                             derive_seed(run_seed, {kTagInit}), init_counter);
    rep.init_evaluations = (kind == InitKind::Random ? 0 : static_cast<std::uint64_t>(m)) +
                           init.evaluations;
    return init.config;
  };

  switch (spec.kind) {
    case MethodKind::Ds: {
      if (dict == nullptr || dict->size() != m || m < 1)
        throw EmptyDictionary("run_method: ds needs a dictionary of size m >= 1");
      DictionarySearchResult res = dictionary_search(*dict);
      rep.final_config = res.config;
      rep.model_evaluations = static_cast<std::uint64_t>(m);  // the dictionary build
      rep.peak_stored_configs = m;
      rep.trace.push_back({rep.model_evaluations, res.cost});
      break;
    }
    case MethodKind::RrCd: {
      if (dict == nullptr || dict->size() != m || m < 1)
        throw EmptyDictionary("run_method: rr-cd needs a dictionary of size m >= 1");
      const RrSurrogate sur = fit_rr(dict->configs, dict->channels, rr_lambda);
      Rng rng(derive_seed(run_seed, {kTagInit}));
      RrFlipModel model(sur, run_counter);
      CdResult cd = coordinate_descent(model, rng.binary_config(ns), run_counter);
      rep.final_config = cd.config;
      rep.model_evaluations = run_counter.count;
      rep.init_evaluations = static_cast<std::uint64_t>(m);  // dictionary for the fit
      rep.peak_stored_configs = std::max(m, 2);
      rep.trace = std::move(cd.trace);
      break;
    }
    case MethodKind::CascCd:
    case MethodKind::MntCd: {
      const RisConfig c0 = resolve_init(spec.init);
      CdResult cd = [&] {
        if (spec.kind == MethodKind::CascCd) {
          CascFlipModel model(S, run_counter);
          return coordinate_descent(model, c0, run_counter);
        }
        MntFlipModel model(S, run_counter);
        return coordinate_descent(model, c0, run_counter);
      }();
      rep.final_config = cd.config;
      rep.model_evaluations = run_counter.count;
      rep.peak_stored_configs = 2;  // current + candidate, independent of m
      rep.trace = std::move(cd.trace);
      break;
    }
    case MethodKind::CascTabp:
    case MethodKind::MntTabp: {
      const RisConfig c0 = resolve_init(spec.init);
      const Fidelity f = spec.kind == MethodKind::CascTabp ? Fidelity::Casc : Fidelity::Mnt;
      TabpResult res = tabp(S, f, c0, tabp_schedule, adam, run_counter);
      rep.final_config = res.config;
      rep.model_evaluations = run_counter.count;
      rep.peak_stored_configs = 2;  // relaxed state + gradient, independent of m
      rep.trace = std::move(res.trace);
      rep.converged = res.converged;
      break;
    }
    case MethodKind::Ga: {
      GaResult res = genetic_algorithm(S, m, ga, derive_seed(run_seed, {kTagGa}), run_counter);
      rep.final_config = res.config;
      rep.model_evaluations = run_counter.count;
      rep.peak_stored_configs = res.peak_stored_configs;
      rep.trace = std::move(res.trace);
      break;
    }
  }

  // Ground truth is always the exact model; this re-score is excluded from
  // the complexity counters.
  rep.final_gain_mnt = channel_gain(mnt_channel(S, rep.final_config, nullptr));
  if (record_wall_time) {
    rep.wall_time_us = std::chrono::duration_cast<std::chrono::microseconds>(
                           std::chrono::steady_clock::now() - t0)
                           .count();
  }
  return rep;
}

namespace {

struct RealizationStats {
  double sigma_max = 0.0;
  double realized_mu = 0.0;
  bool ok = false;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg_in, const ProgressFn& progress) {
  ExperimentConfig cfg = cfg_in;
  if (cfg.methods.empty()) cfg.methods = ExperimentConfig::default_methods();
  cfg.validate();

  const int n_mu = static_cast<int>(cfg.mu_targets.size());
  const int n_m = static_cast<int>(cfg.m_values.size());
  const int n_meth = static_cast<int>(cfg.methods.size());
  const int n_real = cfg.n_realizations;

  const bool strict = cfg.passivity == PassivityMode::Strict;

  // Ensemble-mode kappa* per target, resolved up front.
  std::vector<double> ensemble_kappa(n_mu, 0.0);
  std::vector<double> mean_mu1(n_mu, 0.0);
  if (cfg.kappa_mode == KappaMode::Ensemble) {
    for (int mi = 0; mi < n_mu; ++mi) {
      EnsembleSpec base;
      base.partition = cfg.partition;
      base.global_scale = cfg.global_scale;
      base.offdiag_variance = cfg.offdiag_variance;
      base.rng_seed = derive_seed(cfg.master_seed, {kTagCalib, static_cast<std::uint64_t>(mi)});
      ensemble_kappa[mi] = calibrate_kappa(base, cfg.mu_targets[mi], cfg.calib_realizations,
                                           strict ? 100 : 0);
      mean_mu1[mi] = cfg.mu_targets[mi] / ensemble_kappa[mi];
    }
  }

  ExperimentResult out;
  out.cells.resize(static_cast<std::size_t>(n_mu) * n_real * n_m * n_meth);
  std::vector<RealizationStats> stats(static_cast<std::size_t>(n_mu) * n_real);

  const auto cell_index = [&](int mi, int r, int mvi, int me) {
    return ((static_cast<std::size_t>(mi) * n_real + r) * n_m + mvi) * n_meth + me;
  };

  const int total_tasks = n_mu * n_real;
  std::atomic<int> next_task{0};
  std::atomic<int> done_tasks{0};
  std::mutex progress_mutex;

  const auto worker = [&]() {
    for (;;) {
      const int task = next_task.fetch_add(1);
      if (task >= total_tasks) return;
      const int mi = task / n_real;
      const int r = task % n_real;
      const double mu_target = cfg.mu_targets[mi];

      const std::uint64_t realization_seed =
          derive_seed(cfg.master_seed, {static_cast<std::uint64_t>(mi), static_cast<std::uint64_t>(r)});
      const std::uint64_t probe_seed = detail::calib_probe_seed(realization_seed);

      // Pre-fill every cell of this realization; successes overwrite below.
      for (int mvi = 0; mvi < n_m; ++mvi)
        for (int me = 0; me < n_meth; ++me) {
          CellResult& cell = out.cells[cell_index(mi, r, mvi, me)];
          cell.mu_target = mu_target;
          cell.m = cfg.m_values[mvi];
          cell.method = method_spec_label(cfg.methods[me]);
          cell.realization = r;
        }

      EnsembleSpec spec;
      spec.partition = cfg.partition;
      spec.global_scale = cfg.global_scale;
      spec.offdiag_variance = cfg.offdiag_variance;
      spec.rng_seed = realization_seed;
      spec.enforce_passivity = strict;

      try {
        spec.kappa = cfg.kappa_mode == KappaMode::Ensemble
                         ? ensemble_kappa[mi]
                         : per_realization_kappa(spec, mu_target, probe_seed, cfg.mu_probe_configs);
        const ScatteringMatrix S = draw_scattering_matrix(spec);
        const double realized_mu =
            mutual_coupling_strength(S, cfg.mu_probe_configs, probe_seed);

        auto& st = stats[static_cast<std::size_t>(mi) * n_real + r];
        st.sigma_max = S.sigma_max();
        st.realized_mu = realized_mu;
        st.ok = true;

        for (int mvi = 0; mvi < n_m; ++mvi) {
          const int m = cfg.m_values[mvi];
          // One dictionary per (realization, m), shared by every method that
          // needs it; each consumer still reports the m build evaluations.
          Dictionary dict;
          bool have_dict = false;
          if (m > 0) {
            for (const MethodSpec& ms : cfg.methods) {
              const bool needs = ms.kind == MethodKind::Ds || ms.kind == MethodKind::RrCd ||
                                 ((ms.kind == MethodKind::CascCd || ms.kind == MethodKind::MntCd ||
                                   ms.kind == MethodKind::CascTabp || ms.kind == MethodKind::MntTabp) &&
                                  ms.init != InitKind::Random);
              if (needs) {
                EvalCounter dict_counter;
                dict = build_dictionary(S, m, derive_seed(realization_seed, {kTagDict, static_cast<std::uint64_t>(m)}),
                                        dict_counter);
                have_dict = true;
                break;
              }
            }
          }

          for (int me = 0; me < n_meth; ++me) {
            CellResult& cell = out.cells[cell_index(mi, r, mvi, me)];
            cell.realized_mu = realized_mu;
            const MethodSpec& ms = cfg.methods[me];
            std::string reason;
            if (!method_applicable(ms.kind, m, &reason)) {
              cell.error = reason;
              continue;
            }
            try {
              const std::uint64_t run_seed = derive_seed(
                  realization_seed, {kTagRun, static_cast<std::uint64_t>(me), static_cast<std::uint64_t>(m)});
              OptimizationReport rep =
                  run_method(ms, S, have_dict ? &dict : nullptr, m, cfg.rr_lambda,
                             cfg.tabp_schedule, cfg.adam, cfg.ga, run_seed, cfg.record_wall_time);
              cell.final_gain = rep.final_gain_mnt;
              cell.model_evaluations = rep.model_evaluations;
              cell.init_evaluations = rep.init_evaluations;
              cell.peak_stored_configs = rep.peak_stored_configs;
              cell.wall_time_us = rep.wall_time_us;
              cell.converged = rep.converged;
            } catch (const std::exception& e) {
              cell.error = e.what();
            }
          }
        }
      } catch (const std::exception& e) {
        for (int mvi = 0; mvi < n_m; ++mvi)
          for (int me = 0; me < n_meth; ++me)
            out.cells[cell_index(mi, r, mvi, me)].error = e.what();
      }

      const int done = done_tasks.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(done, total_tasks);
      }
    }
  };

  int n_workers = cfg.workers > 0 ? cfg.workers
                                  : static_cast<int>(std::thread::hardware_concurrency());
  if (n_workers < 1) n_workers = 1;
  n_workers = std::min(n_workers, total_tasks);
  std::vector<std::thread> threads;
  threads.reserve(n_workers);
  for (int w = 0; w < n_workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  for (int mi = 0; mi < n_mu; ++mi) {
    KappaResolution res;
    res.mu_target = cfg.mu_targets[mi];
    res.kappa = cfg.kappa_mode == KappaMode::Ensemble ? ensemble_kappa[mi] : 0.0;
    res.mean_mu1 = mean_mu1[mi];
    double sum_sigma = 0.0;
    for (int r = 0; r < n_real; ++r) {
      const auto& st = stats[static_cast<std::size_t>(mi) * n_real + r];
      if (!st.ok) continue;
      res.worst_sigma_max = std::max(res.worst_sigma_max, st.sigma_max);
      sum_sigma += st.sigma_max;
      ++res.n_draws;
    }
    res.mean_sigma_max = res.n_draws > 0 ? sum_sigma / res.n_draws : 0.0;
    out.kappa_info.push_back(res);
  }

  for (const CellResult& cell : out.cells)
    if (cell.failed()) out.any_failed = true;
  return out;
}

std::vector<SummaryRow> aggregate(const std::vector<CellResult>& cells) {
  if (cells.empty()) throw ConfigError("aggregate: empty result stream");

  struct Group {
    SummaryRow row;
    std::vector<double> gains;
    double sum_mu = 0.0, sum_model = 0.0, sum_init = 0.0, sum_peak = 0.0, sum_wall = 0.0;
  };
  std::vector<Group> groups;

  for (const CellResult& cell : cells) {
    Group* g = nullptr;
    for (auto& cand : groups)
      if (cand.row.mu_target == cell.mu_target && cand.row.m == cell.m &&
          cand.row.method == cell.method) {
        g = &cand;
        break;
      }
    if (g == nullptr) {
      groups.emplace_back();
      g = &groups.back();
      g->row.mu_target = cell.mu_target;
      g->row.m = cell.m;
      g->row.method = cell.method;
    }
    if (!cell.ok()) {
      ++g->row.n_excluded;
      continue;
    }
    ++g->row.n_cells;
    g->gains.push_back(cell.final_gain);
    g->sum_mu += cell.realized_mu;
    g->sum_model += static_cast<double>(cell.model_evaluations);
    g->sum_init += static_cast<double>(cell.init_evaluations);
    g->sum_peak += cell.peak_stored_configs;
    g->sum_wall += static_cast<double>(cell.wall_time_us);
  }

  std::vector<SummaryRow> rows;
  rows.reserve(groups.size());
  for (auto& g : groups) {
    const int n = g.row.n_cells;
    if (n > 0) {
      double mean = 0.0;
      for (double v : g.gains) mean += v;
      mean /= n;
      double var = 0.0;
      for (double v : g.gains) var += (v - mean) * (v - mean);
      g.row.mean_gain = mean;
      g.row.stderr_gain = n > 1 ? std::sqrt(var / (n - 1)) / std::sqrt(n) : 0.0;
      g.row.mean_realized_mu = g.sum_mu / n;
      g.row.mean_model_evals = g.sum_model / n;
      g.row.mean_init_evals = g.sum_init / n;
      g.row.mean_peak_configs = g.sum_peak / n;
      g.row.mean_wall_time_us = g.sum_wall / n;
    }
    rows.push_back(g.row);
  }
  return rows;
}

const char* kResultsCsvHeader =
    "mu_target,realized_mu,m,method,realization,final_gain,model_evals,init_evals,"
    "peak_configs,wall_time_us,converged,error";

void write_results_csv(std::ostream& os, const std::vector<CellResult>& cells) {
  os << kResultsCsvHeader << "\n";
  for (const CellResult& c : cells) {
    os << format_double(c.mu_target) << ',' << format_double(c.realized_mu) << ',' << c.m << ','
       << csv_escape(c.method) << ',' << c.realization << ',' << format_double(c.final_gain)
       << ',' << c.model_evaluations << ',' << c.init_evaluations << ',' << c.peak_stored_configs
       << ',' << c.wall_time_us << ',' << (c.converged ? 1 : 0) << ',' << csv_escape(c.error)
       << "\n";
  }
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "mu_target,method,m,n_cells,n_excluded,mean_realized_mu,mean_gain,stderr_gain,"
        "mean_model_evals,mean_init_evals,mean_peak_configs,mean_wall_time_us\n";
  for (const SummaryRow& r : rows) {
    os << format_double(r.mu_target) << ',' << csv_escape(r.method) << ',' << r.m << ','
       << r.n_cells << ',' << r.n_excluded << ',' << format_double(r.mean_realized_mu) << ','
       << format_double(r.mean_gain) << ',' << format_double(r.stderr_gain) << ','
       << format_double(r.mean_model_evals) << ',' << format_double(r.mean_init_evals) << ','
       << format_double(r.mean_peak_configs) << ',' << format_double(r.mean_wall_time_us)
       << "\n";
  }
}

}  // namespace mnt
