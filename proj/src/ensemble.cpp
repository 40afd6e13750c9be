#include "mnt/ensemble.hpp"

#include <string>

#include "mnt/numeric.hpp"
#include "mnt/rng.hpp"

namespace mnt {

void PortPartition::validate() const {
  if (n_tx < 1 || n_rx < 1 || n_ris < 1)
    throw ConfigError("PortPartition: n_tx, n_rx, n_ris must each be >= 1");
}

ScatteringMatrix::ScatteringMatrix(PortPartition partition, Matrix S, double kappa,
                                   bool enforce_passivity)
    : part_(partition), S_(std::move(S)), kappa_(kappa) {
  part_.validate();
  const int n = part_.total();
  if (S_.rows() != n || S_.cols() != n)
    throw DimensionMismatch("ScatteringMatrix: matrix size does not match partition");
  sigma_max_ = largest_singular_value(S_);
  if (enforce_passivity && !(sigma_max_ < 1.0))
    throw PassivityViolation("ScatteringMatrix: sigma_max = " + std::to_string(sigma_max_) +
                             " >= 1 (kappa " + std::to_string(kappa_) + ")");
}

ScatteringMatrix draw_scattering_matrix(const EnsembleSpec& spec) {
  spec.partition.validate();
  if (spec.global_scale <= 0.0) throw ConfigError("EnsembleSpec: global_scale must be > 0");
  if (spec.kappa < 0.0) throw ConfigError("EnsembleSpec: kappa must be >= 0");

  const int n = spec.partition.total();
  Rng rng(spec.rng_seed);
  Matrix S(n, n);

  // (1) strict upper triangle, row-major
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) S(i, j) = rng.complex_gaussian(spec.offdiag_variance);
  // (2) diagonal carries twice the variance (coherent backscattering)
  for (int i = 0; i < n; ++i) S(i, i) = rng.complex_gaussian(2.0 * spec.offdiag_variance);
  // (3) mirror by copy, not averaging, so the drawn variances survive
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) S(j, i) = S(i, j);
  // (4) global passivity scaling
  S *= spec.global_scale;
  // (5) coupling knob on the off-diagonal RIS-RIS entries only
  const int s0 = spec.partition.ris_start();
  for (int i = 0; i < spec.partition.n_ris; ++i)
    for (int j = 0; j < spec.partition.n_ris; ++j)
      if (i != j) S(s0 + i, s0 + j) *= spec.kappa;

  // (6) passivity is verified by the constructor
  return ScatteringMatrix(spec.partition, std::move(S), spec.kappa, spec.enforce_passivity);
}

double mutual_coupling_strength(const ScatteringMatrix& S, int n_probe_configs,
                                std::uint64_t rng_seed) {
  if (n_probe_configs < 1)
    throw ConfigError("mutual_coupling_strength: n_probe_configs must be >= 1");

  const int ns = S.n_ris();
  const Matrix ss = S.s_ss();
  const Vector diag = ss.diagonal();

  Matrix off = ss;
  off.diagonal().setZero();
  // The numerator never depends on the probe configuration; compute it once.
  const double numerator = largest_singular_value(off);
  if (numerator == 0.0) return 0.0;

  Rng probes(rng_seed);
  double acc = 0.0;
  for (int p = 0; p < n_probe_configs; ++p) {
    const RealVector c = probes.binary_config(ns);
    // Phi^-1 - diag(S_SS) is diagonal (1/c = c for binary entries), so its
    // spectral norm is just the largest entry magnitude.
    double denom = 0.0;
    for (int i = 0; i < ns; ++i) denom = std::max(denom, std::abs(Complex(c[i], 0.0) - diag[i]));
    acc += numerator / denom;
  }
  return acc / n_probe_configs;
}

namespace detail {
std::uint64_t calib_probe_seed(std::uint64_t realization_seed) {
  return derive_seed(realization_seed, {0x70726f6265ULL});  // "probe"
}
}  // namespace detail

KappaFeasibility validate_kappa(const EnsembleSpec& spec, double kappa, int n_trials) {
  if (kappa < 0.0) throw ConfigError("validate_kappa: kappa must be >= 0");
  KappaFeasibility out;
  out.n_trials = n_trials;
  int pass = 0;
  for (int t = 0; t < n_trials; ++t) {
    EnsembleSpec trial = spec;
    trial.kappa = kappa;
    trial.rng_seed = derive_seed(spec.rng_seed, {0x76616c6964ULL, static_cast<std::uint64_t>(t)});
    trial.enforce_passivity = false;  // measuring, not gating
    const ScatteringMatrix S = draw_scattering_matrix(trial);
    out.worst_sigma_max = std::max(out.worst_sigma_max, S.sigma_max());
    if (S.passive()) ++pass;
  }
  out.fraction_passing = n_trials > 0 ? static_cast<double>(pass) / n_trials : 0.0;
  return out;
}

double calibrate_kappa(const EnsembleSpec& spec, double target_mu, int n_calib,
                       int validate_trials) {
  if (!(target_mu > 0.0)) throw ConfigError("calibrate_kappa: target_mu must be > 0");
  if (n_calib < 1) throw ConfigError("calibrate_kappa: n_calib must be >= 1");

  double acc = 0.0;
  for (int t = 0; t < n_calib; ++t) {
    EnsembleSpec trial = spec;
    trial.kappa = 1.0;
    trial.rng_seed = derive_seed(spec.rng_seed, {0x63616c6962ULL, static_cast<std::uint64_t>(t)});
    trial.enforce_passivity = false;
    const ScatteringMatrix S = draw_scattering_matrix(trial);
    acc += mutual_coupling_strength(S, 100, detail::calib_probe_seed(trial.rng_seed));
  }
  const double mean_mu1 = acc / n_calib;
  const double kappa_star = target_mu / mean_mu1;

  if (validate_trials > 0) {
    const KappaFeasibility f = validate_kappa(spec, kappa_star, validate_trials);
    if (!f.feasible())
      throw InfeasibleTarget("calibrate_kappa: kappa* = " + std::to_string(kappa_star) +
                             " fails passivity (worst sigma_max " +
                             std::to_string(f.worst_sigma_max) + ")");
  }
  return kappa_star;
}

double per_realization_kappa(const EnsembleSpec& spec, double target_mu,
                             std::uint64_t probe_seed, int n_probe_configs) {
  if (!(target_mu > 0.0)) throw ConfigError("per_realization_kappa: target_mu must be > 0");
  EnsembleSpec unit = spec;
  unit.kappa = 1.0;
  unit.enforce_passivity = false;
  const ScatteringMatrix S1 = draw_scattering_matrix(unit);
  const double mu1 = mutual_coupling_strength(S1, n_probe_configs, probe_seed);
  if (mu1 == 0.0) throw InfeasibleTarget("per_realization_kappa: mu_n(1) is zero");
  return target_mu / mu1;
}

}  // namespace mnt
