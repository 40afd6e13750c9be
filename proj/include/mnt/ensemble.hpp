#pragma once

#include <cstdint>

#include "mnt/common.hpp"

namespace mnt {

/// Port ordering is fixed as [TX | RX | RIS]; block accessors on
/// ScatteringMatrix rely on it.
struct PortPartition {
  int n_tx = 1;
  int n_rx = 1;
  int n_ris = 1;

  int total() const { return n_tx + n_rx + n_ris; }
  int tx_start() const { return 0; }
  int rx_start() const { return n_tx; }
  int ris_start() const { return n_tx + n_rx; }

  void validate() const;
};

struct EnsembleSpec {
  PortPartition partition;
  double kappa = 1.0;
  double global_scale = 1.0 / 15.0;
  double offdiag_variance = 1.0;
  std::uint64_t rng_seed = 0;
  // When false the passivity check is recorded but not enforced; used by the
  // harness for coupling regimes where sigma_max(S) approaches or crosses 1.
  bool enforce_passivity = true;
};

/// Static environment scattering matrix: symmetric by construction, with the
/// realized sigma_max recorded at build time.
class ScatteringMatrix {
 public:
  ScatteringMatrix(PortPartition partition, Matrix S, double kappa,
                   bool enforce_passivity = true);

  const PortPartition& partition() const { return part_; }
  const Matrix& matrix() const { return S_; }
  double kappa() const { return kappa_; }
  double sigma_max() const { return sigma_max_; }
  bool passive() const { return sigma_max_ < 1.0; }

  int n_ris() const { return part_.n_ris; }

  auto s_tt() const { return S_.block(part_.tx_start(), part_.tx_start(), part_.n_tx, part_.n_tx); }
  auto s_rr() const { return S_.block(part_.rx_start(), part_.rx_start(), part_.n_rx, part_.n_rx); }
  auto s_rt() const { return S_.block(part_.rx_start(), part_.tx_start(), part_.n_rx, part_.n_tx); }
  auto s_rs() const { return S_.block(part_.rx_start(), part_.ris_start(), part_.n_rx, part_.n_ris); }
  auto s_st() const { return S_.block(part_.ris_start(), part_.tx_start(), part_.n_ris, part_.n_tx); }
  auto s_ss() const { return S_.block(part_.ris_start(), part_.ris_start(), part_.n_ris, part_.n_ris); }

 private:
  PortPartition part_;
  Matrix S_;
  double kappa_;
  double sigma_max_;
};

/// Draws one realization. Normative order: strict upper triangle row-major as
/// CN(0, v), then diagonal as CN(0, 2v), mirror by copy, scale everything by
/// global_scale, scale the off-diagonal RIS-RIS entries by kappa, then check
/// passivity. A seed therefore pins the matrix exactly.
ScatteringMatrix draw_scattering_matrix(const EnsembleSpec& spec);

/// Configuration-averaged coupling metric: spectral norm of the off-diagonal
/// RIS block over the spectral norm of (Phi^-1 - diag(S_SS)), averaged over
/// random binary probe configurations drawn from their own stream.
double mutual_coupling_strength(const ScatteringMatrix& S, int n_probe_configs,
                                std::uint64_t rng_seed);

struct KappaFeasibility {
  double fraction_passing = 0.0;
  double worst_sigma_max = 0.0;
  int n_trials = 0;
  bool feasible() const { return n_trials > 0 && fraction_passing == 1.0; }
};

/// Draws n_trials realizations at the given kappa (matched trial seeds derive
/// from spec.rng_seed only, so sweeps over kappa compare like with like) and
/// reports the passivity pass fraction and the worst observed sigma_max.
KappaFeasibility validate_kappa(const EnsembleSpec& spec, double kappa, int n_trials);

/// One-point calibration: mean mu_n at kappa = 1 over n_calib realizations,
/// then kappa* = target_mu / mean. With validate_trials > 0 the result is
/// gated through validate_kappa and InfeasibleTarget is thrown when any trial
/// violates passivity; validate_trials = 0 skips the gate (the harness does
/// this in relaxed-passivity mode and records sigma_max statistics instead).
double calibrate_kappa(const EnsembleSpec& spec, double target_mu, int n_calib = 200,
                       int validate_trials = 100);

/// Kappa that makes this very realization's mu_n equal target_mu: redraws the
/// same seed at kappa = target / mu_n(kappa=1). Exact by linearity of mu_n in
/// the off-diagonal scaling.
double per_realization_kappa(const EnsembleSpec& spec, double target_mu,
                             std::uint64_t probe_seed, int n_probe_configs = 100);

namespace detail {
/// Probe-seed convention shared by calibration and the harness.
std::uint64_t calib_probe_seed(std::uint64_t realization_seed);
}  // namespace detail

}  // namespace mnt
