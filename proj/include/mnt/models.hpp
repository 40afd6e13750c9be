#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mnt/ensemble.hpp"

namespace mnt {

/// RIS configuration vector. Binary mode: entries exactly -1 or +1. Relaxed
/// mode (TABP internals): entries strictly inside (-1, +1).
using RisConfig = RealVector;

bool is_binary_config(const RisConfig& c);
bool is_relaxed_config(const RisConfig& c);

/// Model-evaluation counter; every channel evaluation (full, flip, surrogate)
/// adds exactly one, irrespective of fidelity.
struct EvalCounter {
  std::uint64_t count = 0;
  void add(std::uint64_t n = 1) { count += n; }
};

/// Exact multiport channel in the singularity-free form
/// H = S_RT + S_RS (I - Phi S_SS)^-1 Phi S_ST, defined for any |c_i| <= 1
/// including relaxed entries at 0.
Matrix mnt_channel(const ScatteringMatrix& S, const RisConfig& c, EvalCounter* counter);

/// Zeroth-order cascaded approximation H = S_RT + S_RS Phi S_ST.
Matrix casc_channel(const ScatteringMatrix& S, const RisConfig& c, EvalCounter* counter);

struct NeumannResult {
  Matrix H;                       // partial sum through k_max
  std::vector<double> term_norms; // Frobenius norm of each series term's H contribution
};

/// Multi-bounce series expansion of the exact channel, truncated at k_max.
/// Converges iff spectral_radius(Phi S_SS) < 1; successive term norms decay
/// at that rate, which is what the diagnostics check.
NeumannResult neumann_channel(const ScatteringMatrix& S, const RisConfig& c, int k_max);

/// SISO channel gain |H_11|^2; cost is its negative. Rejects non-1x1 input.
double channel_gain(const Matrix& H);
double channel_cost(const Matrix& H);

struct FlipCache {
  int index = -1;
  double delta = 0.0;       // c_new - c_old at the flipped entry
  Complex denominator{};    // 1 + delta * W_ii
  Vector w_col;             // W e_i
  Eigen::RowVectorXcd w_row; // e_i^T W
  Matrix h_new;             // channel after the flip
  std::uint64_t token = 0;
};

/// Stateful exact-model evaluator for binary configurations. Caches
/// W = (Phi^-1 - S_SS)^-1 (well-defined since binary entries never vanish)
/// and serves single-flip channel updates via Sherman-Morrison in O(N_S^2).
/// Single-owner: one evaluator per optimizer run.
class MntEvaluator {
 public:
  MntEvaluator(const ScatteringMatrix& S, EvalCounter& counter);

  /// Full O(N_S^3) rebuild of the cache at a binary configuration; counts as
  /// one model evaluation.
  void reset(const RisConfig& c);

  bool has_cache() const { return has_cache_; }
  const RisConfig& current_config() const;
  const Matrix& current_channel() const;
  double current_cost() const { return channel_cost(current_channel()); }

  /// Channel for the configuration with entry i flipped, without recomputing
  /// the inverse; counts as one model evaluation. The returned cache is valid
  /// for commit_flip until the next flip_delta call.
  FlipCache flip_delta(int i);

  /// Applies the most recent flip to the cached state in O(N_S^2).
  void commit_flip(const FlipCache& cache);

  const ScatteringMatrix& scattering() const { return S_; }

  /// Rebuilds W from scratch for the current configuration (test hook for
  /// drift checks); does not count as an evaluation.
  Matrix recompute_w_for_test() const;

 private:
  const ScatteringMatrix& S_;
  EvalCounter* counter_;
  Matrix w_;        // (Phi^-1 - S_SS)^-1
  Matrix h_;        // current channel
  RisConfig config_;
  bool has_cache_ = false;
  std::uint64_t issue_token_ = 0;
};

/// Unstructured affine surrogate fitted by ridge regression, one complex
/// weight vector and intercept per (rx, tx) entry; the intercept is not
/// penalized.
class RrSurrogate {
 public:
  RrSurrogate() = default;

  bool fitted() const { return fitted_; }
  int n_ris() const { return static_cast<int>(weights_.size() ? weights_[0].size() : 0); }
  int n_rx() const { return n_rx_; }
  int n_tx() const { return n_tx_; }
  double ridge_lambda() const { return lambda_; }

  /// Weight vector for output entry (r, t); CASC-recovery tests compare these
  /// against the per-element path products.
  const Vector& weights(int r, int t) const { return weights_[idx(r, t)]; }
  Complex intercept(int r, int t) const { return intercepts_[idx(r, t)]; }

  Matrix predict(const RisConfig& c, EvalCounter* counter) const;

  friend RrSurrogate fit_rr(const std::vector<RisConfig>& configs,
                            const std::vector<Matrix>& channels, double ridge_lambda);

 private:
  int idx(int r, int t) const { return r * n_tx_ + t; }

  std::vector<Vector> weights_;
  std::vector<Complex> intercepts_;
  int n_rx_ = 0;
  int n_tx_ = 0;
  double lambda_ = 0.0;
  bool fitted_ = false;
};

/// Fits the surrogate on M (configuration, exact channel) pairs.
RrSurrogate fit_rr(const std::vector<RisConfig>& configs,
                   const std::vector<Matrix>& channels, double ridge_lambda);

struct ValueAndGradient {
  Matrix H;
  double cost = 0.0;
  RealVector d_cost_d_c;  // derivative of the SISO cost w.r.t. each relaxed entry
};

/// SISO cost and its analytic gradient w.r.t. the relaxed configuration under
/// the exact model. The channel evaluation counts once; gradient work is not
/// metered. With A = I - Phi S_SS: u^T = S_RS A^-1, x = A^-1 Phi S_ST,
/// dH/dc_i = u_i (S_SS x + S_ST)_i and dC/dc_i = -2 Re(conj(H) dH/dc_i).
ValueAndGradient mnt_value_and_gradient(const ScatteringMatrix& S, const RisConfig& c,
                                        EvalCounter* counter);

/// Same contract for the cascaded model, where dH/dc_i = (S_RS)_i (S_ST)_i.
ValueAndGradient casc_value_and_gradient(const ScatteringMatrix& S, const RisConfig& c,
                                         EvalCounter* counter);

}  // namespace mnt
