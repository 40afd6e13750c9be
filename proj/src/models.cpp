#include "mnt/models.hpp"

#include <Eigen/LU>

#include "mnt/numeric.hpp"

namespace mnt {

bool is_binary_config(const RisConfig& c) {
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (c[i] != 1.0 && c[i] != -1.0) return false;
  return c.size() > 0;
}

bool is_relaxed_config(const RisConfig& c) {
  for (Eigen::Index i = 0; i < c.size(); ++i)
    if (!(c[i] > -1.0 && c[i] < 1.0)) return false;
  return c.size() > 0;
}

namespace {

void check_config_size(const ScatteringMatrix& S, const RisConfig& c, const char* where) {
  if (c.size() != S.n_ris())
    throw DimensionMismatch(std::string(where) + ": configuration length != N_S");
}

Matrix phi_times(const RisConfig& c, const Matrix& rhs) {
  return c.cast<Complex>().asDiagonal() * rhs;
}

}  // namespace

Matrix mnt_channel(const ScatteringMatrix& S, const RisConfig& c, EvalCounter* counter) {
  check_config_size(S, c, "mnt_channel");
  const int ns = S.n_ris();
  Matrix A = Matrix::Identity(ns, ns) - phi_times(c, S.s_ss());
  const Matrix X = solve_linear(A, phi_times(c, S.s_st()));
  Matrix H = S.s_rt() + S.s_rs() * X;
  if (counter) counter->add();
  return H;
}

Matrix casc_channel(const ScatteringMatrix& S, const RisConfig& c, EvalCounter* counter) {
  check_config_size(S, c, "casc_channel");
  Matrix H = S.s_rt() + S.s_rs() * phi_times(c, S.s_st());
  if (counter) counter->add();
  return H;
}

NeumannResult neumann_channel(const ScatteringMatrix& S, const RisConfig& c, int k_max) {
  check_config_size(S, c, "neumann_channel");
  if (k_max < 0) throw ConfigError("neumann_channel: k_max must be >= 0");

  const Matrix bounce = phi_times(c, S.s_ss());  // Phi S_SS
  Matrix v = phi_times(c, S.s_st());             // (Phi S_SS)^k Phi S_ST at k = 0
  Matrix sum = v;

  NeumannResult out;
  out.term_norms.reserve(static_cast<std::size_t>(k_max) + 1);
  out.term_norms.push_back((S.s_rs() * v).norm());
  for (int k = 1; k <= k_max; ++k) {
    v = bounce * v;
    sum += v;
    out.term_norms.push_back((S.s_rs() * v).norm());
  }
  out.H = S.s_rt() + S.s_rs() * sum;
  return out;
}

double channel_gain(const Matrix& H) {
  if (H.rows() != 1 || H.cols() != 1)
    throw ShapeError("channel_gain: SISO metric needs a 1x1 channel");
  return std::norm(H(0, 0));
}

double channel_cost(const Matrix& H) { return -channel_gain(H); }

// ---------------------------------------------------------------------------
// MntEvaluator

MntEvaluator::MntEvaluator(const ScatteringMatrix& S, EvalCounter& counter)
    : S_(S), counter_(&counter) {}

void MntEvaluator::reset(const RisConfig& c) {
  check_config_size(S_, c, "MntEvaluator::reset");
  if (!is_binary_config(c))
    throw ConfigError("MntEvaluator::reset: configuration must be binary");

  const int ns = S_.n_ris();
  // Eq.-1 form: A = Phi^-1 - S_SS with Phi^-1 = diag(c) for binary entries.
  Matrix A = -Matrix(S_.s_ss());
  A.diagonal() += c.cast<Complex>();
  w_ = solve_linear(A, Matrix::Identity(ns, ns));
  h_ = S_.s_rt() + S_.s_rs() * w_ * S_.s_st();
  config_ = c;
  has_cache_ = true;
  ++issue_token_;
  counter_->add();
}

const RisConfig& MntEvaluator::current_config() const {
  if (!has_cache_) throw CacheInvalid("MntEvaluator: no current configuration");
  return config_;
}

const Matrix& MntEvaluator::current_channel() const {
  if (!has_cache_) throw CacheInvalid("MntEvaluator: no current channel");
  return h_;
}

FlipCache MntEvaluator::flip_delta(int i) {
  if (!has_cache_) throw CacheInvalid("MntEvaluator::flip_delta: reset() first");
  if (i < 0 || i >= S_.n_ris()) throw DimensionMismatch("MntEvaluator::flip_delta: bad index");

  FlipCache cache;
  cache.index = i;
  cache.delta = -2.0 * config_[i];  // c flips to -c, and 1/c = c on {-1,+1}
  cache.denominator = 1.0 + cache.delta * w_(i, i);
  if (std::abs(cache.denominator) < tolerances().flip_denominator_min)
    throw NumericBreakdown("MntEvaluator::flip_delta: Sherman-Morrison denominator ~ 0");

  cache.w_col = w_.col(i);
  cache.w_row = w_.row(i);
  const Matrix left = S_.s_rs() * cache.w_col;                 // N_R x 1
  const Matrix right = cache.w_row * S_.s_st();                // 1 x N_T
  cache.h_new = h_ - (cache.delta / cache.denominator) * (left * right);
  cache.token = ++issue_token_;
  counter_->add();
  return cache;
}

void MntEvaluator::commit_flip(const FlipCache& cache) {
  if (!has_cache_) throw CacheInvalid("MntEvaluator::commit_flip: no cache");
  if (cache.token != issue_token_)
    throw StaleCache("MntEvaluator::commit_flip: another flip_delta intervened");

  w_.noalias() -= (cache.delta / cache.denominator) * (cache.w_col * cache.w_row);
  config_[cache.index] = -config_[cache.index];
  h_ = cache.h_new;
  ++issue_token_;  // the committed cache cannot be replayed
}

Matrix MntEvaluator::recompute_w_for_test() const {
  if (!has_cache_) throw CacheInvalid("MntEvaluator: no current configuration");
  const int ns = S_.n_ris();
  Matrix A = -Matrix(S_.s_ss());
  A.diagonal() += config_.cast<Complex>();
  return solve_linear(A, Matrix::Identity(ns, ns));
}

// ---------------------------------------------------------------------------
// Ridge-regression surrogate

RrSurrogate fit_rr(const std::vector<RisConfig>& configs, const std::vector<Matrix>& channels,
                   double ridge_lambda) {
  if (configs.empty()) throw ConfigError("fit_rr: need at least one pair");
  if (configs.size() != channels.size())
    throw DimensionMismatch("fit_rr: configuration/channel count mismatch");
  if (ridge_lambda < 0.0) throw ConfigError("fit_rr: ridge_lambda must be >= 0");

  const int m = static_cast<int>(configs.size());
  const int ns = static_cast<int>(configs[0].size());
  const int n_rx = static_cast<int>(channels[0].rows());
  const int n_tx = static_cast<int>(channels[0].cols());
  for (const auto& c : configs)
    if (c.size() != ns) throw DimensionMismatch("fit_rr: inconsistent configuration length");
  for (const auto& h : channels)
    if (h.rows() != n_rx || h.cols() != n_tx)
      throw DimensionMismatch("fit_rr: inconsistent channel shape");

  // Real design matrix [configs | 1]; complex responses handled per part.
  RealMatrix X(m, ns + 1);
  for (int r = 0; r < m; ++r) {
    X.row(r).head(ns) = configs[r].transpose();
    X(r, ns) = 1.0;
  }
  RealMatrix G = X.transpose() * X;
  G.topLeftCorner(ns, ns).diagonal().array() += ridge_lambda;  // intercept unpenalized

  Eigen::PartialPivLU<RealMatrix> lu(G);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > tolerances().pivot_min))
    throw DegenerateDesign("fit_rr: normal equations singular");

  RrSurrogate sur;
  sur.n_rx_ = n_rx;
  sur.n_tx_ = n_tx;
  sur.lambda_ = ridge_lambda;
  sur.weights_.resize(static_cast<std::size_t>(n_rx) * n_tx);
  sur.intercepts_.resize(static_cast<std::size_t>(n_rx) * n_tx);

  for (int r = 0; r < n_rx; ++r)
    for (int t = 0; t < n_tx; ++t) {
      RealVector y_re(m), y_im(m);
      for (int k = 0; k < m; ++k) {
        y_re[k] = channels[k](r, t).real();
        y_im[k] = channels[k](r, t).imag();
      }
      const RealVector th_re = lu.solve(X.transpose() * y_re);
      const RealVector th_im = lu.solve(X.transpose() * y_im);
      Vector w(ns);
      for (int i = 0; i < ns; ++i) w[i] = Complex(th_re[i], th_im[i]);
      sur.weights_[sur.idx(r, t)] = std::move(w);
      sur.intercepts_[sur.idx(r, t)] = Complex(th_re[ns], th_im[ns]);
    }
  sur.fitted_ = true;
  return sur;
}

Matrix RrSurrogate::predict(const RisConfig& c, EvalCounter* counter) const {
  if (!fitted_) throw NotFitted("RrSurrogate::predict: fit_rr first");
  if (c.size() != n_ris()) throw DimensionMismatch("RrSurrogate::predict: bad length");

  Matrix H(n_rx_, n_tx_);
  const Vector cc = c.cast<Complex>();
  for (int r = 0; r < n_rx_; ++r)
    for (int t = 0; t < n_tx_; ++t)
      H(r, t) = (weights_[idx(r, t)].array() * cc.array()).sum() + intercepts_[idx(r, t)];
  if (counter) counter->add();
  return H;
}

// ---------------------------------------------------------------------------
// Analytic SISO gradients

ValueAndGradient mnt_value_and_gradient(const ScatteringMatrix& S, const RisConfig& c,
                                        EvalCounter* counter) {
  check_config_size(S, c, "mnt_value_and_gradient");
  if (S.partition().n_rx != 1 || S.partition().n_tx != 1)
    throw ShapeError("mnt_value_and_gradient: SISO only");

  const int ns = S.n_ris();
  Matrix A = Matrix::Identity(ns, ns) - phi_times(c, S.s_ss());
  Eigen::PartialPivLU<Matrix> lu(A);
  const double min_pivot = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (!(min_pivot > tolerances().pivot_min))
    throw SingularMatrix("mnt_value_and_gradient: I - Phi S_SS singular");

  const Vector x = lu.solve(phi_times(c, S.s_st()));                    // A^-1 Phi S_ST
  const Vector u = lu.transpose().solve(Matrix(S.s_rs()).transpose());  // (S_RS A^-1)^T
  const Vector v = Matrix(S.s_ss()) * x + Matrix(S.s_st());

  ValueAndGradient out;
  out.H = Matrix(S.s_rt()) + Matrix(S.s_rs()) * x;
  out.cost = channel_cost(out.H);
  out.d_cost_d_c.resize(ns);
  const Complex h = out.H(0, 0);
  for (int i = 0; i < ns; ++i)
    out.d_cost_d_c[i] = -2.0 * std::real(std::conj(h) * (u[i] * v[i]));
  if (counter) counter->add();
  return out;
}

ValueAndGradient casc_value_and_gradient(const ScatteringMatrix& S, const RisConfig& c,
                                         EvalCounter* counter) {
  check_config_size(S, c, "casc_value_and_gradient");
  if (S.partition().n_rx != 1 || S.partition().n_tx != 1)
    throw ShapeError("casc_value_and_gradient: SISO only");

  const int ns = S.n_ris();
  ValueAndGradient out;
  out.H = casc_channel(S, c, counter);
  out.cost = channel_cost(out.H);
  out.d_cost_d_c.resize(ns);
  const Complex h = out.H(0, 0);
  for (int i = 0; i < ns; ++i) {
    const Complex dh = S.s_rs()(0, i) * S.s_st()(i, 0);
    out.d_cost_d_c[i] = -2.0 * std::real(std::conj(h) * dh);
  }
  return out;
}

}  // namespace mnt
