#include "mnt/selfcheck.hpp"

#include <algorithm>
#include <cmath>

#include "mnt/models.hpp"
#include "mnt/numeric.hpp"
#include "mnt/rng.hpp"

namespace mnt::selfcheck {

namespace {

EnsembleSpec small_spec(std::uint64_t seed, int n_ris, double kappa) {
  EnsembleSpec spec;
  spec.partition = {1, 1, n_ris};
  spec.kappa = kappa;
  spec.rng_seed = seed;
  return spec;
}

double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

}  // namespace

CheckResult check_woodbury(const Options& opts) {
  CheckResult res{"woodbury", false, 1e-8, 0.0, {}};
  const int n_ris = 16;
  const int n_matrices = 10;
  const int n_flips = 200;

  for (int s = 0; s < n_matrices; ++s) {
    const ScatteringMatrix S =
        draw_scattering_matrix(small_spec(derive_seed(opts.seed, {1, (std::uint64_t)s}), n_ris, 1.0));
    EvalCounter counter;
    MntEvaluator ev(S, counter);
    Rng rng(derive_seed(opts.seed, {2, (std::uint64_t)s}));
    ev.reset(rng.binary_config(n_ris));

    for (int f = 0; f < n_flips; ++f) {
      const int i = static_cast<int>(rng.below(n_ris));
      FlipCache cache = ev.flip_delta(i);
      Matrix h_flip = cache.h_new;
      if (opts.inject_woodbury_sign_error)
        h_flip = 2.0 * ev.current_channel() - h_flip;  // emulate a flipped update sign

      RisConfig flipped = ev.current_config();
      flipped[i] = -flipped[i];
      const Matrix h_full = mnt_channel(S, flipped, nullptr);
      const double err = (h_flip - h_full).norm() / std::max(h_full.norm(), 1e-300);
      res.observed = std::max(res.observed, err);
      ev.commit_flip(cache);
    }
  }
  res.passed = res.observed <= res.tolerance;
  res.detail = "max relative channel error over committed random flips";
  return res;
}

CheckResult check_gradient(const Options& opts) {
  CheckResult res{"gradient", false, 1e-5, 0.0, {}};
  const int n_ris = 12;
  const int n_points = 20;
  const double h = 1e-6;

  for (int p = 0; p < n_points; ++p) {
    const ScatteringMatrix S =
        draw_scattering_matrix(small_spec(derive_seed(opts.seed, {3, (std::uint64_t)p}), n_ris, 1.0));
    Rng rng(derive_seed(opts.seed, {4, (std::uint64_t)p}));
    const double t = 0.1 * std::pow(10.0, rng.uniform());  // t in [0.1, 1]
    RealVector z(n_ris);
    for (int i = 0; i < n_ris; ++i) z[i] = (2.0 * rng.uniform() - 1.0) * 1.5 * t;

    for (const bool mnt_fidelity : {true, false}) {
      const auto cost_at = [&](const RealVector& zz) {
        RisConfig c(n_ris);
        for (int i = 0; i < n_ris; ++i) c[i] = std::tanh(zz[i] / t);
        const Matrix H = mnt_fidelity ? mnt_channel(S, c, nullptr) : casc_channel(S, c, nullptr);
        return channel_cost(H);
      };

      RisConfig c(n_ris);
      for (int i = 0; i < n_ris; ++i) c[i] = std::tanh(z[i] / t);
      const ValueAndGradient vg = mnt_fidelity ? mnt_value_and_gradient(S, c, nullptr)
                                               : casc_value_and_gradient(S, c, nullptr);
      for (int i = 0; i < n_ris; ++i) {
        const double sech = 1.0 / std::cosh(z[i] / t);
        const double analytic = vg.d_cost_d_c[i] * sech * sech / t;
        RealVector zp = z, zm = z;
        zp[i] += h;
        zm[i] -= h;
        const double fd = (cost_at(zp) - cost_at(zm)) / (2.0 * h);
        res.observed = std::max(res.observed, rel_err(analytic, fd));
      }
    }
  }
  res.passed = res.observed <= res.tolerance;
  res.detail = "max per-coordinate relative error, analytic vs central differences";
  return res;
}

CheckResult check_neumann(const Options& opts) {
  CheckResult res{"neumann", false, 0.2, 0.0, {}};
  const int n_ris = 16;
  double worst_sum_err = 0.0;

  for (int s = 0; s < 5; ++s) {
    const ScatteringMatrix S =
        draw_scattering_matrix(small_spec(derive_seed(opts.seed, {5, (std::uint64_t)s}), n_ris, 1.0));
    Rng rng(derive_seed(opts.seed, {6, (std::uint64_t)s}));
    const RisConfig c = rng.binary_config(n_ris);

    const Matrix phi_sss = c.cast<Complex>().asDiagonal() * Matrix(S.s_ss());
    const double R = spectral_radius(phi_sss);
    const int k_max = 200;
    const NeumannResult nr = neumann_channel(S, c, k_max);
    const Matrix exact = mnt_channel(S, c, nullptr);
    worst_sum_err = std::max(worst_sum_err, (nr.H - exact).norm() / exact.norm());

    // late-k geometric-mean decay rate of the term norms vs the spectral radius
    const int k_hi = k_max;
    const int k_lo = k_max / 2;
    if (nr.term_norms[k_lo] > 1e-280 && nr.term_norms[k_hi] > 1e-280) {
      const double rate = std::pow(nr.term_norms[k_hi] / nr.term_norms[k_lo],
                                   1.0 / static_cast<double>(k_hi - k_lo));
      res.observed = std::max(res.observed, std::abs(rate - R) / R);
    }
  }
  res.passed = res.observed <= res.tolerance && worst_sum_err <= 1e-10;
  res.detail = "term decay rate vs spectral radius (partial-sum error " +
               std::to_string(worst_sum_err) + ")";
  return res;
}

CheckResult check_variance_ratio(const Options& opts) {
  CheckResult res{"variance-ratio", false, 0.1, 0.0, {}};
  const int n_draws = 2000;
  EnsembleSpec spec = small_spec(opts.seed, 6, 1.0);
  const int n = spec.partition.total();
  const int s0 = spec.partition.ris_start();

  double diag_sq = 0.0, off_sq = 0.0;
  std::int64_t n_diag = 0, n_off = 0;
  for (int d = 0; d < n_draws; ++d) {
    spec.rng_seed = derive_seed(opts.seed, {7, (std::uint64_t)d});
    const ScatteringMatrix drawn = draw_scattering_matrix(spec);
    const Matrix& S = drawn.matrix();
    for (int i = 0; i < n; ++i) {
      diag_sq += std::norm(S(i, i));
      ++n_diag;
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (i >= s0 && j >= s0) continue;  // kappa-scaled block excluded
        off_sq += std::norm(S(i, j));
        ++n_off;
      }
  }
  const double ratio = (diag_sq / n_diag) / (off_sq / n_off);
  res.observed = std::abs(ratio - 2.0) / 2.0;
  res.passed = res.observed <= res.tolerance;
  res.detail = "diagonal/off-diagonal variance ratio = " + std::to_string(ratio);
  return res;
}

CheckResult check_mu_linearity(const Options& opts) {
  CheckResult res{"mu-linearity", false, 1e-12, 0.0, {}};
  const std::uint64_t probe_seed = derive_seed(opts.seed, {8});

  for (int s = 0; s < 5; ++s) {
    EnsembleSpec spec = small_spec(derive_seed(opts.seed, {9, (std::uint64_t)s}), 12, 1.0);
    const ScatteringMatrix S1 = draw_scattering_matrix(spec);

    // doubling the off-diagonal RIS-RIS entries with diagonal and probes held
    // fixed must exactly double mu_n
    Matrix doubled = S1.matrix();
    const int s0 = spec.partition.ris_start();
    for (int i = 0; i < spec.partition.n_ris; ++i)
      for (int j = 0; j < spec.partition.n_ris; ++j)
        if (i != j) doubled(s0 + i, s0 + j) *= 2.0;
    const ScatteringMatrix S2(spec.partition, std::move(doubled), 2.0, false);

    const double mu1 = mutual_coupling_strength(S1, 100, probe_seed);
    const double mu2 = mutual_coupling_strength(S2, 100, probe_seed);
    res.observed = std::max(res.observed, std::abs(mu2 - 2.0 * mu1) / (2.0 * mu1));
  }
  res.passed = res.observed <= res.tolerance;
  res.detail = "relative deviation from exact doubling";
  return res;
}

std::vector<std::string> check_names() {
  return {"woodbury", "gradient", "neumann", "variance-ratio", "mu-linearity"};
}

CheckResult run_named(const std::string& name, const Options& opts) {
  if (name == "woodbury") return check_woodbury(opts);
  if (name == "gradient") return check_gradient(opts);
  if (name == "neumann") return check_neumann(opts);
  if (name == "variance-ratio") return check_variance_ratio(opts);
  if (name == "mu-linearity") return check_mu_linearity(opts);
  throw ConfigError("unknown check: " + name);
}

std::vector<CheckResult> run_all(const Options& opts) {
  std::vector<CheckResult> out;
  for (const auto& name : check_names()) out.push_back(run_named(name, opts));
  return out;
}

}  // namespace mnt::selfcheck
