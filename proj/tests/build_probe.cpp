// Scratch probe used during development to pin down ensemble feasibility
// constants; not part of the shipped test suite.
#include <cstdio>
#include <vector>

#include "mnt/harness.hpp"
#include "mnt/numeric.hpp"
#include "mnt/rng.hpp"
#include "mnt/selfcheck.hpp"

using namespace mnt;

int main() {
  // 1) mu_n(kappa=1) statistics and sigma_max at per-realization kappa for
  //    targets 0.01 / 0.5 / 0.99 at desk scale (N_S = 32, v = 1).
  EnsembleSpec spec;
  spec.partition = {1, 1, 32};
  spec.enforce_passivity = false;

  const int n = 400;
  std::vector<double> mu1(n);
  double mu_sum = 0.0, mu_min = 1e9, mu_max = 0.0;
  for (int r = 0; r < n; ++r) {
    spec.rng_seed = derive_seed(7, {0, (std::uint64_t)r});
    spec.kappa = 1.0;
    auto S = draw_scattering_matrix(spec);
    mu1[r] = mutual_coupling_strength(S, 100, detail::calib_probe_seed(spec.rng_seed));
    mu_sum += mu1[r];
    mu_min = std::min(mu_min, mu1[r]);
    mu_max = std::max(mu_max, mu1[r]);
  }
  const double mu_mean = mu_sum / n;
  double var = 0.0;
  for (int r = 0; r < n; ++r) var += (mu1[r] - mu_mean) * (mu1[r] - mu_mean);
  std::printf("mu_n(1): mean %.4f min %.4f max %.4f relstd %.4f\n", mu_mean, mu_min, mu_max,
              std::sqrt(var / (n - 1)) / mu_mean);

  for (double target : {0.01, 0.5, 0.99}) {
    double worst_sigma = 0.0, mean_sigma = 0.0;
    int violations = 0;
    for (int r = 0; r < n; ++r) {
      spec.rng_seed = derive_seed(7, {0, (std::uint64_t)r});
      const double kappa_r = target / mu1[r];
      spec.kappa = kappa_r;
      auto S = draw_scattering_matrix(spec);
      worst_sigma = std::max(worst_sigma, S.sigma_max());
      mean_sigma += S.sigma_max();
      if (!S.passive()) ++violations;
    }
    std::printf("target %.2f: per-real kappa: mean sigma %.4f worst %.4f violations %d/%d\n",
                target, mean_sigma / n, worst_sigma, violations, n);
  }

  // ensemble-kappa mode: fixed kappa* = target / mean(mu1)
  for (double target : {0.5, 0.99}) {
    const double kappa_star = target / mu_mean;
    int violations = 0;
    double worst = 0.0;
    for (int r = 0; r < n; ++r) {
      spec.rng_seed = derive_seed(7, {0, (std::uint64_t)r});
      spec.kappa = kappa_star;
      auto S = draw_scattering_matrix(spec);
      worst = std::max(worst, S.sigma_max());
      if (!S.passive()) ++violations;
    }
    std::printf("target %.2f: ensemble kappa* %.3f: worst sigma %.4f violations %d/%d\n", target,
                kappa_star, worst, violations, n);
  }

  // 2) quick self-checks
  for (const auto& res : selfcheck::run_all()) {
    std::printf("check %-15s %s observed %.3e tol %.3e  %s\n", res.name.c_str(),
                res.passed ? "PASS" : "FAIL", res.observed, res.tolerance, res.detail.c_str());
  }
  return 0;
}
