#pragma once

// Drawing from the pair ensemble Pr_n with density (1/Z_n) exp(-sum_ij k(x_i,y_j)).
//
// Gaussian case, exact and O(n): with S_x = sum x_i, S_y = sum y_j and
// r = x - S_x/n the centered residuals, the exponent
//   -n sum x_i^2 - n sum y_j^2 + 2 theta S_x S_y
// splits into -(S_x^2 + S_y^2 - 2 theta S_x S_y) - n sum r_{x,i}^2 - n sum r_{y,j}^2.
// So (S_x, S_y) is a centered Gaussian pair with covariance
// (1/(2(1-theta^2))) [[1, theta], [theta, 1]], independent of the residuals,
// and the residuals are iid N(0, 1/(2n)) projected onto the zero-sum
// hyperplane. Per-coordinate variance: (n-1)/(2n^2) + 1/(2n^2(1-theta^2)).
//
// General kernels: single-site Metropolis started at the jittered minimizer
// of k; a proposal that lands on k = +inf has density zero and is rejected.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "ensemble.hpp"
#include "kernel.hpp"
#include "rng.hpp"

namespace ldpair {

inline double log_density(const InteractionKernel& kernel, const Ensemble& e) {
  e.validate();
  double s = 0.0, comp = 0.0;
  for (int i = 0; i < e.n; ++i)
    for (int j = 0; j < e.n; ++j) {
      const double k = kernel.eval_k(e.x[i], e.y[j]);
      if (std::isinf(k) && k > 0) return -kInf;
      const double t = s + k;
      comp += std::abs(s) >= std::abs(k) ? (s - t) + k : (k - t) + s;
      s = t;
    }
  return -(s + comp);
}

inline Ensemble sample_gaussian_exact(double theta, int n, Engine& eng) {
  if (!(std::abs(theta) < 1.0))
    throw std::domain_error("sample_gaussian_exact: |theta| must be < 1");
  if (n < 1) throw std::invalid_argument("sample_gaussian_exact: n must be >= 1");
  std::normal_distribution<double> gauss(0.0, 1.0);
  Ensemble e;
  e.n = n;
  e.x.resize(n);
  e.y.resize(n);
  const double sd = std::sqrt(1.0 / (2.0 * n));
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) { e.x[i] = sd * gauss(eng); mx += e.x[i]; }
  for (int j = 0; j < n; ++j) { e.y[j] = sd * gauss(eng); my += e.y[j]; }
  mx /= n;
  my /= n;
  // Cholesky factor of the sum covariance: c [[1, 0], [theta, sqrt(1-theta^2)]].
  const double c = std::sqrt(1.0 / (2.0 * (1.0 - theta * theta)));
  const double g1 = gauss(eng), g2 = gauss(eng);
  const double Sx = c * g1;
  const double Sy = c * (theta * g1 + std::sqrt(1.0 - theta * theta) * g2);
  for (int i = 0; i < n; ++i) e.x[i] += Sx / n - mx;
  for (int j = 0; j < n; ++j) e.y[j] += Sy / n - my;
  return e;
}

inline Ensemble sample_gaussian_exact(double theta, int n, std::uint64_t rng_seed,
                                      std::uint64_t replica = 0) {
  Engine eng = make_engine(rng_seed, streams::sampler, replica);
  Ensemble e = sample_gaussian_exact(theta, n, eng);
  e.seed_info = {rng_seed, streams::sampler, replica, "exact_gaussian"};
  return e;
}

struct McmcConfig {
  long steps = 0;            // total single-site steps, > burn_in
  long burn_in = -1;         // default 10 n^2
  double proposal_scale = 0.0;  // default 1/sqrt(n)
  long thinning = 1;         // energy-trace recording stride
  std::uint64_t seed = 0;
  bool adapt_during_burnin = true;  // Robbins-Monro toward 40% acceptance
};

struct McmcDiagnostics {
  double acceptance_rate = 0.0;    // post burn-in
  bool acceptance_in_range = true; // [0.05, 0.95]
  double proposal_scale_used = 0.0;
  double energy_first = 0.0, energy_last = 0.0;  // log-density trace summary
  double energy_min = 0.0, energy_max = 0.0;
  long trace_points = 0;
};

struct McmcResult {
  Ensemble e;
  McmcDiagnostics diagnostics;
};

inline McmcResult sample_mcmc(const InteractionKernel& kernel, int n, McmcConfig cfg,
                              std::uint64_t replica = 0) {
  if (n < 1) throw std::invalid_argument("sample_mcmc: n must be >= 1");
  if (cfg.burn_in < 0) cfg.burn_in = 10L * n * n;
  if (cfg.steps <= 0) cfg.steps = cfg.burn_in + 10L * n * n;
  if (cfg.steps <= cfg.burn_in)
    throw std::invalid_argument("sample_mcmc: steps must exceed burn_in");
  if (cfg.proposal_scale <= 0.0) cfg.proposal_scale = 1.0 / std::sqrt(double(n));
  if (cfg.thinning < 1) throw std::invalid_argument("sample_mcmc: thinning must be >= 1");

  Engine eng = make_engine(cfg.seed, streams::mcmc, replica);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uniform_int_distribution<int> site(0, 2 * n - 1);

  // Start at the minimizer of k, replicated with a small jitter (which also
  // clears the diagonal for singular kernels).
  const InfimumResult m = infimum_k(kernel, 1e-6, 201);
  Ensemble e;
  e.n = n;
  e.x.assign(n, 0.0);
  e.y.assign(n, 0.0);
  const double jitter = 0.05 * cfg.proposal_scale + 1e-4;
  for (int i = 0; i < n; ++i) e.x[i] = m.x + jitter * gauss(eng);
  for (int j = 0; j < n; ++j) e.y[j] = m.y + jitter * gauss(eng);

  double logdens = log_density(kernel, e);
  for (int tries = 0; std::isinf(logdens) && tries < 100; ++tries) {
    for (int i = 0; i < n; ++i) e.x[i] = m.x + jitter * gauss(eng);
    for (int j = 0; j < n; ++j) e.y[j] = m.y + jitter * gauss(eng);
    logdens = log_density(kernel, e);
  }
  if (std::isinf(logdens))
    throw std::runtime_error("sample_mcmc: could not find a finite-density start");

  McmcDiagnostics diag;
  diag.energy_first = diag.energy_last = diag.energy_min = diag.energy_max = logdens;
  diag.trace_points = 1;
  double scale = cfg.proposal_scale;
  long accepted = 0, proposed = 0;        // post burn-in only
  long win_accepted = 0, win_proposed = 0;  // burn-in adaptation window

  auto delta_for = [&](bool is_x, int idx, double nv) {
    // Only one row (or column) of the double sum changes: O(n).
    double d = 0.0;
    if (is_x) {
      for (int j = 0; j < n; ++j) {
        const double knew = kernel.eval_k(nv, e.y[j]);
        if (std::isinf(knew) && knew > 0) return -kInf;
        d += kernel.eval_k(e.x[idx], e.y[j]) - knew;
      }
    } else {
      for (int i = 0; i < n; ++i) {
        const double knew = kernel.eval_k(e.x[i], nv);
        if (std::isinf(knew) && knew > 0) return -kInf;
        d += kernel.eval_k(e.x[i], e.y[idx]) - knew;
      }
    }
    return d;
  };

  for (long step = 0; step < cfg.steps; ++step) {
    const int s = site(eng);
    const bool is_x = s < n;
    const int idx = is_x ? s : s - n;
    const double cur = is_x ? e.x[idx] : e.y[idx];
    const double nv = cur + scale * gauss(eng);
    const double d = delta_for(is_x, idx, nv);
    const bool accept = d >= 0.0 || unif(eng) < std::exp(d);
    if (accept) {
      (is_x ? e.x[idx] : e.y[idx]) = nv;
      logdens += d;
    }
    if (step >= cfg.burn_in) {
      ++proposed;
      accepted += accept ? 1 : 0;
    } else if (cfg.adapt_during_burnin) {
      // Robbins-Monro on log(scale) toward 40% acceptance, burn-in only
      // (the post burn-in kernel is a fixed Metropolis chain).
      ++win_proposed;
      win_accepted += accept ? 1 : 0;
      if (win_proposed == 100) {
        const double gain = 1.0 / std::sqrt(1.0 + double(step) / 100.0);
        scale *= std::exp(gain * (double(win_accepted) / 100.0 - 0.4));
        win_accepted = win_proposed = 0;
      }
    }
    if ((step + 1) % cfg.thinning == 0) {
      diag.energy_last = logdens;
      diag.energy_min = std::min(diag.energy_min, logdens);
      diag.energy_max = std::max(diag.energy_max, logdens);
      ++diag.trace_points;
    }
  }

  diag.acceptance_rate = proposed > 0 ? double(accepted) / double(proposed) : 0.0;
  diag.acceptance_in_range =
      diag.acceptance_rate >= 0.05 && diag.acceptance_rate <= 0.95;
  diag.proposal_scale_used = scale;
  diag.energy_last = logdens;

  e.seed_info = {cfg.seed, streams::mcmc, replica, "mcmc"};
  return {std::move(e), diag};
}

inline double log_partition_gaussian(double theta, int n) {
  if (!(std::abs(theta) < 1.0))
    throw std::domain_error("log_partition_gaussian: |theta| must be < 1");
  if (n < 1) throw std::invalid_argument("log_partition_gaussian: n must be >= 1");
  // 2n-dimensional Gaussian integral; the block precision matrix has
  // determinant (2n)^(2n) (1-theta^2).
  return n * std::log(std::numbers::pi / n) - 0.5 * std::log1p(-theta * theta);
}

}  // namespace ldpair
