#pragma once

// Min-of-linear test functionals Phi(mu) = min_r int F_r dmu, the variational
// supremum sup { Phi - K } over product measures on a finite support grid, the
// Varadhan functional L(Phi) = sup{Phi - K} + I0, its Monte-Carlo counterpart
// (1/n^2) log E exp(n^2 Phi(mu_hat_n)), and the covariance functionals Phi_b
// whose duality bound b*delta - L(Phi_b) diverges on non-product measures.
//
// The optimizer is alternating mirror ascent (multiplicative weights in each
// simplex factor, step0/sqrt(1+t) steps) with a vertex scan plus Dirichlet
// restarts; the objective is bilinear in (w, v) per factor but nonconcave
// jointly, so the returned value is a certificate: it is always an achieved
// value of the objective, never an extrapolation.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "energy.hpp"
#include "kernel.hpp"
#include "measure.hpp"
#include "rng.hpp"
#include "sampler.hpp"

namespace ldpair {

struct FunctionalComponent {
  Bivariate f;
  double bound = 0.0;  // declared sup-norm
  std::string name;
};

struct MinFunctional {
  std::vector<FunctionalComponent> components;
};

inline MinFunctional min_functional(std::vector<FunctionalComponent> comps) {
  if (comps.empty())
    throw std::invalid_argument("min_functional: need at least one component");
  return {std::move(comps)};
}

inline FunctionalComponent fc_constant(double c) {
  return {[c](double, double) { return c; }, std::abs(c), "const:" + std::to_string(c)};
}

inline FunctionalComponent fc_clamp_x(double lo, double hi) {
  return {[lo, hi](double x, double) { return std::clamp(x, lo, hi); },
          std::max(std::abs(lo), std::abs(hi)),
          "clampx:" + std::to_string(lo) + "," + std::to_string(hi)};
}

inline FunctionalComponent fc_clamp_y(double lo, double hi) {
  return {[lo, hi](double, double y) { return std::clamp(y, lo, hi); },
          std::max(std::abs(lo), std::abs(hi)),
          "clampy:" + std::to_string(lo) + "," + std::to_string(hi)};
}

inline FunctionalComponent fc_clamp_product(double lo, double hi) {
  const double b = std::max(std::abs(lo), std::abs(hi));
  return {[lo, hi](double x, double y) {
            return std::clamp(x, lo, hi) * std::clamp(y, lo, hi);
          },
          b * b, "clampxy:" + std::to_string(lo) + "," + std::to_string(hi)};
}

inline FunctionalComponent fc_gauss_bump(double cx, double cy, double s, double amp) {
  return {[cx, cy, s, amp](double x, double y) {
            const double dx = x - cx, dy = y - cy;
            return amp * std::exp(-(dx * dx + dy * dy) / (2.0 * s * s));
          },
          std::abs(amp), "bump"};
}

inline double phi(const MinFunctional& f, const ProductMeasure& mu) {
  if (f.components.empty())
    throw std::invalid_argument("phi: empty functional");
  double best = kInf;
  for (const auto& comp : f.components) {
    KahanSum acc;
    for (std::size_t i = 0; i < mu.left.atoms.size(); ++i)
      for (std::size_t j = 0; j < mu.right.atoms.size(); ++j)
        acc.add(mu.left.weights[i] * mu.right.weights[j] *
                comp.f(mu.left.atoms[i], mu.right.atoms[j]));
    best = std::min(best, acc.value());
  }
  return best;
}

struct SimplexGrid {
  std::vector<double> support;  // shared candidate atoms for both factors
  std::optional<std::vector<double>> support_y;  // per-factor override
  int restarts = 20;
  int max_iters = 2000;
  double step0 = 1.0;
  std::uint64_t seed = 0;
};

struct SupResult {
  double value = -kInf;
  ProductMeasure argmax;
  bool iteration_limit = false;  // ascent still moving when cut off
};

namespace detail {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// w' M v skipping zero weights so that 0 * inf never poisons the sum; any
// +inf entry met with positive weight drives the product energy to +inf.
inline double weighted_form(const VectorXd& w, const MatrixXd& M, const VectorXd& v) {
  KahanSum acc;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    if (w[i] == 0.0) continue;
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (v[j] == 0.0) continue;
      const double m = M(i, j);
      if (std::isinf(m) && m > 0) return kInf;
      acc.add(w[i] * M(i, j) * v[j]);
    }
  }
  return acc.value();
}

inline VectorXd inf_matvec(const MatrixXd& M, const VectorXd& v) {
  VectorXd out(M.rows());
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (v[j] == 0.0) continue;
      const double m = M(i, j);
      if (std::isinf(m) && m > 0) { s = kInf; break; }
      s += m * v[j];
    }
    out[i] = s;
  }
  return out;
}

struct AscentProblem {
  int nw = 0, nv = 0;
  std::function<double(const VectorXd&, const VectorXd&)> value;
  std::function<VectorXd(const VectorXd&, const VectorXd&)> grad_w;  // supergradients
  std::function<VectorXd(const VectorXd&, const VectorXd&)> grad_v;
};

// Multiplicative-weights step; -inf gradient entries zero their coordinate
// out exactly, which is how atoms colliding with a singular kernel leave the
// support.  The step is scale-free: the gradient spread is normalized so one
// step moves log-odds by at most 2*eta, whatever the kernel's magnitude --
// otherwise a large-amplitude functional saturates the exponential weights
// and every start snaps to a corner before it can explore.
inline bool mirror_step(VectorXd& w, const VectorXd& g, double eta) {
  double gmax = -kInf, gmin = kInf;
  for (Eigen::Index i = 0; i < g.size(); ++i)
    if (w[i] > 0.0) {
      if (g[i] > gmax) gmax = g[i];
      if (std::isfinite(g[i]) && g[i] < gmin) gmin = g[i];
    }
  if (!std::isfinite(gmax)) return false;  // nothing finite to follow
  const double range = gmax - gmin;
  if (std::isfinite(range) && range > 2.0) eta *= 2.0 / range;
  double total = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    const double e = g[i] - gmax;
    w[i] *= (e <= -700.0) ? 0.0 : std::exp(eta * e);
    total += w[i];
  }
  if (!(total > 0.0)) return false;
  w /= total;
  return true;
}

inline SupResult ascend(const AscentProblem& prob, const SimplexGrid& grid,
                        const std::vector<double>& sx, const std::vector<double>& sy) {
  SupResult res;
  VectorXd best_w = VectorXd::Zero(prob.nw), best_v = VectorXd::Zero(prob.nv);

  auto consider = [&](const VectorXd& w, const VectorXd& v) {
    const double val = prob.value(w, v);
    if (std::isfinite(val) && val > res.value) {
      res.value = val;
      best_w = w;
      best_v = v;
    }
  };

  // Vertex certificates first: exact for bilinear pieces and a finite floor
  // for singular kernels.
  for (int i = 0; i < prob.nw; ++i)
    for (int j = 0; j < prob.nv; ++j) {
      VectorXd w = VectorXd::Zero(prob.nw), v = VectorXd::Zero(prob.nv);
      w[i] = 1.0;
      v[j] = 1.0;
      consider(w, v);
    }

  Engine eng = make_engine(grid.seed, streams::varadhan_restart);
  std::exponential_distribution<double> expo(1.0);
  for (int r = 0; r <= grid.restarts; ++r) {
    VectorXd w(prob.nw), v(prob.nv);
    if (r == 0) {
      w.setConstant(1.0 / prob.nw);
      v.setConstant(1.0 / prob.nv);
    } else {  // Dirichlet(1,...,1) via normalized exponentials
      for (int i = 0; i < prob.nw; ++i) w[i] = expo(eng);
      for (int j = 0; j < prob.nv; ++j) v[j] = expo(eng);
      w /= w.sum();
      v /= v.sum();
    }
    // Constant-step stages with geometric decay.  Where the min-functional
    // has a nonsmooth ridge the raw iterates orbit the optimum at the step
    // scale; the stage average (burn-in discarded) sits on the ridge and
    // seeds the next, finer stage, so the certificate tightens geometrically
    // in the stage count.  A run that exhausts its budget while still
    // improving reports iteration_limit.
    const int stages = 12;
    const int per_stage = std::max(1, (grid.max_iters + stages - 1) / stages);
    double stale_best = res.value;
    int stale_stages = 0;
    int remaining = grid.max_iters;
    bool live = true;
    for (int s = 0; s < stages && live && remaining > 0; ++s) {
      const double eta = grid.step0 / double(1 << s);
      VectorXd avg_w = VectorXd::Zero(prob.nw), avg_v = VectorXd::Zero(prob.nv);
      int avg_len = 0;
      const int span = std::min(per_stage, remaining);
      for (int t = 0; t < span; ++t) {
        if (!mirror_step(w, prob.grad_w(w, v), eta)) { live = false; break; }
        if (!mirror_step(v, prob.grad_v(w, v), eta)) { live = false; break; }
        --remaining;
        consider(w, v);
        if (4 * t >= span) {
          avg_w += w;
          avg_v += v;
          ++avg_len;
        }
      }
      if (live && avg_len > 0) {
        w = avg_w / avg_len;
        v = avg_v / avg_len;
        consider(w, v);  // averages of simplex points stay on the simplex
      }
      // Early stages take saturated steps and orbit coarsely, so a flat
      // stage means nothing there.  Once the step is fine, two whole stages
      // without measurable progress mean this restart has settled.
      if (res.value > stale_best + 1e-12) {
        stale_best = res.value;
        stale_stages = 0;
      } else if (s >= 6 && ++stale_stages >= 2) {
        live = false;
      }
    }
    if (live && remaining == 0) res.iteration_limit = true;
  }

  std::vector<double> wl(best_w.data(), best_w.data() + best_w.size());
  std::vector<double> wr(best_v.data(), best_v.data() + best_v.size());
  res.argmax = {atomic(sx, wl), atomic(sy, wr)};
  return res;
}

}  // namespace detail

inline SupResult varadhan_sup(const InteractionKernel& kernel, const MinFunctional& f,
                              const SimplexGrid& grid) {
  if (grid.support.empty())
    throw std::invalid_argument("varadhan_sup: empty support grid");
  if (f.components.empty())
    throw std::invalid_argument("varadhan_sup: empty functional");
  const std::vector<double>& sx = grid.support;
  const std::vector<double>& sy = grid.support_y ? *grid.support_y : grid.support;
  const int nw = static_cast<int>(sx.size()), nv = static_cast<int>(sy.size());

  std::vector<detail::MatrixXd> A(f.components.size());
  for (std::size_t r = 0; r < f.components.size(); ++r) {
    A[r].resize(nw, nv);
    for (int i = 0; i < nw; ++i)
      for (int j = 0; j < nv; ++j) A[r](i, j) = f.components[r].f(sx[i], sy[j]);
  }
  detail::MatrixXd K(nw, nv);
  for (int i = 0; i < nw; ++i)
    for (int j = 0; j < nv; ++j) K(i, j) = kernel.eval_k(sx[i], sy[j]);

  auto active = [&, A](const detail::VectorXd& w, const detail::VectorXd& v) {
    std::size_t arg = 0;
    double best = kInf;
    for (std::size_t r = 0; r < A.size(); ++r) {
      const double val = detail::weighted_form(w, A[r], v);
      if (val < best) { best = val; arg = r; }
    }
    return arg;
  };

  detail::AscentProblem prob;
  prob.nw = nw;
  prob.nv = nv;
  prob.value = [&A, &K](const detail::VectorXd& w, const detail::VectorXd& v) {
    double m = kInf;
    for (const auto& Ar : A) m = std::min(m, detail::weighted_form(w, Ar, v));
    const double energy = detail::weighted_form(w, K, v);
    return std::isinf(energy) ? -kInf : m - energy;
  };
  prob.grad_w = [&, active](const detail::VectorXd& w, const detail::VectorXd& v) {
    const detail::MatrixXd& Ar = A[active(w, v)];
    return detail::VectorXd(detail::inf_matvec(Ar, v) - detail::inf_matvec(K, v));
  };
  prob.grad_v = [&, active](const detail::VectorXd& w, const detail::VectorXd& v) {
    const detail::MatrixXd& Ar = A[active(w, v)];
    return detail::VectorXd(detail::inf_matvec(Ar.transpose(), w) -
                            detail::inf_matvec(K.transpose(), w));
  };
  return detail::ascend(prob, grid, sx, sy);
}

inline double L_of_phi(const RateContext& ctx, const MinFunctional& f,
                       const SimplexGrid& grid) {
  return varadhan_sup(ctx.kernel, f, grid).value + ctx.I0;
}

// ---- Monte-Carlo counterpart ----------------------------------------------

struct SamplerSpec {
  InteractionKernel kernel;
  bool exact = true;  // exact sampler (gaussian); otherwise Metropolis
  McmcConfig mcmc;    // used when exact == false
};

inline SamplerSpec make_sampler_spec(InteractionKernel kernel) {
  SamplerSpec s;
  s.exact = kernel.kind == KernelKind::gaussian;
  s.kernel = std::move(kernel);
  return s;
}

struct McLogMgf {
  double estimate = 0.0;
  double stderr_est = 0.0;
};

// (1/n^2) log mean exp(n^2 Phi(mu_hat_n)) with log-sum-exp stabilization and
// a delta-method stderr on the log. Replicas use per-sample derived seeds and
// per-slot storage, so the result is independent of worker count.
inline McLogMgf mc_log_mgf(const SamplerSpec& spec, const MinFunctional& f, int n,
                           long num_samples, std::uint64_t rng_seed,
                           unsigned workers = 1) {
  if (n < 1 || num_samples < 1)
    throw std::invalid_argument("mc_log_mgf: need n >= 1 and num_samples >= 1");
  std::vector<double> t(num_samples);
  parallel_for(static_cast<std::size_t>(num_samples), workers, [&](std::size_t s) {
    Ensemble e;
    if (spec.exact) {
      Engine eng = make_engine(rng_seed, streams::mc_mgf, s);
      e = sample_gaussian_exact(spec.kernel.theta, n, eng);
    } else {
      McmcConfig cfg = spec.mcmc;
      cfg.seed = rng_seed;
      e = sample_mcmc(spec.kernel, n, cfg, /*replica=*/s).e;
    }
    t[s] = double(n) * double(n) * phi(f, empirical(e).joint);
  });
  double M = -kInf;
  for (double v : t) M = std::max(M, v);
  KahanSum sum1, sum2;
  for (double v : t) {
    const double z = std::exp(v - M);
    sum1.add(z);
    sum2.add(z * z);
  }
  const double S = double(num_samples);
  const double m1 = sum1.value() / S;
  McLogMgf out;
  out.estimate = (M + std::log(m1)) / (double(n) * double(n));
  if (num_samples > 1) {
    const double var = std::max(0.0, (sum2.value() - S * m1 * m1) / (S - 1.0));
    out.stderr_est = std::sqrt(var / S) / m1 / (double(n) * double(n));
  }
  return out;
}

// ---- Phi_b divergence bound -------------------------------------------------

struct DivergenceRow {
  double b = 0.0;
  double delta = 0.0;        // int FG dmu0 - int F dmu0 * int G dmu0
  double lower_bound = 0.0;  // b * delta - L(Phi_b)
};

// Phi_b(mu) = b (int F(x)G(y) mu(dx,dy) - int F dmu int G dmu) vanishes on
// products, so L(Phi_b) collapses to sup(-K) + I0; the ascent below evaluates
// the covariance term literally rather than assuming that identity.
inline std::vector<DivergenceRow> nonproduct_divergence(
    const RateContext& ctx, const BivariateAtomic& mu0, const Univariate& F,
    const Univariate& G, const std::vector<double>& b_values,
    const SimplexGrid& grid) {
  if (grid.support.empty())
    throw std::invalid_argument("nonproduct_divergence: empty support grid");
  double fg = 0.0, fm = 0.0, gm = 0.0;
  for (std::size_t i = 0; i < mu0.xs.size(); ++i)
    for (std::size_t j = 0; j < mu0.ys.size(); ++j) {
      const double w = mu0.weights(i, j);
      fg += w * F(mu0.xs[i]) * G(mu0.ys[j]);
      fm += w * F(mu0.xs[i]);
      gm += w * G(mu0.ys[j]);
    }
  const double delta = fg - fm * gm;
  if (!(delta > 0.0))
    throw std::invalid_argument(
        "nonproduct_divergence: delta = " + std::to_string(delta) +
        " <= 0; pick F, G positively correlated under mu0 (products always give 0)");

  const std::vector<double>& sx = grid.support;
  const std::vector<double>& sy = grid.support_y ? *grid.support_y : grid.support;
  const int nw = static_cast<int>(sx.size()), nv = static_cast<int>(sy.size());
  detail::VectorXd Fs(nw), Gs(nv);
  for (int i = 0; i < nw; ++i) Fs[i] = F(sx[i]);
  for (int j = 0; j < nv; ++j) Gs[j] = G(sy[j]);
  detail::MatrixXd K(nw, nv);
  for (int i = 0; i < nw; ++i)
    for (int j = 0; j < nv; ++j) K(i, j) = ctx.kernel.eval_k(sx[i], sy[j]);

  std::vector<DivergenceRow> rows;
  for (double b : b_values) {
    if (!(b > 0.0))
      throw std::invalid_argument("nonproduct_divergence: b values must be > 0");
    detail::AscentProblem prob;
    prob.nw = nw;
    prob.nv = nv;
    prob.value = [&, b](const detail::VectorXd& w, const detail::VectorXd& v) {
      const double mf = w.dot(Fs), mg = v.dot(Gs);
      const double cov = mf * mg - mf * mg;  // identically 0 on products
      const double energy = detail::weighted_form(w, K, v);
      return std::isinf(energy) ? -kInf : b * cov - energy;
    };
    prob.grad_w = [&, b](const detail::VectorXd&, const detail::VectorXd& v) {
      const double mg = v.dot(Gs);
      return detail::VectorXd(b * (Fs * mg - Fs * mg) - detail::inf_matvec(K, v));
    };
    prob.grad_v = [&, b](const detail::VectorXd& w, const detail::VectorXd&) {
      const double mf = w.dot(Fs);
      return detail::VectorXd(b * (Gs * mf - Gs * mf) -
                              detail::inf_matvec(K.transpose(), w));
    };
    const SupResult sup = detail::ascend(prob, grid, sx, sy);
    const double L_b = sup.value + ctx.I0;
    rows.push_back({b, delta, b * delta - L_b});
  }
  return rows;
}

}  // namespace ldpair
