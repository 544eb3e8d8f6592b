#pragma once

// Interaction kernels g(x,y) = exp(-k(x,y)) and their k = -log g.
// Three flavors: the Gaussian coupling k = x^2+y^2-2*theta*x*y, the log-gas
// k = V(x)+W(y)-beta*log|x-y|, and a user-supplied bivariate k. +inf is a
// first-class value of k (g = 0 there), never an error.
//
// Each kernel carries a search box guaranteed to contain the minimizer of k
// (level-set containment, see make_loggas_box) and a constant C >= 0 with
// k >= -C, certified by refined minimization at construction.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "optimize.hpp"

namespace ldpair {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

using Univariate = std::function<double(double)>;
using Bivariate = std::function<double(double, double)>;

enum class KernelKind { gaussian, loggas, custom };

struct InteractionKernel {
  KernelKind kind = KernelKind::gaussian;
  double theta = 0.0;          // gaussian coupling strength, |theta| < 1
  double beta = 0.0;           // singularity exponent; 0 for gaussian
  Univariate V, W;             // log-gas confining potentials
  Bivariate custom_k;          // custom kernels only
  double lower_bound_C = 0.0;  // k >= -C everywhere (certified at build)
  Box search_box;
  std::string spec;            // compact description echoed into outputs

  double eval_k(double x, double y) const {
    switch (kind) {
      case KernelKind::gaussian:
        // theta * (x*y) keeps the evaluation bitwise symmetric in (x, y)
        return x * x + y * y - 2.0 * theta * (x * y);
      case KernelKind::loggas: {
        if (x == y) return kInf;
        return V(x) + W(y) - beta * std::log(std::abs(x - y));
      }
      case KernelKind::custom:
        return custom_k(x, y);
    }
    return kInf;  // unreachable
  }

  double eval_g(double x, double y) const {
    const double k = eval_k(x, y);
    return std::isinf(k) && k > 0 ? 0.0 : std::exp(-k);
  }

  // The part of k that stays finite across the diagonal. For the log-gas this
  // is V(x)+W(y) exactly; for a custom kernel we can only add back the
  // declared singularity, which is ill-defined at x == y itself.
  double smooth_part(double x, double y) const {
    switch (kind) {
      case KernelKind::gaussian:
        return eval_k(x, y);
      case KernelKind::loggas:
        return V(x) + W(y);
      case KernelKind::custom:
        if (beta == 0.0) return custom_k(x, y);
        return custom_k(x, y) + beta * std::log(std::abs(x - y));
    }
    return kInf;  // unreachable
  }
};

struct InfimumResult {
  double value = kInf;
  double x = 0.0;
  double y = 0.0;
};

// Coarse 401x401 scan of the search box, then Nelder-Mead from the best grid
// node. The grid value is a certificate: refinement can only improve on it.
inline InfimumResult infimum_k(const InteractionKernel& kernel, double tol,
                               int grid_nodes = 401) {
  auto f = [&](double x, double y) { return kernel.eval_k(x, y); };
  const Box& box = kernel.search_box;
  const MinResult coarse = grid_min_2d(f, box, grid_nodes, grid_nodes);
  const double hx = (box.xhi - box.xlo) / (grid_nodes - 1);
  const double hy = (box.yhi - box.ylo) / (grid_nodes - 1);
  const MinResult fine = nelder_mead_2d(f, box, coarse.x, coarse.y,
                                        std::max(hx, hy), tol, 800);
  if (fine.value > coarse.value + 1e-12)
    throw std::runtime_error("infimum_k: refinement stalled above the grid certificate");
  if (fine.value <= coarse.value) return {fine.value, fine.x, fine.y};
  return {coarse.value, coarse.x, coarse.y};
}

namespace detail {

// Smallest certified constant with k >= -C; the 1e-6 margin absorbs the gap
// between the refined minimum and the true infimum.
inline double certify_lower_bound(const InteractionKernel& kernel) {
  const InfimumResult inf = infimum_k(kernel, 1e-9, 201);
  return std::max(0.0, 1e-6 - inf.value);
}

// Interval {phi <= threshold} located by outward doubling plus a fine scan.
// phi must grow beyond any level eventually (the caller asserts growth).
inline std::pair<double, double> sublevel_interval(const Univariate& phi,
                                                   double threshold) {
  double L = 1.0;
  auto outer_dips_below = [&](double R) {
    for (int i = 0; i <= 64; ++i) {
      const double t = 0.5 * R + (0.5 * R) * i / 64.0;
      if (phi(t) <= threshold || phi(-t) <= threshold) return true;
    }
    return false;
  };
  while (L < 1e6 && outer_dips_below(L)) L *= 2.0;
  const int nodes = 4001;
  double lo = kInf, hi = -kInf;
  for (int i = 0; i < nodes; ++i) {
    const double x = -L + 2.0 * L * i / (nodes - 1);
    if (phi(x) <= threshold) {
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
  }
  if (lo > hi) { lo = -1.0; hi = 1.0; }  // level set below grid resolution
  const double pad = 2.0 * L / (nodes - 1) + 0.5;
  return {lo - pad, hi + pad};
}

// Level-set containment for the log-gas: |x-y| <= sqrt(1+x^2)*sqrt(1+y^2)
// gives k(x,y) >= phi_V(x) + phi_W(y) with phi_V(x) = V(x) - (beta/2)*log(1+x^2),
// so any minimizer satisfies phi_V(x*) <= U - min(phi_W) for every achieved
// value U of k. The +10 widens the box well past the minimizer.
inline Box make_loggas_box(double beta, const Univariate& V, const Univariate& W) {
  auto phiV = [&](double x) { return V(x) - 0.5 * beta * std::log1p(x * x); };
  auto phiW = [&](double y) { return W(y) - 0.5 * beta * std::log1p(y * y); };
  auto scan_min = [](const Univariate& phi) {
    double L = 8.0, m = kInf;
    for (;;) {
      m = kInf;
      for (int i = 0; i < 2001; ++i) m = std::min(m, phi(-L + 2.0 * L * i / 2000.0));
      if ((phi(L) > m + 25.0 && phi(-L) > m + 25.0) || L >= 1e6) return m;
      L *= 2.0;
    }
  };
  const double mV = scan_min(phiV), mW = scan_min(phiW);
  const auto provisional_x = sublevel_interval(phiV, mV + 40.0);
  const auto provisional_y = sublevel_interval(phiW, mW + 40.0);
  // Achieved value of k on a coarse grid bounds the infimum from above.
  double U = kInf;
  for (int i = 0; i < 161; ++i) {
    const double x = provisional_x.first +
                     (provisional_x.second - provisional_x.first) * i / 160.0;
    for (int j = 0; j < 161; ++j) {
      const double y = provisional_y.first +
                       (provisional_y.second - provisional_y.first) * j / 160.0;
      if (x == y) continue;
      U = std::min(U, V(x) + W(y) - beta * std::log(std::abs(x - y)));
    }
  }
  const auto xr = sublevel_interval(phiV, U - mW + 10.0);
  const auto yr = sublevel_interval(phiW, U - mV + 10.0);
  return {xr.first, xr.second, yr.first, yr.second};
}

}  // namespace detail

inline InteractionKernel gaussian_kernel(double theta) {
  if (!(std::abs(theta) < 1.0))
    throw std::domain_error("gaussian_kernel: |theta| must be < 1 (g is not integrable otherwise)");
  InteractionKernel k;
  k.kind = KernelKind::gaussian;
  k.theta = theta;
  k.beta = 0.0;
  k.lower_bound_C = 0.0;  // k = (x-theta*y)^2 + (1-theta^2)*y^2 >= 0
  const double R = 3.0 / (1.0 - std::abs(theta));
  k.search_box = {-R, R, -R, R};
  k.spec = "gaussian:theta=" + std::to_string(theta);
  return k;
}

inline InteractionKernel loggas_kernel(double beta, Univariate V, Univariate W,
                                       std::string spec = "") {
  if (beta < 0.0) throw std::domain_error("loggas_kernel: beta must be >= 0");
  InteractionKernel k;
  k.kind = KernelKind::loggas;
  k.beta = beta;
  k.V = std::move(V);
  k.W = std::move(W);
  k.search_box = detail::make_loggas_box(beta, k.V, k.W);
  k.lower_bound_C = detail::certify_lower_bound(k);
  k.spec = spec.empty() ? "loggas:beta=" + std::to_string(beta) : std::move(spec);
  return k;
}

// Default potentials V = W = u^2.
inline InteractionKernel loggas_kernel(double beta) {
  return loggas_kernel(beta, [](double u) { return u * u; },
                       [](double u) { return u * u; });
}

inline InteractionKernel custom_kernel(Bivariate k_fn, double beta,
                                       Box search_box = {-10.0, 10.0, -10.0, 10.0},
                                       std::string spec = "custom") {
  if (beta < 0.0) throw std::domain_error("custom_kernel: beta must be >= 0");
  InteractionKernel k;
  k.kind = KernelKind::custom;
  k.beta = beta;
  k.custom_k = std::move(k_fn);
  k.search_box = search_box;
  k.lower_bound_C = detail::certify_lower_bound(k);
  k.spec = std::move(spec);
  return k;
}

// ---- assumption checks ----------------------------------------------------

enum class Verdict { pass, fail, cannot_certify };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::cannot_certify: return "cannot_certify";
  }
  return "?";
}

struct CheckGrid {
  int nodes = 241;  // per axis, per box scale
};

struct AssumptionReport {
  Verdict a1 = Verdict::fail;  // g >= 0 (and finite) on the grid
  Verdict a2 = Verdict::fail;  // integrability of g^alpha with decaying tails
  Verdict a3 = Verdict::fail;  // k >= -C on the grid
  Verdict a4 = Verdict::fail;  // probed level sets {k <= a} bounded
  Verdict a5 = Verdict::fail;  // smooth part continuous across the diagonal
  std::vector<std::pair<double, double>> M_alpha;  // (alpha, quadrature of g^alpha)
  std::vector<std::string> notes;

  bool all_pass() const {
    return a1 == Verdict::pass && a2 == Verdict::pass && a3 == Verdict::pass &&
           a4 == Verdict::pass && a5 == Verdict::pass;
  }
};

namespace detail {

inline Box scale_box(const Box& b, double s) {
  const double cx = 0.5 * (b.xlo + b.xhi), cy = 0.5 * (b.ylo + b.yhi);
  const double rx = 0.5 * (b.xhi - b.xlo) * s, ry = 0.5 * (b.yhi - b.ylo) * s;
  return {cx - rx, cx + rx, cy - ry, cy + ry};
}

// Tensor trapezoid of g^alpha over a box. g is bounded, so this converges;
// the log-gas zero along the diagonal is harmless.
inline double trapezoid_g_alpha(const InteractionKernel& k, double alpha,
                                const Box& b, int nodes) {
  const double hx = (b.xhi - b.xlo) / (nodes - 1);
  const double hy = (b.yhi - b.ylo) / (nodes - 1);
  double total = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double x = b.xlo + i * hx;
    const double wx = (i == 0 || i == nodes - 1) ? 0.5 : 1.0;
    double row = 0.0;
    for (int j = 0; j < nodes; ++j) {
      const double y = b.ylo + j * hy;
      const double wy = (j == 0 || j == nodes - 1) ? 0.5 : 1.0;
      const double kk = k.eval_k(x, y);
      row += wy * (std::isinf(kk) && kk > 0 ? 0.0 : std::exp(-alpha * kk));
    }
    total += wx * row;
  }
  return total * hx * hy;
}

inline double boundary_min_k(const InteractionKernel& k, const Box& b, int per_edge) {
  double m = kInf;
  for (int i = 0; i <= per_edge; ++i) {
    const double tx = b.xlo + (b.xhi - b.xlo) * i / per_edge;
    const double ty = b.ylo + (b.yhi - b.ylo) * i / per_edge;
    m = std::min({m, k.eval_k(tx, b.ylo), k.eval_k(tx, b.yhi),
                  k.eval_k(b.xlo, ty), k.eval_k(b.xhi, ty)});
  }
  return m;
}

}  // namespace detail

inline AssumptionReport check_assumptions(const InteractionKernel& kernel,
                                          const std::vector<double>& alphas,
                                          const CheckGrid& grid = {}) {
  AssumptionReport rep;
  const Box big = detail::scale_box(kernel.search_box, 3.375);

  // A1: g nonnegative and finite.
  {
    bool ok = true;
    const int n = grid.nodes;
    for (int i = 0; i < n && ok; ++i)
      for (int j = 0; j < n && ok; ++j) {
        const double g = kernel.eval_g(big.xlo + (big.xhi - big.xlo) * i / (n - 1),
                                       big.ylo + (big.yhi - big.ylo) * j / (n - 1));
        if (!(g >= 0.0) || std::isinf(g)) ok = false;
      }
    rep.a1 = ok ? Verdict::pass : Verdict::fail;
  }

  // A2: truncated quadrature of g^alpha over boxes scaled 1, 1.5, 2.25, 3.375.
  // Annulus contributions must be finite and geometrically decaying; slow
  // decay earns an honest cannot_certify instead of a guess.
  {
    Verdict worst = Verdict::pass;
    for (double alpha : alphas) {
      if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("check_assumptions: alphas must lie in (0,1]");
      const double scales[4] = {1.0, 1.5, 2.25, 3.375};
      double I[4];
      bool finite = true;
      for (int s = 0; s < 4; ++s) {
        I[s] = detail::trapezoid_g_alpha(kernel, alpha,
                                         detail::scale_box(kernel.search_box, scales[s]),
                                         grid.nodes);
        if (!std::isfinite(I[s])) finite = false;
      }
      rep.M_alpha.emplace_back(alpha, I[3]);
      Verdict v;
      if (!finite) {
        v = Verdict::fail;
      } else {
        const double A2 = I[2] - I[1], A3 = I[3] - I[2];
        const double tiny = 1e-12 * std::max(I[3], 1.0);
        if (A3 <= tiny) v = Verdict::pass;
        else if (A3 <= 0.8 * A2) v = Verdict::pass;
        else if (A3 >= 1.02 * A2) v = Verdict::fail;
        else v = Verdict::cannot_certify;
      }
      if (v == Verdict::fail || (v == Verdict::cannot_certify && worst == Verdict::pass))
        worst = v;
      if (v != Verdict::pass)
        rep.notes.push_back("A2 alpha=" + std::to_string(alpha) + ": " + verdict_name(v));
    }
    rep.a2 = worst;
  }

  // A3: k >= -C on the widened grid.
  {
    bool ok = true;
    const int n = grid.nodes;
    for (int i = 0; i < n && ok; ++i)
      for (int j = 0; j < n && ok; ++j) {
        const double kk = kernel.eval_k(big.xlo + (big.xhi - big.xlo) * i / (n - 1),
                                        big.ylo + (big.yhi - big.ylo) * j / (n - 1));
        if (std::isnan(kk) || kk < -kernel.lower_bound_C - 1e-9) ok = false;
      }
    rep.a3 = ok ? Verdict::pass : Verdict::fail;
  }

  // A4: for each level a, expand the box until two nested boundary rings both
  // sit above a; give up after 8 doublings.
  {
    bool all_ok = true;
    for (double a : {1.0, 10.0, 100.0}) {
      Box b = kernel.search_box;
      bool certified = false;
      for (int d = 0; d < 8 && !certified; ++d) {
        if (detail::boundary_min_k(kernel, b, 256) > a &&
            detail::boundary_min_k(kernel, detail::scale_box(b, 2.0), 256) > a)
          certified = true;
        else
          b = detail::scale_box(b, 2.0);
      }
      if (!certified) {
        all_ok = false;
        rep.notes.push_back("A4 level " + std::to_string(a) + ": ring never cleared the level");
      }
    }
    rep.a4 = all_ok ? Verdict::pass : Verdict::fail;
  }

  // A5: smooth part across the diagonal: s(x-h/2, x+h/2) stays finite and
  // settles as h shrinks over five decades.
  {
    bool ok = true;
    const double lo = std::max(kernel.search_box.xlo, kernel.search_box.ylo);
    const double hi = std::min(kernel.search_box.xhi, kernel.search_box.yhi);
    if (lo < hi) {
      for (int i = 0; i <= 20 && ok; ++i) {
        const double x = lo + (hi - lo) * i / 20.0;
        double prev = 0.0;
        for (int e = 1; e <= 5 && ok; ++e) {
          const double h = std::pow(10.0, -e);
          const double s = kernel.smooth_part(x - 0.5 * h, x + 0.5 * h);
          if (!std::isfinite(s)) ok = false;
          else if (e > 1 && std::abs(s - prev) > 0.1) ok = false;
          prev = s;
        }
      }
    } else {
      rep.notes.push_back("A5: search box does not straddle the diagonal; nothing to check");
    }
    rep.a5 = ok ? Verdict::pass : Verdict::fail;
  }

  return rep;
}

}  // namespace ldpair
