#pragma once

// Shared test oracles, independent of the code under test:
//  - Gauss-Legendre quadrature (1-D composite, 2-D tensor-per-tile, and the
//    4-D gaussian pair integral via the sum-variable factorization),
//  - brute-force supremum over the simplex lattice (all weight vectors with
//    entries i/levels), the reference the ascent optimizer must match,
//  - reference constants frozen from 50-digit arithmetic (mpmath).

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ldpair/kernel.hpp"
#include "ldpair/varadhan.hpp"

namespace oracle {

// ---- frozen reference constants (50-digit mpmath) ----------------------------

// log P(mean(x) >= 0.5) for the gaussian(0.5) pair ensemble,
// mean(x) ~ N(0, 1/(2 n^2 (1 - theta^2))).
inline constexpr double kLogTailN2 = -2.2042279149171611;
inline constexpr double kLogTailN4 = -4.940231927345535;
inline constexpr double kLogTailN8 = -14.545988948923865;
inline constexpr double kLogTailN32 = -195.89684723580589;
inline constexpr double kLogTailN128 = -3077.2807168648608;
inline constexpr double kRateN32 = 0.19130551487871669;    // -logP / n^2
inline constexpr double kRateN128 = 0.18782230937895879;

// log Z_n for theta = 0.5: n log(pi/n) - (1/2) log(1 - theta^2).
inline constexpr double kLogZ1Theta05 = 1.2885709220752906;
inline constexpr double kLogZ2Theta05 = 1.0470064468048002;
inline constexpr double kZ2Theta05 = 2.8491093788820282;

// (beta/2)(1 - log beta) and the argmin coordinate sqrt(beta)/2.
inline constexpr double kI0LogGasHalf = 0.42328679513998633;
inline constexpr double kI0LogGas1 = 0.5;
inline constexpr double kI0LogGas2 = 0.30685281944005469;
inline constexpr double kI0LogGas4 = -0.77258872223978124;

// ---- Gauss-Legendre ----------------------------------------------------------

// Nodes/weights on [-1, 1] by Newton iteration on the Legendre recurrence.
inline void gauss_legendre(int m, std::vector<double>& xs, std::vector<double>& ws) {
  if (m < 1) throw std::invalid_argument("gauss_legendre: m >= 1");
  xs.assign(m, 0.0);
  ws.assign(m, 0.0);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= m; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = m * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    xs[i] = -x;
    xs[m - 1 - i] = x;
    ws[i] = ws[m - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
}

// Composite 1-D quadrature with explicit panel edges.
inline double gl_integrate(const std::function<double(double)>& f,
                           const std::vector<double>& edges, int nodes) {
  std::vector<double> t, a;
  gauss_legendre(nodes, t, a);
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
    const double mid = 0.5 * (edges[p] + edges[p + 1]);
    const double half = 0.5 * (edges[p + 1] - edges[p]);
    for (int i = 0; i < nodes; ++i) total += half * a[i] * f(mid + half * t[i]);
  }
  return total;
}

// Tensor quadrature over the tile grid xedges x yedges. Tile boundaries let
// integrands with axis-aligned kinks (clamps) stay smooth per tile.
inline double gl_integrate_2d(const std::function<double(double, double)>& f,
                              const std::vector<double>& xedges,
                              const std::vector<double>& yedges, int nodes) {
  std::vector<double> t, a;
  gauss_legendre(nodes, t, a);
  double total = 0.0;
  for (std::size_t px = 0; px + 1 < xedges.size(); ++px)
    for (std::size_t py = 0; py + 1 < yedges.size(); ++py) {
      const double mx = 0.5 * (xedges[px] + xedges[px + 1]);
      const double hx = 0.5 * (xedges[px + 1] - xedges[px]);
      const double my = 0.5 * (yedges[py] + yedges[py + 1]);
      const double hy = 0.5 * (yedges[py + 1] - yedges[py]);
      for (int i = 0; i < nodes; ++i)
        for (int j = 0; j < nodes; ++j)
          total += hx * hy * a[i] * a[j] * f(mx + hx * t[i], my + hy * t[j]);
    }
  return total;
}

// Z_2(theta) = int exp(-2|x|^2 - 2|y|^2 + 2 theta (x1+x2)(y1+y2)) over R^4.
// The coupling only sees the sums, so tabulate every (node, node) pair of one
// axis as (weight, sum) and contract the two pair grids: an exact
// reorganization of the full 4-D tensor rule.
inline double z2_gaussian(double theta, double L = 4.5, int nodes = 48) {
  std::vector<double> t, a;
  gauss_legendre(nodes, t, a);
  std::vector<double> x(nodes), w(nodes);
  for (int i = 0; i < nodes; ++i) {
    x[i] = L * t[i];
    w[i] = L * a[i];
  }
  const int P = nodes * nodes;
  std::vector<double> W(P), S(P);
  for (int i = 0; i < nodes; ++i)
    for (int j = 0; j < nodes; ++j) {
      W[i * nodes + j] = w[i] * w[j] * std::exp(-2.0 * (x[i] * x[i] + x[j] * x[j]));
      S[i * nodes + j] = x[i] + x[j];
    }
  double z = 0.0, comp = 0.0;
  for (int p = 0; p < P; ++p)
    for (int q = 0; q < P; ++q) {
      const double term = W[p] * W[q] * std::exp(2.0 * theta * S[p] * S[q]);
      const double tsum = z + term;
      comp += std::abs(z) >= std::abs(term) ? (z - tsum) + term : (term - tsum) + z;
      z = tsum;
    }
  return z + comp;
}

// log E exp(phi(x, y)) for a single pair under the Gibbs density
// exp(-k(x,y))/Z_1, via the ratio of two tile-grid quadratures.
inline double log_mean_exp_phi_n1(const ldpair::InteractionKernel& kern,
                                  const std::function<double(double, double)>& phi_xy,
                                  const std::vector<double>& xedges,
                                  const std::vector<double>& yedges, int nodes = 32) {
  const double num = gl_integrate_2d(
      [&](double x, double y) { return std::exp(phi_xy(x, y) - kern.eval_k(x, y)); },
      xedges, yedges, nodes);
  const double den = gl_integrate_2d(
      [&](double x, double y) { return std::exp(-kern.eval_k(x, y)); }, xedges,
      yedges, nodes);
  return std::log(num) - std::log(den);
}

// ---- simplex lattice ---------------------------------------------------------

// All vectors of `parts` nonnegative integers summing to `total`.
inline void for_each_composition(int total, int parts,
                                 const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> c(parts, 0);
  std::function<void(int, int)> rec = [&](int pos, int rest) {
    if (pos == parts - 1) {
      c[pos] = rest;
      fn(c);
      return;
    }
    for (int v = 0; v <= rest; ++v) {
      c[pos] = v;
      rec(pos + 1, rest - v);
    }
  };
  if (parts >= 1) rec(0, total);
}

// Brute-force sup of min_r <w, A_r v> - <w, K v> over the weight lattice
// {i/levels} on both simplices: the certified reference for the ascent
// optimizer on small supports.
inline double lattice_sup(const ldpair::InteractionKernel& kern,
                          const ldpair::MinFunctional& f,
                          const std::vector<double>& sx, const std::vector<double>& sy,
                          int levels) {
  const int nw = static_cast<int>(sx.size()), nv = static_cast<int>(sy.size());
  const std::size_t R = f.components.size();
  std::vector<Eigen::MatrixXd> A(R, Eigen::MatrixXd(nw, nv));
  Eigen::MatrixXd K(nw, nv);
  for (int i = 0; i < nw; ++i)
    for (int j = 0; j < nv; ++j) {
      for (std::size_t r = 0; r < R; ++r) A[r](i, j) = f.components[r].f(sx[i], sy[j]);
      K(i, j) = kern.eval_k(sx[i], sy[j]);
    }

  double best = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd w(nw), v(nv);
  std::vector<Eigen::RowVectorXd> wA(R);
  for_each_composition(levels, nw, [&](const std::vector<int>& cw) {
    for (int i = 0; i < nw; ++i) w[i] = double(cw[i]) / levels;
    for (std::size_t r = 0; r < R; ++r) wA[r] = w.transpose() * A[r];
    const Eigen::RowVectorXd wK = w.transpose() * K;
    for_each_composition(levels, nv, [&](const std::vector<int>& cv) {
      for (int j = 0; j < nv; ++j) v[j] = double(cv[j]) / levels;
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < R; ++r) m = std::min(m, wA[r].dot(v));
      const double val = m - wK.dot(v);
      if (std::isfinite(val) && val > best) best = val;
    });
  });
  return best;
}

}  // namespace oracle
