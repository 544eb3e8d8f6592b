#pragma once

// Probability measures on the line in two finite forms: atomic (sorted atoms
// with merged duplicates) and gridded densities (uniform grid, trapezoid
// quadrature). Also the equal-mass quantile partition and the uniform
// convolution smoothing nu * Uniform[-eps, eps].

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ensemble.hpp"

namespace ldpair {

struct AtomicMeasure {
  std::vector<double> atoms;    // strictly increasing
  std::vector<double> weights;  // nonnegative, sum 1
};

struct ProductMeasure {
  AtomicMeasure left;   // nu_1
  AtomicMeasure right;  // nu_2
};

// Sorts, merges exactly-equal atoms (no epsilon merging: that would silently
// move mass), and normalizes.
inline AtomicMeasure atomic(const std::vector<double>& points,
                            const std::vector<double>& weights) {
  if (points.empty() || points.size() != weights.size())
    throw std::invalid_argument("atomic: need equally many points and weights, at least one");
  std::vector<std::size_t> idx(points.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  AtomicMeasure nu;
  double total = 0.0;
  for (std::size_t i : idx) {
    const double a = points[i], w = weights[i];
    if (!std::isfinite(a)) throw std::invalid_argument("atomic: atoms must be finite");
    if (!(w >= 0.0)) throw std::invalid_argument("atomic: weights must be >= 0");
    if (!nu.atoms.empty() && nu.atoms.back() == a)
      nu.weights.back() += w;
    else {
      nu.atoms.push_back(a);
      nu.weights.push_back(w);
    }
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("atomic: total weight must be positive");
  for (double& w : nu.weights) w /= total;
  return nu;
}

inline AtomicMeasure uniform_atoms(const std::vector<double>& points) {
  return atomic(points, std::vector<double>(points.size(), 1.0));
}

inline double moment(const AtomicMeasure& nu, int r) {
  if (r < 0) throw std::invalid_argument("moment: order must be >= 0");
  double s = 0.0;
  for (std::size_t i = 0; i < nu.atoms.size(); ++i)
    s += nu.weights[i] * std::pow(nu.atoms[i], r);
  return s;
}

struct GriddedDensity {
  double x0 = 0.0;
  double step = 1.0;
  std::vector<double> values;  // density samples at x0 + i*step

  double node(std::size_t i) const { return x0 + static_cast<double>(i) * step; }
};

inline double gd_mass(const GriddedDensity& d) {
  if (d.values.size() < 2) return 0.0;
  double s = 0.5 * (d.values.front() + d.values.back());
  for (std::size_t i = 1; i + 1 < d.values.size(); ++i) s += d.values[i];
  return s * d.step;
}

inline double gd_moment(const GriddedDensity& d, int r) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    const double w = (i == 0 || i + 1 == d.values.size()) ? 0.5 : 1.0;
    s += w * d.values[i] * std::pow(d.node(i), r);
  }
  return s * d.step;
}

inline GriddedDensity gridded(double x0, double step, std::vector<double> values) {
  if (step <= 0.0 || values.size() < 2)
    throw std::invalid_argument("gridded: need positive step and >= 2 samples");
  for (double v : values)
    if (!(v >= 0.0)) throw std::invalid_argument("gridded: density must be >= 0");
  GriddedDensity d{x0, step, std::move(values)};
  if (std::abs(gd_mass(d) - 1.0) > 1e-9)
    throw std::invalid_argument("gridded: trapezoid mass must be 1 within 1e-9");
  return d;
}

// Equal-mass partition: points a_0 < ... < a_n with each cell carrying mass
// 1/n under the trapezoid CDF; a_0 and a_n are the ends of the positive-mass
// cell range. Interior points come from linear interpolation of the node CDF,
// good to O(step) * density variation.
inline std::vector<double> quantile_partition(const GriddedDensity& d, int n) {
  if (n < 1) throw std::invalid_argument("quantile_partition: n must be >= 1");
  const std::size_t cells = d.values.size() - 1;
  // CDF at nodes and the count of cells that actually carry mass.
  std::vector<double> cdf(d.values.size(), 0.0);
  std::size_t positive_cells = 0, first_pos = cells, last_pos = 0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double cell = 0.5 * (d.values[i] + d.values[i + 1]) * d.step;
    cdf[i + 1] = cdf[i] + cell;
    if (cell > 0.0) {
      ++positive_cells;
      first_pos = std::min(first_pos, i);
      last_pos = std::max(last_pos, i + 1);
    }
  }
  if (positive_cells == 0) throw std::invalid_argument("quantile_partition: density is zero");
  if (static_cast<std::size_t>(n) > positive_cells)
    throw std::invalid_argument("quantile_partition: n exceeds the grid resolution");
  const double total = cdf.back();
  std::vector<double> a(n + 1);
  a[0] = d.node(first_pos);
  a[n] = d.node(last_pos);
  std::size_t j = 0;
  for (int q = 1; q < n; ++q) {
    const double target = total * q / n;
    while (j + 1 < cdf.size() && cdf[j + 1] < target) ++j;
    const double span = cdf[j + 1] - cdf[j];
    const double frac = span > 0.0 ? (target - cdf[j]) / span : 0.0;
    a[q] = d.node(j) + frac * d.step;
  }
  return a;
}

// Density of nu * Uniform[-eps, eps], sampled as exact cell averages of the
// smoothed CDF. Cell averaging telescopes, so the trapezoid mass is exactly 1
// (the two padded end nodes are zero).
inline GriddedDensity smooth(const AtomicMeasure& nu, double eps, double step) {
  if (!(eps > 0.0)) throw std::invalid_argument("smooth: eps must be > 0");
  if (!(step > 0.0) || step > eps / 8.0)
    throw std::invalid_argument("smooth: need 0 < step <= eps/8 to resolve plateau edges");
  auto cdf = [&](double t) {
    double s = 0.0;
    for (std::size_t i = 0; i < nu.atoms.size(); ++i)
      s += nu.weights[i] *
           std::clamp((t - (nu.atoms[i] - eps)) / (2.0 * eps), 0.0, 1.0);
    return s;
  };
  const double lo = nu.atoms.front() - eps, hi = nu.atoms.back() + eps;
  const double x0 = lo - step;
  const std::size_t count =
      static_cast<std::size_t>(std::ceil((hi + step - x0) / step)) + 1;
  GriddedDensity d{x0, step, std::vector<double>(count, 0.0)};
  for (std::size_t i = 0; i < count; ++i) {
    const double x = d.node(i);
    d.values[i] = (cdf(x + 0.5 * step) - cdf(x - 0.5 * step)) / step;
  }
  return d;
}

struct Empirical {
  ProductMeasure joint;      // product of the two marginal empiricals
  AtomicMeasure marginal_x;  // nu_hat
  AtomicMeasure average;     // sigma_hat = (nu_hat_x + nu_hat_y)/2
};

inline Empirical empirical(const Ensemble& e) {
  e.validate();
  Empirical out;
  out.marginal_x = uniform_atoms(e.x);
  out.joint.left = out.marginal_x;
  out.joint.right = uniform_atoms(e.y);
  std::vector<double> both = e.x;
  both.insert(both.end(), e.y.begin(), e.y.end());
  out.average = uniform_atoms(both);
  return out;
}

}  // namespace ldpair
