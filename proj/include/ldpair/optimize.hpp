#pragma once

// Small derivative-free optimizers used throughout: dense grid scans to
// locate basins, golden-section for 1-d refinement, Nelder-Mead for 2-d.
// Nothing here is clever; the objectives are cheap and smooth away from
// kernel singularities, so robustness beats speed.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace ldpair {

struct Box {
  double xlo = 0.0, xhi = 0.0;
  double ylo = 0.0, yhi = 0.0;
};

struct MinResult {
  double x = 0.0;
  double y = 0.0;
  double value = std::numeric_limits<double>::infinity();
};

// Dense scan of f over an nx-by-ny grid including box edges.
inline MinResult grid_min_2d(const std::function<double(double, double)>& f,
                             const Box& box, int nx, int ny) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("grid_min_2d: need >=2 nodes per axis");
  MinResult best;
  const double dx = (box.xhi - box.xlo) / (nx - 1);
  const double dy = (box.yhi - box.ylo) / (ny - 1);
  for (int i = 0; i < nx; ++i) {
    const double x = box.xlo + i * dx;
    for (int j = 0; j < ny; ++j) {
      const double y = box.ylo + j * dy;
      const double v = f(x, y);
      if (v < best.value) best = {x, y, v};
    }
  }
  return best;
}

inline double golden_min_1d(const std::function<double(double)>& f, double lo,
                            double hi, double tol) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Nelder-Mead in 2-d with clamping to the box. Standard reflection /
// expansion / contraction / shrink coefficients.
inline MinResult nelder_mead_2d(const std::function<double(double, double)>& f,
                                const Box& box, double x0, double y0,
                                double scale, double tol, int max_iters = 500) {
  struct Pt { double x, y, v; };
  auto clamp = [&](double x, double y) -> std::pair<double, double> {
    return {std::clamp(x, box.xlo, box.xhi), std::clamp(y, box.ylo, box.yhi)};
  };
  auto eval = [&](double x, double y) -> Pt {
    auto [cx, cy] = clamp(x, y);
    return {cx, cy, f(cx, cy)};
  };
  std::vector<Pt> s = {eval(x0, y0), eval(x0 + scale, y0), eval(x0, y0 + scale)};
  auto order = [&]() {
    std::sort(s.begin(), s.end(), [](const Pt& a, const Pt& b) { return a.v < b.v; });
  };
  order();
  for (int it = 0; it < max_iters; ++it) {
    const double spread = std::max({std::abs(s[0].x - s[1].x), std::abs(s[0].x - s[2].x),
                                    std::abs(s[0].y - s[1].y), std::abs(s[0].y - s[2].y)});
    if (spread < tol && std::abs(s[2].v - s[0].v) < tol) break;
    const double cx = 0.5 * (s[0].x + s[1].x);
    const double cy = 0.5 * (s[0].y + s[1].y);
    Pt r = eval(cx + (cx - s[2].x), cy + (cy - s[2].y));
    if (r.v < s[0].v) {
      Pt e = eval(cx + 2.0 * (cx - s[2].x), cy + 2.0 * (cy - s[2].y));
      s[2] = (e.v < r.v) ? e : r;
    } else if (r.v < s[1].v) {
      s[2] = r;
    } else {
      Pt c = eval(cx + 0.5 * (s[2].x - cx), cy + 0.5 * (s[2].y - cy));
      if (c.v < s[2].v) {
        s[2] = c;
      } else {
        s[1] = eval(s[0].x + 0.5 * (s[1].x - s[0].x), s[0].y + 0.5 * (s[1].y - s[0].y));
        s[2] = eval(s[0].x + 0.5 * (s[2].x - s[0].x), s[0].y + 0.5 * (s[2].y - s[0].y));
      }
    }
    order();
  }
  return {s[0].x, s[0].y, s[0].v};
}

}  // namespace ldpair
