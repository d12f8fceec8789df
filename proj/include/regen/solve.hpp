#pragma once

// Scalar root finding and one-dimensional search.

#include <cmath>
#include <cstddef>
#include <limits>
#include <utility>

namespace regen {

struct RootOptions {
  double x_tol = 1e-10;  // absolute bracket width, scaled by max(1, |x|)
  std::size_t max_iter = 300;
};

/// Smallest x in [lo, hi] with g(x) >= 0 for a nondecreasing g, found by
/// bisection with Newton steps whenever dg(x) > 1e-8 and the step stays inside
/// the bracket. Requires g(lo) < 0 <= g(hi) (otherwise returns an endpoint).
template <class G, class D>
double solve_increasing(G&& g, D&& dg, double lo, double hi, const RootOptions& opt = {}) {
  if (g(lo) >= 0.0) return lo;
  if (g(hi) < 0.0) return hi;
  double x = 0.5 * (lo + hi);
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    const double gx = g(x);
    if (gx >= 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double width = hi - lo;
    if (width <= opt.x_tol * std::max(1.0, std::abs(x))) break;

    double next = 0.5 * (lo + hi);
    const double d = dg(x);
    if (d > 1e-8 && std::isfinite(d)) {
      const double step = gx / d;
      // Converged Newton iterate: polish is below floating resolution.
      if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(x), 1e-300)) {
        return x;
      }
      const double cand = x - step;
      if (cand > lo && cand < hi) next = cand;
    }
    if (next == x) next = 0.5 * (lo + hi);
    x = next;
  }
  return hi;
}

/// Upper end of a bracket [lo, x] with g(x) >= 0, doubling the distance from lo.
template <class G>
double expand_bracket(G&& g, double lo, double step) {
  double hi = lo + step;
  for (int i = 0; i < 2000 && g(hi) < 0.0; ++i) {
    step *= 2.0;
    hi = lo + step;
    if (!std::isfinite(hi)) break;
  }
  return hi;
}

struct SearchResult {
  double x;
  double value;
};

/// Golden-section maximisation of a unimodal f on [a, b] down to width tol.
template <class F>
SearchResult golden_section_max(F&& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? SearchResult{c, fc} : SearchResult{d, fd};
}

template <class F>
SearchResult golden_section_min(F&& f, double a, double b, double tol) {
  auto neg = [&](double x) { return -f(x); };
  SearchResult r = golden_section_max(neg, a, b, tol);
  return {r.x, -r.value};
}

}  // namespace regen
