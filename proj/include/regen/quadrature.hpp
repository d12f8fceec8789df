#pragma once

// Adaptive Gauss-Kronrod (10/21 point) quadrature with global subdivision.
//
// Half-infinite ranges [a, inf) are mapped onto (0, 1] through
// s = a + scale * (1 - x) / x, so no cutoff is ever imposed on the tail.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <vector>

namespace regen {

struct QuadratureOptions {
  double abs_tol = 1e-12;
  double rel_tol = 1e-9;
  std::size_t max_intervals = 4000;
  /// Length scale used by the half-line transform.
  double tail_scale = 1.0;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

namespace detail {

inline constexpr std::array<double, 11> kKronrodNodes = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};

inline constexpr std::array<double, 11> kKronrodWeights = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077715640058940, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

// Weights of the embedded 10-point Gauss rule (nodes kKronrodNodes[1,3,5,7,9]).
inline constexpr std::array<double, 5> kGaussWeights = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651146};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  bool tail;  // evaluated through the half-line transform
  bool operator<(const Panel& other) const { return error < other.error; }
};

// One GK21 application on [a, b]; error estimate follows QUADPACK's qk21.
template <class G>
Panel gk21(G& g, double a, double b, bool tail) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, 21> fv{};
  fv[20] = g(center, tail);
  double res_k = fv[20] * kKronrodWeights[10];
  double res_g = 0.0;
  double res_abs = std::abs(res_k);
  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double f1 = g(center - dx, tail);
    const double f2 = g(center + dx, tail);
    fv[2 * j] = f1;
    fv[2 * j + 1] = f2;
    res_k += kKronrodWeights[j] * (f1 + f2);
    res_abs += kKronrodWeights[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) res_g += kGaussWeights[j / 2] * (f1 + f2);
  }
  const double mean = 0.5 * res_k;
  double res_asc = kKronrodWeights[10] * std::abs(fv[20] - mean);
  for (std::size_t j = 0; j < 10; ++j) {
    res_asc += kKronrodWeights[j] * (std::abs(fv[2 * j] - mean) + std::abs(fv[2 * j + 1] - mean));
  }
  res_k *= half;
  res_abs *= std::abs(half);
  res_asc *= std::abs(half);
  double err = std::abs((res_k - res_g * half));
  if (res_asc != 0.0 && err != 0.0) {
    err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (res_abs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * res_abs, err);
  }
  if (!std::isfinite(res_k)) err = std::numeric_limits<double>::infinity();
  return Panel{a, b, res_k, err, tail};
}

}  // namespace detail

/// Integrates f over the union of consecutive pieces [p0,p1], [p1,p2], ...
/// The last point may be +infinity. Breakpoints let callers place kinks and
/// support endpoints on panel boundaries.
template <class F>
QuadratureResult integrate_pieces(F&& f, std::vector<double> points, const QuadratureOptions& opt = {}) {
  QuadratureResult out;
  points.erase(std::unique(points.begin(), points.end()), points.end());
  if (points.size() < 2) return out;

  const double tail_origin = points.size() >= 2 ? points[points.size() - 2] : 0.0;
  const double scale = opt.tail_scale > 0.0 ? opt.tail_scale : 1.0;
  std::size_t evals = 0;
  auto g = [&](double x, bool tail) -> double {
    ++evals;
    if (!tail) return f(x);
    if (x <= 0.0) return 0.0;
    const double s = tail_origin + scale * (1.0 - x) / x;
    if (!std::isfinite(s)) return 0.0;
    const double v = f(s) * scale / (x * x);
    return std::isfinite(v) ? v : 0.0;
  };

  std::priority_queue<detail::Panel> heap;
  CompensatedSum total;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double a = points[i];
    const double b = points[i + 1];
    if (!(b > a)) continue;
    detail::Panel p = std::isinf(b) ? detail::gk21(g, 0.0, 1.0, true) : detail::gk21(g, a, b, false);
    heap.push(p);
  }

  auto recompute = [&]() {
    CompensatedSum s;
    double e = 0.0;
    auto copy = heap;
    while (!copy.empty()) {
      s.add(copy.top().value);
      e += copy.top().error;
      copy.pop();
    }
    total = s;
    total_err = e;
  };
  recompute();

  std::size_t intervals = heap.size();
  while (!heap.empty()) {
    const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(total.value()));
    if (total_err <= tol) break;
    if (intervals >= opt.max_intervals) {
      out.converged = false;
      break;
    }
    detail::Panel worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Panel can no longer be split in floating point.
      out.converged = false;
      break;
    }
    heap.pop();
    detail::Panel left = detail::gk21(g, worst.a, mid, worst.tail);
    detail::Panel right = detail::gk21(g, mid, worst.b, worst.tail);
    total.add(-worst.value);
    total.add(left.value);
    total.add(right.value);
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
    if (intervals % 256 == 0) recompute();  // refresh drift in the running error sum
  }
  recompute();
  out.value = total.value();
  out.error = total_err;
  out.evaluations = evals;
  return out;
}

/// Integral of f over [a, b]; b may be +infinity.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  if (!(b > a)) return {};
  return integrate_pieces(std::forward<F>(f), std::vector<double>{a, b}, opt);
}

/// Sorted, de-duplicated breakpoints clipped to [lo, hi], with lo and hi included.
inline std::vector<double> clip_breakpoints(std::vector<double> pts, double lo, double hi) {
  std::vector<double> out{lo};
  std::sort(pts.begin(), pts.end());
  for (double p : pts) {
    if (p > lo && p < hi && std::isfinite(p)) out.push_back(p);
  }
  out.push_back(hi);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace regen
