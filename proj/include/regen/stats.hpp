#pragma once

// Kolmogorov-Smirnov statistics and binomial helpers used by the verification harness.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace regen {

/// sup_x |F_n(x) - F(x)| for a one-sample test against a continuous CDF.
template <class Cdf>
double ks_one_sample(std::vector<double> xs, Cdf&& cdf) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max(d, std::max(static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n));
  }
  return d;
}

/// sup_x |F_n(x) - G_m(x)| between two empirical distributions.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

/// Asymptotic KS coefficient c(alpha) = sqrt(-ln(alpha / 2) / 2); c(0.01) ~ 1.628.
inline double ks_coefficient(double alpha) { return std::sqrt(-std::log(alpha / 2.0) / 2.0); }

inline double ks_critical_one_sample(double alpha, std::size_t n) {
  return ks_coefficient(alpha) / std::sqrt(static_cast<double>(n));
}

inline double ks_critical_two_sample(double alpha, std::size_t n, std::size_t m) {
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return ks_coefficient(alpha) * std::sqrt((dn + dm) / (dn * dm));
}

/// Standard error of a binomial proportion p over n trials.
inline double binomial_se(double p, std::size_t n) {
  if (n == 0) return 0.0;
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

}  // namespace regen
