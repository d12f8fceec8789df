#pragma once

// Absolutely continuous lifetime distributions and the two distributions
// derived from them: the residual lifetime at age b and the stationary
// overshoot (equilibrium excess) distribution.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/policies/policy.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "regen/errors.hpp"
#include "regen/quadrature.hpp"
#include "regen/solve.hpp"

namespace regen {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// F(b) >= 1 - kSaturation is treated as the end of the support.
inline constexpr double kSaturation = 1e-12;

enum class Family { exponential, gamma, weibull, uniform, hyperexponential, tabulated, lomax };

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::exponential: return "exponential";
    case Family::gamma: return "gamma";
    case Family::weibull: return "weibull";
    case Family::uniform: return "uniform";
    case Family::hyperexponential: return "hyperexp";
    case Family::tabulated: return "tabulated";
    case Family::lomax: return "lomax";
  }
  return "unknown";
}

struct Support {
  double lo = 0.0;
  double hi = kInf;
};

namespace detail {

using SpecialPolicy = boost::math::policies::policy<
    boost::math::policies::overflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::underflow_error<boost::math::policies::ignore_error>,
    boost::math::policies::denorm_error<boost::math::policies::ignore_error>,
    boost::math::policies::evaluation_error<boost::math::policies::ignore_error>,
    boost::math::policies::promote_double<false>>;

inline double gamma_p(double a, double x) { return boost::math::gamma_p(a, x, SpecialPolicy()); }
inline double gamma_q(double a, double x) { return boost::math::gamma_q(a, x, SpecialPolicy()); }
inline double gamma_p_derivative(double a, double x) {
  return boost::math::gamma_p_derivative(a, x, SpecialPolicy());
}
inline double tgamma(double a) { return boost::math::tgamma(a, SpecialPolicy()); }

// Generic inverse for a distribution given by cdf/sf/pdf, with p + q == 1.
// Solves on whichever tail keeps the target well conditioned.
template <class Cdf, class Sf, class Pdf>
double invert(Cdf&& cdf, Sf&& sf, Pdf&& pdf, double p, double q, Support sup, double scale) {
  if (p <= 0.0) return sup.lo;
  if (q <= 0.0) return sup.hi;
  auto g = [&](double x) { return p <= 0.5 ? cdf(x) - p : q - sf(x); };
  double top = sup.hi;
  if (!std::isfinite(top)) top = expand_bracket(g, sup.lo, scale > 0.0 ? scale : 1.0);
  return solve_increasing(g, pdf, sup.lo, top);
}

inline void require_positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw InvalidParameter(field, "must be positive and finite");
  }
}

}  // namespace detail

/// Lifetime distribution F with a density on its support [lo, hi].
///
/// Immutable; copies share the parameter block.
class LifetimeModel {
 public:
  static LifetimeModel exponential(double rate) {
    detail::require_positive(rate, "rate");
    auto d = std::make_shared<Data>();
    d->family = Family::exponential;
    d->a = rate;
    return finish(std::move(d));
  }

  static LifetimeModel gamma(double shape, double rate) {
    detail::require_positive(shape, "shape");
    detail::require_positive(rate, "rate");
    auto d = std::make_shared<Data>();
    d->family = Family::gamma;
    d->a = shape;
    d->c = rate;
    return finish(std::move(d));
  }

  static LifetimeModel weibull(double shape, double scale) {
    detail::require_positive(shape, "shape");
    detail::require_positive(scale, "scale");
    auto d = std::make_shared<Data>();
    d->family = Family::weibull;
    d->a = shape;
    d->c = scale;
    return finish(std::move(d));
  }

  static LifetimeModel uniform(double lo, double hi) {
    if (!(lo >= 0.0) || !std::isfinite(lo)) throw InvalidParameter("lo", "must be finite and >= 0");
    if (!(hi > lo) || !std::isfinite(hi)) throw InvalidParameter("hi", "must be finite and > lo");
    auto d = std::make_shared<Data>();
    d->family = Family::uniform;
    d->a = lo;
    d->c = hi;
    return finish(std::move(d));
  }

  static LifetimeModel hyperexponential(std::vector<double> weights, std::vector<double> rates) {
    if (weights.empty() || weights.size() != rates.size()) {
      throw InvalidParameter("weights", "must be non-empty and match rates in length");
    }
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidParameter("weights", "must be >= 0");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidParameter("weights", "must sum to 1");
    for (double r : rates) detail::require_positive(r, "rates");
    auto d = std::make_shared<Data>();
    d->family = Family::hyperexponential;
    d->weights = std::move(weights);
    d->rates = std::move(rates);
    return finish(std::move(d));
  }

  /// Piecewise-linear density through (grid[i], density[i]); zero outside.
  /// Raw mass away from one by more than 1e-6 is renormalized with a warning.
  static LifetimeModel tabulated(std::vector<double> grid, std::vector<double> density) {
    if (grid.size() < 2 || grid.size() != density.size()) {
      throw InvalidParameter("grid", "needs at least two nodes and one density value per node");
    }
    if (!(grid.front() >= 0.0)) throw InvalidParameter("grid", "must start at a time >= 0");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      if (!(grid[i + 1] > grid[i]) || !std::isfinite(grid[i + 1])) {
        // A zero-width cell would carry a point mass.
        throw InvalidParameter("grid", "must be finite and strictly increasing");
      }
    }
    for (double v : density) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidParameter("density", "must be finite and >= 0");
    }
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
      mass += 0.5 * (density[i] + density[i + 1]) * (grid[i + 1] - grid[i]);
    }
    if (!(mass > 0.0)) throw InvalidParameter("density", "has zero total mass");
    auto d = std::make_shared<Data>();
    d->family = Family::tabulated;
    if (std::abs(mass - 1.0) > 1e-6) {
      std::ostringstream msg;
      msg << "tabulated density had mass " << mass << "; renormalized to 1";
      d->warnings.push_back(msg.str());
    }
    for (double& v : density) v /= mass;
    d->grid = std::move(grid);
    d->density = std::move(density);
    const auto& g = d->grid;
    const auto& f = d->density;
    d->cdf_nodes.assign(g.size(), 0.0);
    d->int_cdf_nodes.assign(g.size(), 0.0);
    for (std::size_t i = 0; i + 1 < g.size(); ++i) {
      const double h = g[i + 1] - g[i];
      const double slope = f[i + 1] - f[i];
      d->cdf_nodes[i + 1] = d->cdf_nodes[i] + 0.5 * (f[i] + f[i + 1]) * h;
      d->int_cdf_nodes[i + 1] =
          d->int_cdf_nodes[i] + d->cdf_nodes[i] * h + f[i] * h * h / 2.0 + slope * h * h / 6.0;
    }
    return finish(std::move(d));
  }

  /// Pareto type II: sf(s) = (1 + s/scale)^(-shape). Moments of order >= shape diverge.
  static LifetimeModel lomax(double shape, double scale) {
    detail::require_positive(shape, "shape");
    detail::require_positive(scale, "scale");
    if (!(shape > 1.0)) throw InvalidParameter("shape", "must exceed 1 (infinite mean is not supported)");
    auto d = std::make_shared<Data>();
    d->family = Family::lomax;
    d->a = shape;
    d->c = scale;
    return finish(std::move(d));
  }

  Family family() const { return d_->family; }

  Support support() const {
    switch (d_->family) {
      case Family::uniform: return {d_->a, d_->c};
      case Family::tabulated: return {d_->grid.front(), d_->grid.back()};
      default: return {0.0, kInf};
    }
  }

  double pdf(double s) const {
    const Data& d = *d_;
    if (!(s >= 0.0) || std::isnan(s)) return 0.0;
    switch (d.family) {
      case Family::exponential: return d.a * std::exp(-d.a * s);
      case Family::gamma: return s == kInf ? 0.0 : d.c * detail::gamma_p_derivative(d.a, d.c * s);
      case Family::weibull: {
        const double z = s / d.c;
        if (z == kInf) return 0.0;
        return (d.a / d.c) * std::pow(z, d.a - 1.0) * std::exp(-std::pow(z, d.a));
      }
      case Family::uniform: return (s >= d.a && s <= d.c) ? 1.0 / (d.c - d.a) : 0.0;
      case Family::hyperexponential: {
        double v = 0.0;
        for (std::size_t i = 0; i < d.rates.size(); ++i) v += d.weights[i] * d.rates[i] * std::exp(-d.rates[i] * s);
        return v;
      }
      case Family::tabulated: {
        const auto& g = d.grid;
        if (s < g.front() || s > g.back()) return 0.0;
        const std::size_t i = cell(s);
        const double h = g[i + 1] - g[i];
        return d.density[i] + (d.density[i + 1] - d.density[i]) * (s - g[i]) / h;
      }
      case Family::lomax: return (d.a / d.c) * std::pow(1.0 + s / d.c, -d.a - 1.0);
    }
    return 0.0;
  }

  double cdf(double s) const {
    const Data& d = *d_;
    if (std::isnan(s)) return 0.0;
    switch (d.family) {
      case Family::exponential: return s <= 0.0 ? 0.0 : -std::expm1(-d.a * s);
      case Family::gamma: return s <= 0.0 ? 0.0 : (s == kInf ? 1.0 : detail::gamma_p(d.a, d.c * s));
      case Family::weibull: return s <= 0.0 ? 0.0 : -std::expm1(-std::pow(s / d.c, d.a));
      case Family::uniform: return std::clamp((s - d.a) / (d.c - d.a), 0.0, 1.0);
      case Family::hyperexponential: {
        if (s <= 0.0) return 0.0;
        double v = 0.0;
        for (std::size_t i = 0; i < d.rates.size(); ++i) v -= d.weights[i] * std::expm1(-d.rates[i] * s);
        return std::min(v, 1.0);
      }
      case Family::tabulated: return tabulated_cdf(s);
      case Family::lomax: return s <= 0.0 ? 0.0 : -std::expm1(-d.a * std::log1p(s / d.c));
    }
    return 0.0;
  }

  /// Survival function 1 - F(s), evaluated without cancellation in the tail.
  double sf(double s) const {
    const Data& d = *d_;
    if (std::isnan(s)) return 1.0;
    switch (d.family) {
      case Family::exponential: return s <= 0.0 ? 1.0 : std::exp(-d.a * s);
      case Family::gamma: return s <= 0.0 ? 1.0 : (s == kInf ? 0.0 : detail::gamma_q(d.a, d.c * s));
      case Family::weibull: return s <= 0.0 ? 1.0 : std::exp(-std::pow(s / d.c, d.a));
      case Family::uniform: return std::clamp((d.c - s) / (d.c - d.a), 0.0, 1.0);
      case Family::hyperexponential: {
        if (s <= 0.0) return 1.0;
        double v = 0.0;
        for (std::size_t i = 0; i < d.rates.size(); ++i) v += d.weights[i] * std::exp(-d.rates[i] * s);
        return v;
      }
      case Family::tabulated: return std::clamp(1.0 - tabulated_cdf(s), 0.0, 1.0);
      case Family::lomax: return s <= 0.0 ? 1.0 : std::pow(1.0 + s / d.c, -d.a);
    }
    return 1.0;
  }

  /// F^{-1}(p) = inf{x : F(x) >= p}; p in [0, 1).
  double quantile(double p) const {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in [0, 1)");
    return inverse(p, 1.0 - p);
  }

  /// Inverse survival function: x with sf(x) = q, q in (0, 1].
  double isf(double q) const {
    if (!(q > 0.0 && q <= 1.0)) throw DomainError("isf: q must lie in (0, 1]");
    return inverse(1.0 - q, q);
  }

  /// E xi, in closed form.
  double mean() const { return d_->mean; }

  /// Characteristic time scale (the mean); used to scale tail transforms.
  double scale() const { return d_->mean; }

  /// Integral of the survival function over [s, inf), i.e. E (xi - s)^+.
  double integrated_sf(double s) const {
    const Data& d = *d_;
    if (s < 0.0) return -s + d.mean;
    switch (d.family) {
      case Family::exponential: return std::exp(-d.a * s) / d.a;
      case Family::gamma: {
        if (s == kInf) return 0.0;
        const double x = d.c * s;
        return ((d.a - x) * detail::gamma_q(d.a, x) + x * detail::gamma_p_derivative(d.a, x)) / d.c;
      }
      case Family::weibull: {
        const double z = std::pow(s / d.c, d.a);
        return d.c * detail::tgamma(1.0 + 1.0 / d.a) * detail::gamma_q(1.0 / d.a, z);
      }
      case Family::uniform: {
        if (s <= d.a) return (d.a - s) + 0.5 * (d.c - d.a);
        if (s >= d.c) return 0.0;
        return (d.c - s) * (d.c - s) / (2.0 * (d.c - d.a));
      }
      case Family::hyperexponential: {
        double v = 0.0;
        for (std::size_t i = 0; i < d.rates.size(); ++i) v += d.weights[i] * std::exp(-d.rates[i] * s) / d.rates[i];
        return v;
      }
      case Family::tabulated: {
        const auto& g = d.grid;
        if (s >= g.back()) return 0.0;
        const double total = d.int_cdf_nodes.back();
        if (s <= g.front()) return (g.front() - s) + (g.back() - g.front()) - total;
        return std::max(0.0, (g.back() - s) - (total - tabulated_int_cdf(s)));
      }
      case Family::lomax: return d.c / (d.a - 1.0) * std::pow(1.0 + s / d.c, 1.0 - d.a);
    }
    return 0.0;
  }

  /// Whether E xi^k is finite.
  bool moment_finite(int k) const {
    if (d_->family == Family::lomax) return static_cast<double>(k) < d_->a;
    return true;
  }

  /// Whether E exp(beta xi) is finite (beta > 0).
  bool mgf_finite(double beta) const {
    const Data& d = *d_;
    if (beta <= 0.0) return true;
    switch (d.family) {
      case Family::exponential: return beta < d.a;
      case Family::gamma: return beta < d.c;
      case Family::weibull: return d.a > 1.0 || (d.a == 1.0 && beta < 1.0 / d.c);
      case Family::uniform: return true;
      case Family::tabulated: return true;
      case Family::hyperexponential: return beta < *std::min_element(d.rates.begin(), d.rates.end());
      case Family::lomax: return false;
    }
    return false;
  }

  /// sup{beta : E exp(beta xi) < inf}; +inf for light enough tails.
  double mgf_abscissa() const {
    const Data& d = *d_;
    switch (d.family) {
      case Family::exponential: return d.a;
      case Family::gamma: return d.c;
      case Family::weibull:
        if (d.a > 1.0) return kInf;
        return d.a == 1.0 ? 1.0 / d.c : 0.0;
      case Family::uniform:
      case Family::tabulated: return kInf;
      case Family::hyperexponential: return *std::min_element(d.rates.begin(), d.rates.end());
      case Family::lomax: return 0.0;
    }
    return 0.0;
  }

  /// Interior points where the density has kinks.
  std::vector<double> breakpoints() const {
    if (d_->family == Family::tabulated) return d_->grid;
    return {};
  }

  const std::vector<std::string>& warnings() const { return d_->warnings; }

  /// Family parameters by name, in declaration order.
  std::vector<std::pair<std::string, double>> scalar_params() const {
    const Data& d = *d_;
    switch (d.family) {
      case Family::exponential: return {{"rate", d.a}};
      case Family::gamma: return {{"shape", d.a}, {"rate", d.c}};
      case Family::weibull: return {{"shape", d.a}, {"scale", d.c}};
      case Family::uniform: return {{"lo", d.a}, {"hi", d.c}};
      case Family::lomax: return {{"shape", d.a}, {"scale", d.c}};
      default: return {};
    }
  }
  const std::vector<double>& weights() const { return d_->weights; }
  const std::vector<double>& rates() const { return d_->rates; }
  const std::vector<double>& grid() const { return d_->grid; }
  const std::vector<double>& density_values() const { return d_->density; }

  std::string describe() const {
    std::ostringstream os;
    os << family_name(family()) << "(";
    bool first = true;
    for (const auto& [name, v] : scalar_params()) {
      os << (first ? "" : ", ") << name << "=" << v;
      first = false;
    }
    if (family() == Family::hyperexponential) os << d_->rates.size() << " phases";
    if (family() == Family::tabulated) os << d_->grid.size() << " nodes";
    os << ")";
    return os.str();
  }

 private:
  struct Data {
    Family family = Family::exponential;
    double a = 0.0;
    double c = 0.0;
    std::vector<double> weights, rates;
    std::vector<double> grid, density, cdf_nodes, int_cdf_nodes;
    double mean = 0.0;
    std::vector<std::string> warnings;
  };

  explicit LifetimeModel(std::shared_ptr<const Data> d) : d_(std::move(d)) {}

  static LifetimeModel finish(std::shared_ptr<Data> d) {
    switch (d->family) {
      case Family::exponential: d->mean = 1.0 / d->a; break;
      case Family::gamma: d->mean = d->a / d->c; break;
      case Family::weibull: d->mean = d->c * detail::tgamma(1.0 + 1.0 / d->a); break;
      case Family::uniform: d->mean = 0.5 * (d->a + d->c); break;
      case Family::hyperexponential: {
        double m = 0.0;
        for (std::size_t i = 0; i < d->rates.size(); ++i) m += d->weights[i] / d->rates[i];
        d->mean = m;
        break;
      }
      case Family::tabulated: d->mean = d->grid.back() - d->int_cdf_nodes.back(); break;
      case Family::lomax: d->mean = d->c / (d->a - 1.0); break;
    }
    return LifetimeModel(std::move(d));
  }

  std::size_t cell(double s) const {
    const auto& g = d_->grid;
    auto it = std::upper_bound(g.begin(), g.end(), s);
    std::size_t i = it == g.begin() ? 0 : static_cast<std::size_t>(it - g.begin()) - 1;
    return std::min(i, g.size() - 2);
  }

  double tabulated_cdf(double s) const {
    const auto& g = d_->grid;
    if (s <= g.front()) return 0.0;
    if (s >= g.back()) return 1.0;
    const std::size_t i = cell(s);
    const double h = g[i + 1] - g[i];
    const double x = s - g[i];
    const double slope = d_->density[i + 1] - d_->density[i];
    return std::clamp(d_->cdf_nodes[i] + d_->density[i] * x + slope * x * x / (2.0 * h), 0.0, 1.0);
  }

  // Integral of F over [grid.front(), s].
  double tabulated_int_cdf(double s) const {
    const auto& g = d_->grid;
    const std::size_t i = cell(s);
    const double h = g[i + 1] - g[i];
    const double x = s - g[i];
    const double slope = d_->density[i + 1] - d_->density[i];
    return d_->int_cdf_nodes[i] + d_->cdf_nodes[i] * x + d_->density[i] * x * x / 2.0 +
           slope * x * x * x / (6.0 * h);
  }

  double inverse(double p, double q) const {
    const Data& d = *d_;
    if (p <= 0.0) return support().lo;
    switch (d.family) {
      case Family::exponential: return (p <= 0.5 ? -std::log1p(-p) : -std::log(q)) / d.a;
      case Family::weibull: return d.c * std::pow(p <= 0.5 ? -std::log1p(-p) : -std::log(q), 1.0 / d.a);
      case Family::uniform: return p <= 0.5 ? d.a + p * (d.c - d.a) : d.c - q * (d.c - d.a);
      case Family::lomax: {
        const double log_q = p <= 0.5 ? std::log1p(-p) : std::log(q);
        return d.c * std::expm1(-log_q / d.a);
      }
      default: break;
    }
    return detail::invert([this](double x) { return cdf(x); }, [this](double x) { return sf(x); },
                          [this](double x) { return pdf(x); }, p, q, support(), d.mean);
  }

  std::shared_ptr<const Data> d_;
};

/// Residual lifetime at age `offset` of either a lifetime distribution or its
/// stationary overshoot distribution. offset == 0 leaves the underlying
/// distribution unchanged.
class DerivedModel {
 public:
  enum class Kind { residual, stationary_overshoot };

  DerivedModel(LifetimeModel base, bool stationary, double offset)
      : base_(std::move(base)), stationary_(stationary), offset_(offset) {
    if (!(offset_ >= 0.0) || !std::isfinite(offset_)) throw DomainError("offset must be finite and >= 0");
    sf_at_offset_ = under_sf(offset_);
    cdf_at_offset_ = under_cdf(offset_);
    if (!(sf_at_offset_ > kSaturation)) {
      throw SaturationError("residual distribution undefined: F(b) is numerically 1");
    }
  }

  Kind kind() const { return stationary_ && offset_ == 0.0 ? Kind::stationary_overshoot : Kind::residual; }
  const LifetimeModel& base() const { return base_; }
  bool over_stationary() const { return stationary_; }
  double offset() const { return offset_; }

  Support support() const {
    const Support u = under_support();
    return {std::max(0.0, u.lo - offset_), u.hi - offset_};
  }

  double pdf(double s) const {
    if (!(s >= 0.0)) return 0.0;
    return under_pdf(s + offset_) / sf_at_offset_;
  }

  double sf(double s) const {
    if (!(s > 0.0)) return 1.0;
    return std::clamp(under_sf(s + offset_) / sf_at_offset_, 0.0, 1.0);
  }

  double cdf(double s) const {
    if (!(s > 0.0)) return 0.0;
    if (offset_ == 0.0) return under_cdf(s);
    return std::clamp((sf_at_offset_ - under_sf(s + offset_)) / sf_at_offset_, 0.0, 1.0);
  }

  double quantile(double p) const {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in [0, 1)");
    if (p == 0.0) return support().lo;
    double x = 0.0;
    if (offset_ == 0.0) {
      x = under_inverse(p, 1.0 - p);
    } else if (p <= 0.5) {
      const double target = cdf_at_offset_ + p * sf_at_offset_;
      x = under_inverse(target, 1.0 - target);
    } else {
      const double target = (1.0 - p) * sf_at_offset_;
      x = under_inverse(1.0 - target, target);
    }
    return std::max(x - offset_, support().lo);
  }

  double isf(double q) const {
    if (!(q > 0.0 && q <= 1.0)) throw DomainError("isf: q must lie in (0, 1]");
    if (q == 1.0) return support().lo;
    const double target = q * sf_at_offset_;
    return std::max(under_inverse(1.0 - target, target) - offset_, support().lo);
  }

  bool moment_finite(int k) const { return base_.moment_finite(k + (stationary_ ? 1 : 0)); }
  bool mgf_finite(double beta) const { return base_.mgf_finite(beta); }

  std::vector<double> breakpoints() const {
    std::vector<double> pts = base_.breakpoints();
    for (double& p : pts) p -= offset_;
    return pts;
  }

  double scale() const { return base_.mean(); }

 private:
  Support under_support() const {
    const Support s = base_.support();
    return stationary_ ? Support{0.0, s.hi} : s;
  }
  double under_pdf(double s) const {
    if (!stationary_) return base_.pdf(s);
    return s < 0.0 ? 0.0 : base_.sf(s) / base_.mean();
  }
  double under_sf(double s) const {
    if (!stationary_) return base_.sf(s);
    return s <= 0.0 ? 1.0 : std::clamp(base_.integrated_sf(s) / base_.mean(), 0.0, 1.0);
  }
  double under_cdf(double s) const {
    if (!stationary_) return base_.cdf(s);
    return 1.0 - under_sf(s);
  }
  double under_inverse(double p, double q) const {
    if (!stationary_) return p <= 0.5 ? base_.quantile(p) : base_.isf(q);
    return detail::invert([this](double x) { return under_cdf(x); }, [this](double x) { return under_sf(x); },
                          [this](double x) { return under_pdf(x); }, p, q, under_support(), base_.mean());
  }

  LifetimeModel base_;
  bool stationary_ = false;
  double offset_ = 0.0;
  double sf_at_offset_ = 1.0;
  double cdf_at_offset_ = 0.0;
};

/// Anything with a density on a support interval: LifetimeModel, DerivedModel,
/// and the component distributions of a coupling decomposition.
template <class M>
concept Distribution = requires(const M& m, double x, int k) {
  { m.pdf(x) } -> std::convertible_to<double>;
  { m.cdf(x) } -> std::convertible_to<double>;
  { m.sf(x) } -> std::convertible_to<double>;
  { m.quantile(x) } -> std::convertible_to<double>;
  { m.support() } -> std::same_as<Support>;
  { m.breakpoints() } -> std::convertible_to<std::vector<double>>;
  { m.scale() } -> std::convertible_to<double>;
};

template <class M>
concept MomentModel = Distribution<M> && requires(const M& m, int k) {
  { m.moment_finite(k) } -> std::convertible_to<bool>;
};

// ---------------------------------------------------------------------------
// Operations

template <Distribution M>
double pdf(const M& m, double s) {
  return m.pdf(s);
}

template <Distribution M>
double cdf(const M& m, double s) {
  if (s == kInf) return 1.0;
  return m.cdf(s);
}

template <Distribution M>
double quantile(const M& m, double p) {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in [0, 1)");
  return m.quantile(p);
}

/// Inverse-CDF sampling: a deterministic function of u.
template <Distribution M>
double sample(const M& m, double u) {
  return quantile(m, u);
}

/// lambda(s) = f(s) / (1 - F(s)).
template <Distribution M>
double hazard(const M& m, double s) {
  const double survival = m.sf(s);
  if (!(survival > kSaturation)) throw SaturationError("hazard undefined: F(s) is numerically 1");
  return m.pdf(s) / survival;
}

/// F(s) = 1 - exp(-int_0^s lambda(u) du).
inline double cdf_from_hazard(const std::function<double(double)>& hazard_curve, double s,
                              std::vector<double> breakpoints = {}) {
  if (!(s > 0.0)) return 0.0;
  auto integrand = [&](double u) {
    const double v = hazard_curve(u);
    if (v < 0.0) throw DomainError("cdf_from_hazard: negative hazard value");
    return v;
  };
  QuadratureOptions opt;
  opt.rel_tol = 1e-11;
  opt.abs_tol = 1e-14;
  const double cumulative = integrate_pieces(integrand, clip_breakpoints(std::move(breakpoints), 0.0, s), opt).value;
  return -std::expm1(-cumulative);
}

/// Integral of g(s) over the support of m, splitting at its breakpoints.
template <Distribution M, class G>
QuadratureResult integrate_over(const M& m, G&& g, QuadratureOptions opt = {}) {
  const Support sup = m.support();
  opt.tail_scale = m.scale();
  return integrate_pieces(std::forward<G>(g), clip_breakpoints(m.breakpoints(), sup.lo, sup.hi), opt);
}

/// E xi^k by adaptive quadrature of s^k f(s).
template <MomentModel M>
double moment(const M& m, int k) {
  if (k < 1) throw DomainError("moment: order must be >= 1");
  if (!m.moment_finite(k)) {
    throw DivergenceError("moment of order " + std::to_string(k) + " is infinite for this distribution");
  }
  QuadratureOptions opt;
  opt.rel_tol = 1e-11;
  opt.abs_tol = 1e-15;
  return integrate_over(m, [&](double s) { return std::pow(s, k) * m.pdf(s); }, opt).value;
}

/// Residual lifetime distribution F_b(s) = (F(s+b) - F(b)) / (1 - F(b)).
inline DerivedModel residual_model(const LifetimeModel& m, double b) {
  if (!(b >= 0.0)) throw DomainError("residual_model: age b must be >= 0");
  if (!(m.sf(b) > kSaturation)) throw SaturationError("residual_model: F(b) is numerically 1");
  return DerivedModel(m, false, b);
}

/// Residual of a residual (or of the stationary overshoot): ages add.
inline DerivedModel residual_model(const DerivedModel& m, double b) {
  if (!(b >= 0.0)) throw DomainError("residual_model: age b must be >= 0");
  if (!(m.sf(b) > kSaturation)) throw SaturationError("residual_model: F(b) is numerically 1");
  return DerivedModel(m.base(), m.over_stationary(), m.offset() + b);
}

/// Stationary overshoot distribution with density (1 - F(s)) / E xi.
inline DerivedModel stationary_overshoot(const LifetimeModel& m) {
  if (!m.moment_finite(1)) throw DivergenceError("stationary_overshoot: mean is infinite");
  return DerivedModel(m, true, 0.0);
}

}  // namespace regen
