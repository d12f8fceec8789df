#pragma once

// Analytic coupling bounds: Lorden's functional, the per-attempt success
// probability, moment majorants of the coupling time and the resulting
// polynomial and exponential total-variation rate curves.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "regen/distributions.hpp"
#include "regen/errors.hpp"
#include "regen/quadrature.hpp"
#include "regen/solve.hpp"

namespace regen {

inline constexpr double kVanishing = 1e-12;
inline constexpr double kSeriesRelTol = 1e-14;
inline constexpr std::size_t kSeriesCap = 10'000'000;

struct BoundParameters {
  double theta = 0.0;
  double xi = 0.0;
  double kappa = 0.0;
  double p0 = 0.0;
  double varkappa = 0.0;
};

/// Xi = E xi^2 / E xi; E B_t <= Xi for every t.
inline double lorden_xi(const LifetimeModel& model) { return moment(model, 2) / moment(model, 1); }

/// Integral over s of min(f(s + u), f(s)).
inline double overlap_at_shift(const LifetimeModel& model, double u) {
  if (!(u >= 0.0)) throw DomainError("overlap_at_shift: shift must be >= 0");
  const Support sup = model.support();
  const double hi = sup.hi - u;
  if (!(hi > sup.lo)) return 0.0;
  std::vector<double> pts = model.breakpoints();
  for (double p : model.breakpoints()) pts.push_back(p - u);
  QuadratureOptions opt;
  opt.rel_tol = 1e-10;
  opt.abs_tol = 1e-14;
  opt.tail_scale = model.scale();
  return integrate_pieces([&](double s) { return std::min(model.pdf(s + u), model.pdf(s)); },
                          clip_breakpoints(std::move(pts), sup.lo, hi), opt)
      .value;
}

/// kappa(Theta) = min over u in (0, Theta] of overlap_at_shift(u): a grid of
/// u_grid_size points followed by golden-section refinement around the grid
/// minimum.
inline double kappa_of_theta(const LifetimeModel& model, double theta, std::size_t u_grid_size = 64) {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("kappa_of_theta: theta must be positive");
  if (u_grid_size < 2) throw DomainError("kappa_of_theta: grid needs at least 2 points");
  const double n = static_cast<double>(u_grid_size);
  std::size_t best = 1;
  double best_value = kInf;
  for (std::size_t j = 1; j <= u_grid_size; ++j) {
    const double v = overlap_at_shift(model, theta * static_cast<double>(j) / n);
    if (v < best_value) {
      best_value = v;
      best = j;
    }
  }
  const double lo = theta * static_cast<double>(best - 1) / n;
  const double hi = std::min(theta, theta * static_cast<double>(best + 1) / n);
  const SearchResult refined =
      golden_section_min([&](double u) { return overlap_at_shift(model, u); }, std::max(lo, 1e-300), hi, 1e-9 * theta);
  const double kappa = std::min(best_value, refined.value);
  if (!(kappa > kVanishing)) throw VanishingOverlapError("kappa(theta) vanishes: no usable overlap below theta");
  return std::min(kappa, 1.0);
}

/// Parameters at threshold theta; p0 = 1 - Xi / Theta.
inline BoundParameters success_prob(const LifetimeModel& model, double theta, std::optional<double> xi = {}) {
  BoundParameters p;
  p.xi = xi ? *xi : lorden_xi(model);
  p.theta = theta;
  if (!(theta > p.xi)) throw DomainError("theta must exceed the Lorden functional Xi (p0 would be <= 0)");
  p.kappa = kappa_of_theta(model, theta);
  p.p0 = 1.0 - p.xi / theta;
  p.varkappa = p.p0 * p.kappa;
  return p;
}

// ---------------------------------------------------------------------------
// Series

struct SeriesValue {
  double value = 0.0;
  std::size_t terms = 0;
  bool capped = false;
};

/// E (nu + 1)^(ell - 1), nu geometric on {1, 2, ...} with success probability varkappa.
inline SeriesValue attempt_moment_series(double varkappa, int ell) {
  if (!(varkappa > 0.0 && varkappa <= 1.0)) throw DomainError("attempt_moment: varkappa must lie in (0, 1]");
  if (ell < 1) throw DomainError("attempt_moment: ell must be >= 1");
  if (ell == 1) return {1.0, 1, false};
  const double x = 1.0 - varkappa;
  if (x == 0.0) return {std::pow(2.0, ell - 1), 1, false};
  // Terms rise until (n + 1)^(ell - 1) x^(n - 1) peaks, then decay.
  const double peak = static_cast<double>(ell - 1) / -std::log(x);
  CompensatedSum sum;
  double weight = varkappa;
  SeriesValue out;
  for (std::size_t n = 1; n <= kSeriesCap; ++n) {
    const double term = std::pow(static_cast<double>(n + 1), ell - 1) * weight;
    sum.add(term);
    out.terms = n;
    if (static_cast<double>(n) > peak && term < kSeriesRelTol * sum.value()) {
      out.value = sum.value();
      return out;
    }
    weight *= x;
  }
  out.value = sum.value();
  out.capped = true;
  return out;
}

inline double attempt_moment(double varkappa, int ell) { return attempt_moment_series(varkappa, ell).value; }

/// Sum over i >= 1 of (i + 1)^power (1 - varkappa)^(i - 1), summed term by term.
inline SeriesValue attempt_series_direct(double varkappa, int power) {
  if (!(varkappa > 0.0 && varkappa <= 1.0)) throw DomainError("series: varkappa must lie in (0, 1]");
  const double x = 1.0 - varkappa;
  if (x == 0.0) return {std::pow(2.0, power), 1, false};
  const double peak = static_cast<double>(power) / -std::log(x);
  CompensatedSum sum;
  double weight = 1.0;
  SeriesValue out;
  for (std::size_t i = 1; i <= kSeriesCap; ++i) {
    const double term = std::pow(static_cast<double>(i + 1), power) * weight;
    sum.add(term);
    out.terms = i;
    if (static_cast<double>(i) > peak && term < kSeriesRelTol * sum.value()) {
      out.value = sum.value();
      return out;
    }
    weight *= x;
  }
  out.value = sum.value();
  out.capped = true;
  return out;
}

/// Sum over i >= 1 of (i + 1)^2 (1 - varkappa)^(i - 1) = (2 + k + k^2) / k^3.
inline double attempt_series_closed(double varkappa) {
  if (!(varkappa > 0.0 && varkappa <= 1.0)) throw DomainError("series: varkappa must lie in (0, 1]");
  const double k = varkappa;
  return (2.0 + k + k * k) / (k * k * k);
}

// ---------------------------------------------------------------------------
// First-alignment moments

/// E t_1^k with t_1 ~ F_b; k = 0 gives 1.
inline double residual_moment(const LifetimeModel& model, double b, int k) {
  if (k == 0) return 1.0;
  return moment(residual_model(model, b), k);
}

inline double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

/// E (t_1 + t_1')^ell for independent t_1 ~ F_b, t_1' ~ F_b'.
inline double t1_moment_bound(const LifetimeModel& model, double b, double b_prime, int ell) {
  if (ell < 1) throw DomainError("t1_moment_bound: ell must be >= 1");
  if (!model.moment_finite(ell)) throw DivergenceError("t1_moment_bound: E xi^ell is infinite");
  std::vector<double> mb(ell + 1);
  std::vector<double> mbp(ell + 1);
  for (int k = 0; k <= ell; ++k) {
    mb[k] = residual_moment(model, b, k);
    mbp[k] = residual_moment(model, b_prime, k);
  }
  double total = 0.0;
  for (int k = 0; k <= ell; ++k) total += binomial(ell, k) * mb[k] * mbp[ell - k];
  return total;
}

/// Integral over b' of E[t_1'^j | age b'] against the stationary overshoot law,
/// i.e. (1/mu) int db' int s^j f(s + b') ds, by nested quadrature.
inline double stationary_residual_moment(const LifetimeModel& model, int j) {
  if (j == 0) return 1.0;
  if (!model.moment_finite(j + 1)) throw DivergenceError("stationary residual moment needs E xi^(j+1) < inf");
  const Support sup = model.support();
  QuadratureOptions inner;
  inner.rel_tol = 1e-11;
  inner.abs_tol = 1e-16;
  inner.tail_scale = model.scale();
  auto inner_integral = [&](double age) {
    std::vector<double> pts;
    for (double p : model.breakpoints()) pts.push_back(p - age);
    pts.push_back(sup.lo - age);
    const double end = sup.hi - age;
    if (!(end > 0.0)) return 0.0;
    return integrate_pieces([&](double s) { return std::pow(s, j) * model.pdf(s + age); },
                            clip_breakpoints(std::move(pts), 0.0, end), inner)
        .value;
  };
  QuadratureOptions outer;
  outer.rel_tol = 1e-10;
  outer.abs_tol = 1e-15;
  outer.tail_scale = model.scale();
  std::vector<double> pts = model.breakpoints();
  pts.push_back(sup.lo);
  const double total = integrate_pieces(inner_integral, clip_breakpoints(std::move(pts), 0.0, sup.hi), outer).value;
  return total / model.mean();
}

// ---------------------------------------------------------------------------
// Upsilon

struct UpsilonTerms {
  double attempt_moment = 0.0;  // E (nu + 1)^(ell - 1)
  double t1_moment = 0.0;       // E T_1^ell majorant
  double xi_moment = 0.0;       // E xi^ell
  double series = 0.0;          // sum of (i + 1)^p (1 - varkappa)^(i - 1)
  int series_power = 2;
  bool capped = false;
  double value() const { return attempt_moment * t1_moment + xi_moment * series; }
};

namespace detail {

inline void fill_series(UpsilonTerms& u, double varkappa, int ell, bool strict_series) {
  const SeriesValue a = attempt_moment_series(varkappa, ell);
  u.attempt_moment = a.value;
  u.series_power = strict_series ? std::max(2, ell) : 2;
  if (u.series_power == 2) {
    u.series = attempt_series_closed(varkappa);
    u.capped = a.capped;
  } else {
    const SeriesValue s = attempt_series_direct(varkappa, u.series_power);
    u.series = s.value;
    u.capped = a.capped || s.capped;
  }
}

}  // namespace detail

/// Upsilon(ell, b, b', Theta, F) = E(nu+1)^(ell-1) E(t_1+t_1')^ell + E xi^ell * series.
inline UpsilonTerms upsilon_terms(const LifetimeModel& model, int ell, double b, double b_prime,
                                  const BoundParameters& params, bool strict_series = false) {
  if (!model.moment_finite(ell)) throw DivergenceError("upsilon: E xi^ell is infinite");
  UpsilonTerms u;
  detail::fill_series(u, params.varkappa, ell, strict_series);
  u.t1_moment = t1_moment_bound(model, b, b_prime, ell);
  u.xi_moment = moment(model, ell);
  return u;
}

inline double upsilon(const LifetimeModel& model, int ell, double b, double b_prime, double theta,
                      bool strict_series = false) {
  return upsilon_terms(model, ell, b, b_prime, success_prob(model, theta), strict_series).value();
}

/// Upsilon averaged over b' ~ stationary overshoot law. Only the first
/// alignment moment depends on b'.
inline UpsilonTerms upsilon_integrated_terms(const LifetimeModel& model, int ell, double b,
                                             const BoundParameters& params, bool strict_series = false) {
  if (!model.moment_finite(ell + 1)) throw DivergenceError("integrated upsilon needs E xi^(ell+1) < inf");
  UpsilonTerms u;
  detail::fill_series(u, params.varkappa, ell, strict_series);
  double t1 = 0.0;
  for (int k = 0; k <= ell; ++k) {
    t1 += binomial(ell, k) * residual_moment(model, b, k) * stationary_residual_moment(model, ell - k);
  }
  u.t1_moment = t1;
  u.xi_moment = moment(model, ell);
  return u;
}

inline double upsilon_integrated(const LifetimeModel& model, int ell, double b, double theta,
                                 bool strict_series = false) {
  return upsilon_integrated_terms(model, ell, b, success_prob(model, theta), strict_series).value();
}

/// min(1, upsilon_tilde / t^ell).
inline double polynomial_rate_curve(double upsilon_tilde, int ell, double t) {
  if (!(t > 0.0)) throw DomainError("rate curve: t must be positive");
  return std::min(1.0, upsilon_tilde / std::pow(t, ell));
}

// ---------------------------------------------------------------------------
// Theta selection

enum class ThetaObjective { kappa, upsilon };

struct ThetaChoice {
  double theta = 0.0;
  BoundParameters params;
  std::vector<double> grid;         // coarse Theta grid
  std::vector<double> grid_values;  // varkappa on the grid (0 where the overlap vanishes)
};

struct UpsilonObjective {
  int ell = 1;
  double b = 0.0;
  bool strict_series = false;
};

/// Maximizes varkappa(Theta) over (Xi, theta_max] (or minimizes the integrated
/// Upsilon): 64 log-spaced grid points, then golden-section refinement to
/// width 1e-6 * theta_max.
inline ThetaChoice optimize_theta(const LifetimeModel& model, double theta_max,
                                  ThetaObjective objective = ThetaObjective::kappa,
                                  const UpsilonObjective& upsilon_spec = {}) {
  const double xi = lorden_xi(model);
  if (!(theta_max > xi) || !std::isfinite(theta_max)) throw DomainError("theta_max must exceed Xi");

  auto varkappa_at = [&](double theta) {
    try {
      return success_prob(model, theta, xi).varkappa;
    } catch (const VanishingOverlapError&) {
      return 0.0;
    }
  };

  // Only the series factors depend on Theta; the alignment moments are fixed.
  std::optional<UpsilonTerms> fixed;
  if (objective == ThetaObjective::upsilon) {
    BoundParameters probe;
    probe.varkappa = 0.5;
    fixed = upsilon_integrated_terms(model, upsilon_spec.ell, upsilon_spec.b, probe, upsilon_spec.strict_series);
  }
  auto score = [&](double theta) {
    const double vk = varkappa_at(theta);
    if (objective == ThetaObjective::kappa) return vk;
    if (!(vk > kVanishing)) return -kInf;
    UpsilonTerms u = *fixed;
    detail::fill_series(u, vk, upsilon_spec.ell, upsilon_spec.strict_series);
    return -u.value();
  };

  constexpr std::size_t kGrid = 64;
  ThetaChoice out;
  const double ratio = std::pow(theta_max / xi, 1.0 / static_cast<double>(kGrid));
  std::size_t best = 0;
  double best_score = -kInf;
  for (std::size_t k = 1; k <= kGrid; ++k) {
    const double theta = k == kGrid ? theta_max : xi * std::pow(ratio, static_cast<double>(k));
    out.grid.push_back(theta);
    const double s = score(theta);
    out.grid_values.push_back(objective == ThetaObjective::kappa ? s : varkappa_at(theta));
    if (s > best_score) {
      best_score = s;
      best = k - 1;
    }
  }
  if (objective == ThetaObjective::kappa ? !(best_score > kVanishing) : !std::isfinite(best_score)) {
    throw VanishingOverlapError("varkappa vanishes over the whole Theta range");
  }
  const double lo = best == 0 ? xi : out.grid[best - 1];
  const double hi = best + 1 < kGrid ? out.grid[best + 1] : theta_max;
  const SearchResult r = golden_section_max(score, lo, hi, 1e-6 * theta_max);
  out.theta = r.value >= best_score ? r.x : out.grid[best];
  out.params = success_prob(model, out.theta, xi);
  return out;
}

/// Default upper end of the Theta search.
inline double default_theta_max(const LifetimeModel& model) { return 10.0 * lorden_xi(model); }

// ---------------------------------------------------------------------------
// Exponential bound

struct ExpBoundReport {
  double alpha = 0.0;
  double beta = 0.0;
  double mgf = 0.0;          // m(beta) = E exp(beta xi)
  double mgf_first = 0.0;    // E exp(beta t_1), t_1 ~ F_b
  double mgf_second = 0.0;   // E exp(beta t_1'), t_1' ~ F_b'
  double mgf_stationary_second = 0.0;  // the same averaged over b' ~ stationary law
  double mgf_margin = 0.0;   // (1 - varkappa) m(beta)
  double k_beta = 0.0;
  double k_beta_tilde = 0.0;

  /// min(1, K~ exp(-beta t)).
  double curve(double t) const { return std::min(1.0, k_beta_tilde * std::exp(-beta * t)); }
};

/// E exp(beta t) for t ~ F_b.
inline double residual_mgf(const LifetimeModel& model, double b, double beta) {
  if (!model.mgf_finite(beta)) throw DivergenceError("moment generating function is infinite at beta");
  const DerivedModel r = residual_model(model, b);
  QuadratureOptions opt;
  opt.rel_tol = 1e-11;
  opt.abs_tol = 1e-15;
  return integrate_over(r, [&](double s) { return std::exp(beta * s) * r.pdf(s); }, opt).value;
}

/// (1/mu) int db' int exp(beta s) f(s + b') ds.
inline double stationary_residual_mgf(const LifetimeModel& model, double beta) {
  if (!model.mgf_finite(beta)) throw DivergenceError("moment generating function is infinite at beta");
  const Support sup = model.support();
  QuadratureOptions inner;
  inner.rel_tol = 1e-11;
  inner.abs_tol = 1e-16;
  inner.tail_scale = model.scale();
  auto inner_integral = [&](double age) {
    std::vector<double> pts;
    for (double p : model.breakpoints()) pts.push_back(p - age);
    pts.push_back(sup.lo - age);
    const double end = sup.hi - age;
    if (!(end > 0.0)) return 0.0;
    return integrate_pieces([&](double s) { return std::exp(beta * s) * model.pdf(s + age); },
                            clip_breakpoints(std::move(pts), 0.0, end), inner)
        .value;
  };
  QuadratureOptions outer;
  outer.rel_tol = 1e-10;
  outer.abs_tol = 1e-15;
  outer.tail_scale = model.scale();
  std::vector<double> pts = model.breakpoints();
  pts.push_back(sup.lo);
  return integrate_pieces(inner_integral, clip_breakpoints(std::move(pts), 0.0, sup.hi), outer).value /
         model.mean();
}

/// Largest beta in (0, alpha) with (1 - varkappa) m(beta) <= 1 - 1e-3, found
/// by bisection to 1e-6, and the constants K_beta(b, b') and K~_beta(b).
inline ExpBoundReport exponential_rate(const LifetimeModel& model, double b, double b_prime,
                                       const BoundParameters& params, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  if (!model.mgf_finite(alpha * (1.0 - 1e-12))) {
    throw DivergenceError("E exp(alpha xi) is infinite for this distribution");
  }
  const double vk = params.varkappa;
  if (!(vk > 0.0 && vk < 1.0)) throw DomainError("varkappa must lie in (0, 1)");
  constexpr double kMargin = 1.0 - 1e-3;
  auto margin = [&](double beta) { return (1.0 - vk) * residual_mgf(model, 0.0, beta); };
  if (!(margin(0.0) <= kMargin)) {
    throw ExponentialBoundUnavailable("no admissible beta: (1 - varkappa) m(beta) <= 1 - 1e-3 fails at beta -> 0");
  }
  double lo = 0.0;
  double hi = alpha;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (margin(mid) <= kMargin ? lo : hi) = mid;
  }
  if (!(lo > 0.0)) throw ExponentialBoundUnavailable("no admissible beta above the bisection resolution");

  ExpBoundReport r;
  r.alpha = alpha;
  r.beta = lo;
  r.mgf = residual_mgf(model, 0.0, lo);
  r.mgf_margin = (1.0 - vk) * r.mgf;
  r.mgf_first = residual_mgf(model, b, lo);
  r.mgf_second = residual_mgf(model, b_prime, lo);
  r.mgf_stationary_second = stationary_residual_mgf(model, lo);
  const double geometric = vk * r.mgf / (1.0 - r.mgf_margin);
  r.k_beta = r.mgf_first * r.mgf_second * geometric;
  r.k_beta_tilde = r.mgf_first * r.mgf_stationary_second * geometric;
  return r;
}

/// Default alpha: min(mgf abscissa, 1 / E xi).
inline double default_alpha(const LifetimeModel& model) {
  return std::min(model.mgf_abscissa(), 1.0 / model.mean());
}

// ---------------------------------------------------------------------------
// Reports

struct BoundRequest {
  int ell = 1;
  double b = 0.0;
  double b_prime = 0.0;
  std::optional<double> theta;      // empty: optimize
  std::optional<double> theta_max;  // empty: default_theta_max
  ThetaObjective objective = ThetaObjective::kappa;
  bool strict_series = false;
  std::vector<double> curve_times;  // empty: a default log grid
};

struct BoundReport {
  BoundParameters params;
  int ell = 1;
  double b = 0.0;
  double b_prime = 0.0;
  bool theta_optimized = false;
  std::string objective = "kappa";
  UpsilonTerms upsilon;
  UpsilonTerms upsilon_tilde;
  std::vector<std::pair<double, double>> curve;
  std::vector<std::string> warnings;

  double rate(double t) const { return polynomial_rate_curve(upsilon_tilde.value(), ell, t); }
};

inline std::vector<double> default_curve_times(double mean, double upsilon_tilde, int ell) {
  const double lo = 0.1 * mean;
  const double hi = std::max(100.0 * mean, 10.0 * std::pow(upsilon_tilde, 1.0 / ell));
  std::vector<double> t;
  for (int i = 0; i < 100; ++i) t.push_back(lo * std::pow(hi / lo, i / 99.0));
  return t;
}

inline BoundReport compute_bound_report(const LifetimeModel& model, const BoundRequest& req) {
  if (req.ell < 1) throw InvalidParameter("ell", "must be a positive integer");
  if (!model.moment_finite(req.ell + 1)) {
    throw DivergenceError("E xi^(ell+1) is infinite; the polynomial bound of order ell is unavailable");
  }
  BoundReport rep;
  rep.ell = req.ell;
  rep.b = req.b;
  rep.b_prime = req.b_prime;
  rep.objective = req.objective == ThetaObjective::kappa ? "kappa" : "upsilon";
  if (req.theta) {
    rep.params = success_prob(model, *req.theta);
  } else {
    const double tmax = req.theta_max ? *req.theta_max : default_theta_max(model);
    rep.params = optimize_theta(model, tmax, req.objective, {req.ell, req.b, req.strict_series}).params;
    rep.theta_optimized = true;
  }
  rep.upsilon = upsilon_terms(model, req.ell, req.b, req.b_prime, rep.params, req.strict_series);
  rep.upsilon_tilde = upsilon_integrated_terms(model, req.ell, req.b, rep.params, req.strict_series);
  if (rep.upsilon.capped || rep.upsilon_tilde.capped) {
    rep.warnings.push_back("series truncated at 1e7 terms; value may be inaccurate");
  }
  for (const auto& w : model.warnings()) rep.warnings.push_back(w);
  const auto times = req.curve_times.empty()
                         ? default_curve_times(model.mean(), rep.upsilon_tilde.value(), req.ell)
                         : req.curve_times;
  for (double t : times) rep.curve.emplace_back(t, rep.rate(t));
  return rep;
}

inline nlohmann::json to_json(const BoundParameters& p) {
  return {{"theta", p.theta}, {"xi", p.xi}, {"kappa", p.kappa}, {"p0", p.p0}, {"varkappa", p.varkappa}};
}

inline nlohmann::json to_json(const UpsilonTerms& u) {
  return {{"value", u.value()},
          {"attempt_moment", u.attempt_moment},
          {"t1_moment", u.t1_moment},
          {"xi_moment", u.xi_moment},
          {"series", u.series},
          {"series_power", u.series_power}};
}

inline nlohmann::json to_json(const BoundReport& r) {
  nlohmann::json j = to_json(r.params);
  j["ell"] = r.ell;
  j["b"] = r.b;
  j["b_prime"] = r.b_prime;
  j["theta_optimized"] = r.theta_optimized;
  j["objective"] = r.objective;
  j["upsilon"] = r.upsilon.value();
  j["upsilon_tilde"] = r.upsilon_tilde.value();
  j["upsilon_terms"] = to_json(r.upsilon);
  j["upsilon_tilde_terms"] = to_json(r.upsilon_tilde);
  j["attempt_moment"] = r.upsilon.attempt_moment;
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& [t, v] : r.curve) curve.push_back({{"t", t}, {"bound", v}});
  j["rate_curve"] = curve;
  j["warnings"] = r.warnings;
  return j;
}

inline nlohmann::json to_json(const ExpBoundReport& r, const std::vector<double>& times = {}) {
  nlohmann::json j = {{"alpha", r.alpha},
                      {"beta", r.beta},
                      {"mgf", r.mgf},
                      {"mgf_first", r.mgf_first},
                      {"mgf_second", r.mgf_second},
                      {"mgf_stationary_second", r.mgf_stationary_second},
                      {"mgf_margin", r.mgf_margin},
                      {"k_beta", r.k_beta},
                      {"k_beta_tilde", r.k_beta_tilde}};
  nlohmann::json curve = nlohmann::json::array();
  for (double t : times) curve.push_back({{"t", t}, {"bound", r.curve(t)}});
  j["rate_curve"] = curve;
  return j;
}

}  // namespace regen
