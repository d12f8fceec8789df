#pragma once

// Maximal coupling of densities (the coupling lemma and its n-way form) and
// the parallel coupling of two overshoot processes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "regen/bounds.hpp"
#include "regen/distributions.hpp"
#include "regen/errors.hpp"
#include "regen/parallel.hpp"
#include "regen/quadrature.hpp"
#include "regen/random.hpp"
#include "regen/renewal.hpp"
#include "regen/solve.hpp"

namespace regen {

/// Below this residual mass two densities are treated as identical.
inline constexpr double kDegenerateMass = 1e-10;

/// Type-erased density with the data needed to tabulate integrals of it.
struct DensitySource {
  std::function<double(double)> pdf;
  Support support;
  std::vector<double> nodes;  // support ends, breakpoints and a few quantiles
  double scale = 1.0;
};

template <Distribution M>
DensitySource density_source(const M& m) {
  DensitySource src;
  src.pdf = [m](double s) { return m.pdf(s); };
  src.support = m.support();
  src.scale = m.scale();
  src.nodes = m.breakpoints();
  for (int j = 1; j < 8; ++j) src.nodes.push_back(m.quantile(j / 8.0));
  src.nodes.push_back(m.quantile(0.99));
  return src;
}

/// A distribution known through an unnormalized density g on [lo, hi]. The
/// constructor subdivides every node interval adaptively and tabulates the
/// cumulative integral at the resulting leaf boundaries, so a CDF or quantile
/// query only needs one Gauss-Kronrod panel inside a leaf. An unbounded last
/// interval is integrated adaptively on demand.
class DensityComponent {
 public:
  DensityComponent() = default;

  DensityComponent(std::function<double(double)> g, Support sup, std::vector<double> nodes, double scale)
      : g_(std::move(g)), sup_(sup), scale_(scale > 0.0 ? scale : 1.0) {
    coarse_ = clip_breakpoints(std::move(nodes), sup.lo, sup.hi);
    const std::vector<double>& coarse = coarse_;
    nodes_.push_back(coarse.front());
    cumulative_.push_back(0.0);
    CompensatedSum sum;
    for (std::size_t k = 0; k + 1 < coarse.size(); ++k) {
      const double a = coarse[k];
      const double b = coarse[k + 1];
      if (std::isfinite(b)) {
        refine(a, b, panel_of(a, b), 0, sum);
      } else {
        tail_start_ = a;
        sum.add(piece(a, b));
        nodes_.push_back(b);
        cumulative_.push_back(sum.value());
      }
    }
    mass_ = cumulative_.back();
  }

  double mass() const { return mass_; }
  Support support() const { return sup_; }
  std::vector<double> breakpoints() const { return coarse_; }
  double scale() const { return scale_; }

  double pdf(double s) const {
    if (!(s >= sup_.lo && s <= sup_.hi) || !(mass_ > 0.0)) return 0.0;
    return g_(s) / mass_;
  }

  /// int_lo^x g, unnormalized.
  double integral_to(double x) const {
    if (!(x > sup_.lo)) return 0.0;
    if (x >= sup_.hi) return mass_;
    const std::size_t k = interval_of(x);
    return cumulative_[k] + piece(nodes_[k], x);
  }

  double cdf(double x) const {
    if (!(mass_ > 0.0)) return 0.0;
    return std::clamp(integral_to(x) / mass_, 0.0, 1.0);
  }

  double sf(double x) const { return 1.0 - cdf(x); }

  double quantile(double p) const {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("quantile: p must lie in [0, 1)");
    if (!(mass_ > 0.0)) throw InternalError("quantile of a component with zero mass");
    const double target = p * mass_;
    // First node interval whose cumulative end exceeds the target.
    std::size_t k = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), target) -
                                             cumulative_.begin());
    k = std::clamp<std::size_t>(k, 1, nodes_.size() - 1) - 1;
    const double a = nodes_[k];
    const double need = target - cumulative_[k];
    double b = nodes_[k + 1];
    double at_b = cumulative_[k + 1] - cumulative_[k];
    if (!std::isfinite(b)) {
      b = expand_bracket([&](double x) { return piece(a, x) - need; }, a, scale_);
      at_b = piece(a, b);
    }
    return invert_on(a, b, need, at_b);
  }

 private:
  // Solves int_a^x g = need on [a, b] by safeguarded Newton steps. The integral
  // is carried along the iterates, so each step only integrates over the short
  // stretch between consecutive iterates.
  double invert_on(double a, double b, double need, double at_b) const {
    if (need <= 0.0) return a;
    if (need >= at_b) return b;
    double lo = a, lo_val = 0.0;
    double hi = b, hi_val = at_b;
    double x = a + (b - a) * (need / at_b);
    double x_val = piece(a, x);
    for (int it = 0; it < 200; ++it) {
      if (x_val >= need) {
        hi = x;
        hi_val = x_val;
      } else {
        lo = x;
        lo_val = x_val;
      }
      if (hi - lo <= 1e-12 * std::max(1.0, std::abs(x))) break;
      const double d = g_(x);
      double next = 0.5 * (lo + hi);
      if (d > 0.0 && std::isfinite(d)) {
        const double step = (need - x_val) / d;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(x), 1e-300)) {
          return x;
        }
        const double cand = x + step;
        if (cand > lo && cand < hi) next = cand;
      }
      if (next == x) break;
      // Integrate from whichever known point is nearest.
      double from = x, from_val = x_val;
      if (std::abs(next - lo) < std::abs(next - from)) {
        from = lo;
        from_val = lo_val;
      }
      if (std::abs(next - hi) < std::abs(next - from)) {
        from = hi;
        from_val = hi_val;
      }
      x_val = next >= from ? from_val + piece(from, next) : from_val - piece(next, from);
      x = next;
    }
    return x_val >= need ? x : hi;
  }

  static constexpr double kLeafTol = 1e-14;
  static constexpr int kMaxDepth = 60;

  detail::Panel panel_of(double a, double b) const {
    auto f = [this](double x, bool) { return g_(x); };
    return detail::gk21(f, a, b, false);
  }

  void refine(double a, double b, const detail::Panel& p, int depth, CompensatedSum& sum) {
    const double mid = 0.5 * (a + b);
    if (p.error <= kLeafTol || depth >= kMaxDepth || !(mid > a && mid < b)) {
      sum.add(p.value);
      nodes_.push_back(b);
      cumulative_.push_back(sum.value());
      return;
    }
    refine(a, mid, panel_of(a, mid), depth + 1, sum);
    refine(mid, b, panel_of(mid, b), depth + 1, sum);
  }

  /// int_a^b g for a <= b inside one leaf or inside the unbounded tail.
  double piece(double a, double b) const {
    if (!(b > a)) return 0.0;
    if (a < tail_start_ && std::isfinite(b)) return panel_of(a, b).value;
    QuadratureOptions opt;
    opt.rel_tol = 1e-11;
    opt.abs_tol = 1e-15;
    opt.tail_scale = scale_;
    return integrate_pieces(g_, std::vector<double>{a, b}, opt).value;
  }

  std::size_t interval_of(double x) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), x);
    const auto k = static_cast<std::size_t>(it - nodes_.begin());
    return std::clamp<std::size_t>(k, 1, nodes_.size() - 1) - 1;
  }

  std::function<double(double)> g_;
  Support sup_{0.0, 0.0};
  double scale_ = 1.0;
  std::vector<double> nodes_;
  std::vector<double> coarse_;
  std::vector<double> cumulative_;
  double tail_start_ = kInf;
  double mass_ = 0.0;
};

namespace detail {

inline Support support_union(std::span<const DensitySource> srcs) {
  Support s{kInf, 0.0};
  for (const auto& src : srcs) {
    s.lo = std::min(s.lo, src.support.lo);
    s.hi = std::max(s.hi, src.support.hi);
  }
  return s;
}

inline std::vector<double> merged_nodes(std::span<const DensitySource> srcs) {
  std::vector<double> nodes;
  for (const auto& src : srcs) {
    nodes.insert(nodes.end(), src.nodes.begin(), src.nodes.end());
    nodes.push_back(src.support.lo);
    nodes.push_back(src.support.hi);
  }
  return nodes;
}

inline double mean_scale(std::span<const DensitySource> srcs) {
  double s = 0.0;
  for (const auto& src : srcs) s += src.scale;
  return s / static_cast<double>(srcs.size());
}

inline DensityComponent common_component(std::span<const DensitySource> srcs) {
  std::vector<std::function<double(double)>> pdfs;
  for (const auto& src : srcs) pdfs.push_back(src.pdf);
  auto g = [pdfs](double s) {
    double m = kInf;
    for (const auto& f : pdfs) m = std::min(m, f(s));
    return std::max(m, 0.0);
  };
  return DensityComponent(g, support_union(srcs), merged_nodes(srcs), mean_scale(srcs));
}

inline DensityComponent residual_component(std::span<const DensitySource> srcs, std::size_t i) {
  std::vector<std::function<double(double)>> pdfs;
  for (const auto& src : srcs) pdfs.push_back(src.pdf);
  auto g = [pdfs, i](double s) {
    const double own = pdfs[i](s);
    double m = own;
    for (const auto& f : pdfs) m = std::min(m, f(s));
    return std::max(own - m, 0.0);
  };
  return DensityComponent(g, support_union(srcs), merged_nodes(srcs), mean_scale(srcs));
}

}  // namespace detail

/// kappa = int min(f_1, f_2).
template <Distribution M1, Distribution M2>
double common_part(const M1& m1, const M2& m2) {
  const DensitySource srcs[] = {density_source(m1), density_source(m2)};
  return std::clamp(detail::common_component(srcs).mass(), 0.0, 1.0);
}

/// Common part and the two residual parts of a pair of densities, each normalized.
struct CommonPartDecomposition {
  double kappa = 0.0;
  DensityComponent common;      // CDF Phi / kappa
  DensityComponent residual_1;  // CDF Psi / (1 - kappa)
  DensityComponent residual_2;  // CDF Psi_c / (1 - kappa)
};

/// Throws NoOverlapError when kappa = 0 and DegenerateDecomposition when the
/// densities coincide (kappa = 1, residual parts undefined).
template <Distribution M1, Distribution M2>
CommonPartDecomposition decompose(const M1& m1, const M2& m2) {
  const DensitySource srcs[] = {density_source(m1), density_source(m2)};
  CommonPartDecomposition d;
  d.common = detail::common_component(srcs);
  d.kappa = std::clamp(d.common.mass(), 0.0, 1.0);
  if (!(d.kappa > kVanishing)) throw NoOverlapError("the densities have no common part");
  d.residual_1 = detail::residual_component(srcs, 0);
  d.residual_2 = detail::residual_component(srcs, 1);
  if (std::max(d.residual_1.mass(), d.residual_2.mass()) <= kDegenerateMass) {
    throw DegenerateDecomposition("the densities coincide; treat the distributions as identical");
  }
  return d;
}

struct CoupledPair {
  double first = 0.0;
  double second = 0.0;
  bool coupled = false;
};

/// xi_i = 1(u < kappa) Phi^{-1}(kappa u') + 1(u >= kappa) Psi_i^{-1}((1 - kappa) u'').
inline CoupledPair couple_pair(const CommonPartDecomposition& dec, double u, double u1, double u2) {
  if (u < dec.kappa) {
    const double x = dec.common.quantile(u1);
    return {x, x, true};
  }
  return {dec.residual_1.quantile(u2), dec.residual_2.quantile(u2), false};
}

/// n-way version: a single common part and one residual per model.
struct NWayDecomposition {
  double kappa = 0.0;
  DensityComponent common;
  std::vector<DensityComponent> residuals;  // empty when all densities coincide
};

template <Distribution M>
NWayDecomposition decompose_n(const std::vector<M>& models) {
  if (models.size() < 2) throw DomainError("couple_n: need at least two models");
  std::vector<DensitySource> srcs;
  for (const auto& m : models) srcs.push_back(density_source(m));
  NWayDecomposition d;
  d.common = detail::common_component(srcs);
  d.kappa = std::clamp(d.common.mass(), 0.0, 1.0);
  if (!(d.kappa > kVanishing)) throw NoOverlapError("the densities have no common part");
  std::vector<DensityComponent> res;
  double worst = 0.0;
  for (std::size_t i = 0; i < srcs.size(); ++i) {
    res.push_back(detail::residual_component(srcs, i));
    worst = std::max(worst, res.back().mass());
  }
  if (worst > kDegenerateMass) {
    d.residuals = std::move(res);
  } else {
    d.kappa = 1.0;
  }
  return d;
}

struct CoupledDraw {
  std::vector<double> values;
  bool all_equal = false;
};

/// u'' holds one uniform per model.
inline CoupledDraw couple_n(const NWayDecomposition& dec, double u, double u1, std::span<const double> u2) {
  const std::size_t n = dec.residuals.empty() ? u2.size() : dec.residuals.size();
  if (u2.size() != n) throw DomainError("couple_n: need one residual uniform per model");
  CoupledDraw out;
  if (u < dec.kappa || dec.residuals.empty()) {
    out.values.assign(n, dec.common.quantile(u1));
    out.all_equal = true;
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) out.values.push_back(dec.residuals[i].quantile(u2[i]));
  return out;
}

template <Distribution M>
CoupledDraw couple_n(const std::vector<M>& models, double u, double u1, std::span<const double> u2) {
  return couple_n(decompose_n(models), u, u1, u2);
}

// ---------------------------------------------------------------------------
// Parallel coupling of two overshoot processes

/// One coupling attempt, made at a renewal epoch of the second process.
struct CouplingAttempt {
  double epoch = 0.0;
  double overshoot = 0.0;  // age u of the first process at the epoch
  bool theta_ok = false;   // u < Theta
  double gamma = 0.0;      // common part of (F_u, F); 0 when theta_ok is false
  bool success = false;
  double common_epoch = kInf;  // the next renewal of both processes when success
};

struct CouplingTrace {
  double tau = kInf;
  bool censored = true;
  double t1 = 0.0;
  double t1_prime = 0.0;
  double T1 = 0.0;
  double b = 0.0;
  double b_prime = 0.0;
  std::vector<CouplingAttempt> attempts;
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
  std::optional<RenewalPath> first;
  std::optional<RenewalPath> second;
};

struct CouplingOptions {
  bool record_epochs = false;
  /// Draw t_1' with the uniform used for t_1.
  bool shared_first_gap = false;
  /// Fault injection for harness self-tests: every residual-lifetime draw
  /// (a first gap from a positive age, the residual part of a coupling draw,
  /// the redraw at age u >= Theta) is skipped and the process renews at once.
  bool skip_residual_branch = false;
  /// Draw the second process's initial age from the stationary overshoot law.
  bool stationary_second = false;
};

namespace detail {

struct CouplingContext {
  LifetimeModel model;
  double xi = 0.0;
  std::optional<DerivedModel> stationary;
  DensitySource fresh;
};

inline CouplingContext coupling_context(const LifetimeModel& model, double theta, const CouplingOptions& opt) {
  CouplingContext ctx{model, lorden_xi(model), std::nullopt, density_source(model)};
  if (!(theta > ctx.xi)) throw DomainError("theta must exceed the Lorden functional Xi");
  if (opt.stationary_second) ctx.stationary = stationary_overshoot(model);
  return ctx;
}

/// Joint draw of (residual life at age u, fresh lifetime).
inline CoupledPair attempt_draw(const CouplingContext& ctx, double u, double v, double v1, double v2,
                                bool skip_residual, double& gamma) {
  const DerivedModel aged = residual_model(ctx.model, u);
  const DensitySource srcs[] = {density_source(aged), ctx.fresh};
  const DensityComponent common = common_component(srcs);
  gamma = std::clamp(common.mass(), 0.0, 1.0);
  if (1.0 - gamma <= kDegenerateMass) {
    // Identical laws: one draw serves both processes.
    const double x = ctx.model.quantile(v1);
    return {x, x, true};
  }
  if (v < gamma) {
    const double x = common.quantile(v1);
    return {x, x, true};
  }
  const double second = residual_component(srcs, 1).quantile(v2);
  const double first = skip_residual ? 0.0 : residual_component(srcs, 0).quantile(v2);
  return {first, second, false};
}

inline CouplingTrace run_coupling(const CouplingContext& ctx, double b, double b_prime, double theta,
                                  double horizon, UniformStream& stream, const CouplingOptions& opt) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon must be positive and finite");
  const LifetimeModel& F = ctx.model;
  CouplingTrace tr;
  if (ctx.stationary) b_prime = ctx.stationary->quantile(stream.next());
  tr.b = b;
  tr.b_prime = b_prime;
  const DerivedModel first_gap = residual_model(F, b);
  const DerivedModel second_gap = residual_model(F, b_prime);

  // Draw order: t_1, t_1', then per second-process epoch a triple (u, u', u'')
  // or a single fresh lifetime, with first-process lifetimes drawn as it renews.
  const double w1 = stream.next();
  const double w2 = opt.shared_first_gap ? w1 : stream.next();
  const bool skip = opt.skip_residual_branch;
  tr.t1 = skip && b > 0.0 ? 0.0 : first_gap.quantile(w1);
  tr.t1_prime = skip && b_prime > 0.0 ? 0.0 : second_gap.quantile(w2);
  tr.T1 = std::max(tr.t1, tr.t1_prime);

  std::vector<double> ep1;
  std::vector<double> ep2;
  auto log1 = [&](double e) {
    if (opt.record_epochs) ep1.push_back(e);
  };
  auto log2 = [&](double e) {
    if (opt.record_epochs) ep2.push_back(e);
  };

  // First process: last renewal, pending next renewal, and whether the pending
  // lifetime may be redrawn (it was drawn independently of the second process).
  double last1 = -b;
  double next1 = tr.t1;
  bool redrawable = true;
  double next2 = tr.t1_prime;

  auto renew_first_until = [&](double time) {
    while (next1 <= time) {
      log1(next1);
      last1 = next1;
      next1 = last1 + F.quantile(stream.next());
      redrawable = true;
    }
  };

  double merged_at = kInf;
  if (tr.t1 == tr.t1_prime) {
    merged_at = tr.t1;
    tr.tau = tr.t1;
    tr.censored = false;
  }

  // Walk the second process's epochs; attempts start at the first one >= T1.
  while (!std::isfinite(merged_at)) {
    const double theta_n = next2;
    if (theta_n > horizon) break;
    log2(theta_n);
    if (theta_n < tr.T1) {
      next2 = theta_n + F.quantile(stream.next());
      continue;
    }
    renew_first_until(theta_n);
    if (!redrawable) {
      // The first process's lifetime is already tied to the previous joint
      // draw; redrawing it would bias its law, so no attempt here.
      next2 = theta_n + F.quantile(stream.next());
      continue;
    }
    const double u = theta_n - last1;
    const double v = stream.next();
    const double v1 = stream.next();
    const double v2 = stream.next();
    CouplingAttempt at;
    at.epoch = theta_n;
    at.overshoot = u;
    at.theta_ok = u < theta;
    if (at.theta_ok) {
      const CoupledPair pr = attempt_draw(ctx, u, v, v1, v2, skip, at.gamma);
      if (pr.coupled) {
        at.success = true;
        at.common_epoch = theta_n + pr.first;
        merged_at = at.common_epoch;
        tr.tau = merged_at;
        tr.censored = false;
      } else {
        next1 = theta_n + pr.first;
        redrawable = pr.first == 0.0;
        next2 = theta_n + pr.second;
      }
    } else {
      // Independent draws; the first process's residual is redrawn from F_u.
      next1 = theta_n + (skip ? 0.0 : residual_draw(F, u, v2));
      redrawable = true;
      next2 = theta_n + F.quantile(v1);
    }
    tr.attempts.push_back(at);
    if (next1 == theta_n) {
      // Renewal at the attempt epoch itself.
      log1(theta_n);
      last1 = theta_n;
      next1 = theta_n + F.quantile(stream.next());
      redrawable = true;
    }
  }

  if (opt.record_epochs) {
    if (std::isfinite(merged_at)) {
      double e = merged_at;
      while (true) {
        log1(e);
        log2(e);
        if (e > horizon) break;
        e += F.quantile(stream.next());
      }
    } else {
      renew_first_until(horizon);
      log1(next1);
      log2(next2);
    }
    tr.first = RenewalPath{b, horizon, std::move(ep1)};
    tr.second = RenewalPath{b_prime, horizon, std::move(ep2)};
  }
  return tr;
}

}  // namespace detail

/// One run of the parallel coupling of B (from age b) and B' (from age b').
/// tau is the common renewal epoch after which both processes coincide, or
/// +inf (censored) when the second process passes the horizon first.
inline CouplingTrace simulate_parallel_coupling(const LifetimeModel& model, double b, double b_prime, double theta,
                                                double horizon, UniformStream& stream,
                                                const CouplingOptions& opt = {}) {
  const auto ctx = detail::coupling_context(model, theta, opt);
  return detail::run_coupling(ctx, b, b_prime, theta, horizon, stream, opt);
}

struct TauSample {
  double tau = kInf;
  bool censored = true;
  double T1 = 0.0;
  std::size_t n_attempts = 0;
  double b_prime = 0.0;
};

/// n independent traces (trace i uses substream (coupling, i)) reduced to tau.
inline std::vector<TauSample> coupling_time_samples(const LifetimeModel& model, double b, double b_prime,
                                                    double theta, std::size_t n, double horizon,
                                                    const MonteCarlo& mc, const CouplingOptions& opt = {}) {
  std::vector<TauSample> out(n);
  if (n == 0) return out;
  const auto ctx = detail::coupling_context(model, theta, opt);
  parallel_for(n, mc.jobs, [&](std::size_t i) {
    UniformStream stream = mc.substream(StreamTag::coupling, i);
    const CouplingTrace tr = detail::run_coupling(ctx, b, b_prime, theta, horizon, stream, opt);
    out[i] = {tr.tau, tr.censored, tr.T1, tr.attempts.size(), tr.b_prime};
  });
  return out;
}

/// Full traces with recorded epochs, for marginal checks.
inline std::vector<CouplingTrace> coupling_traces(const LifetimeModel& model, double b, double b_prime, double theta,
                                                  std::size_t n, double horizon, const MonteCarlo& mc,
                                                  CouplingOptions opt = {}) {
  std::vector<CouplingTrace> out(n);
  if (n == 0) return out;
  const auto ctx = detail::coupling_context(model, theta, opt);
  parallel_for(n, mc.jobs, [&](std::size_t i) {
    UniformStream stream = mc.substream(StreamTag::coupling, i);
    out[i] = detail::run_coupling(ctx, b, b_prime, theta, horizon, stream, opt);
    out[i].seed = mc.seed;
    out[i].index = i;
  });
  return out;
}

/// One JSON object per line: {"tau":..,"censored":..,"T1":..,"n_attempts":..}.
inline void write_traces_jsonl(std::ostream& os, const std::vector<TauSample>& samples) {
  for (const auto& s : samples) {
    os << "{\"tau\":" << (s.censored ? std::string("null") : format_double(s.tau))
       << ",\"censored\":" << (s.censored ? "true" : "false") << ",\"T1\":" << format_double(s.T1)
       << ",\"n_attempts\":" << s.n_attempts << "}\n";
  }
}

}  // namespace regen
