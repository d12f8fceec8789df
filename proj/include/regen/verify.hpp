#pragma once

// Monte Carlo checks of the analytic bounds: binned total-variation distance
// of the overshoot law to its stationary limit, coupling-time tails, and
// marginal preservation of the coupled processes.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "regen/bounds.hpp"
#include "regen/coupling.hpp"
#include "regen/distribution_json.hpp"
#include "regen/distributions.hpp"
#include "regen/errors.hpp"
#include "regen/random.hpp"
#include "regen/renewal.hpp"
#include "regen/stats.hpp"

namespace regen {

/// Bin edges at quantiles of the stationary overshoot law, so each bin has
/// stationary mass 1/n_bins.
struct StationaryBins {
  std::vector<double> edges;  // n_bins + 1 entries; last may be +inf
  std::vector<double> mass;   // stationary mass per bin
};

inline StationaryBins stationary_bins(const LifetimeModel& model, std::size_t n_bins) {
  if (n_bins < 10) throw DomainError("histogram needs at least 10 bins");
  const DerivedModel st = stationary_overshoot(model);
  StationaryBins bins;
  bins.edges.push_back(st.support().lo);
  for (std::size_t k = 1; k < n_bins; ++k) {
    bins.edges.push_back(st.quantile(static_cast<double>(k) / static_cast<double>(n_bins)));
  }
  bins.edges.push_back(st.support().hi);
  for (std::size_t k = 0; k < n_bins; ++k) {
    bins.mass.push_back(cdf(st, bins.edges[k + 1]) - cdf(st, bins.edges[k]));
  }
  return bins;
}

struct OvershootHistogram {
  double t = 0.0;
  std::size_t n_paths = 0;
  std::vector<double> freq;  // per stationary bin
  double outside = 0.0;      // mass beyond the last edge (stationary mass 0)
};

inline std::size_t bin_of(const StationaryBins& bins, double x) {
  auto it = std::upper_bound(bins.edges.begin(), bins.edges.end(), x);
  const auto k = static_cast<std::size_t>(it - bins.edges.begin());
  return std::clamp<std::size_t>(k, 1, bins.mass.size()) - 1;
}

/// Histograms of B_t at each time in `times` over n_paths paths from age b.
inline std::vector<OvershootHistogram> overshoot_histograms(const LifetimeModel& model, double b,
                                                            const std::vector<double>& times, std::size_t n_paths,
                                                            const StationaryBins& bins, const MonteCarlo& mc) {
  if (n_paths < 1000) throw DomainError("histogram needs at least 1000 paths");
  const auto rows = overshoot_samples(model, b, times, n_paths, mc, StreamTag::histogram);
  std::vector<OvershootHistogram> out;
  const double w = 1.0 / static_cast<double>(n_paths);
  const double top = bins.edges.back();
  for (std::size_t j = 0; j < times.size(); ++j) {
    OvershootHistogram h;
    h.t = times[j];
    h.n_paths = n_paths;
    h.freq.assign(bins.mass.size(), 0.0);
    std::vector<std::size_t> counts(bins.mass.size(), 0);
    std::size_t outside = 0;
    for (const auto& row : rows) {
      const double x = row[j];
      if (x > top) {
        ++outside;
      } else {
        ++counts[bin_of(bins, x)];
      }
    }
    for (std::size_t k = 0; k < counts.size(); ++k) h.freq[k] = static_cast<double>(counts[k]) * w;
    h.outside = static_cast<double>(outside) * w;
    out.push_back(std::move(h));
  }
  return out;
}

inline OvershootHistogram empirical_overshoot_hist(const LifetimeModel& model, double b, double t,
                                                   std::size_t n_paths, std::size_t n_bins, const MonteCarlo& mc) {
  return overshoot_histograms(model, b, {t}, n_paths, stationary_bins(model, n_bins), mc).front();
}

struct TvEstimate {
  double tv_hat = 0.0;
  double band = 0.0;
};

/// tv = (1/2) sum |p_k - pi_k|; band = 3 sqrt(K / (4 n)).
inline TvEstimate empirical_tv(const std::vector<double>& freq, const std::vector<double>& reference,
                               std::size_t n_paths, double outside = 0.0) {
  if (freq.size() != reference.size()) throw InternalError("histogram and reference bin counts differ");
  double total = 0.0;
  for (double p : reference) total += p;
  if (std::abs(total - 1.0) > 1e-9) throw InternalError("reference bin masses do not sum to 1");
  double s = outside;
  for (std::size_t k = 0; k < freq.size(); ++k) s += std::abs(freq[k] - reference[k]);
  TvEstimate e;
  e.tv_hat = std::clamp(0.5 * s, 0.0, 1.0);
  e.band = 3.0 * std::sqrt(static_cast<double>(freq.size()) / (4.0 * static_cast<double>(n_paths)));
  return e;
}

struct TvRecord {
  double t = 0.0;
  double tv_hat = 0.0;
  double band = 0.0;
  double bound = 1.0;
  bool pass = true;
};

struct VerificationReport {
  std::vector<TvRecord> records;
  bool pass = true;
  nlohmann::json config;
};

struct PolynomialCheckOptions {
  std::size_t n_bins = 50;
  double bound_scale = 1.0;  // multiplies the integrated Upsilon; < 1 is a self-test
  bool strict_series = false;
  std::optional<double> theta;      // empty: optimize varkappa
  std::optional<double> theta_max;  // empty: default_theta_max
};

/// Checks tv_hat(t) - band <= min(1, scale * Upsilon~ / t^ell) at every t.
inline VerificationReport verify_polynomial_bound(const LifetimeModel& model, double b, int ell,
                                                  const std::vector<double>& t_grid, std::size_t n_paths,
                                                  const MonteCarlo& mc, const PolynomialCheckOptions& opt = {}) {
  BoundRequest req;
  req.ell = ell;
  req.b = b;
  req.theta = opt.theta;
  req.theta_max = opt.theta_max;
  req.strict_series = opt.strict_series;
  req.curve_times = t_grid;
  const BoundReport bound = compute_bound_report(model, req);
  const double ut = opt.bound_scale * bound.upsilon_tilde.value();

  const StationaryBins bins = stationary_bins(model, opt.n_bins);
  const auto hists = overshoot_histograms(model, b, t_grid, n_paths, bins, mc);
  VerificationReport rep;
  for (const auto& h : hists) {
    const TvEstimate e = empirical_tv(h.freq, bins.mass, n_paths, h.outside);
    TvRecord r{h.t, e.tv_hat, e.band, polynomial_rate_curve(ut, ell, h.t), true};
    r.pass = r.tv_hat - r.band <= r.bound;
    rep.pass = rep.pass && r.pass;
    rep.records.push_back(r);
  }
  rep.config = {{"dist", to_json(model)},
                {"b", b},
                {"ell", ell},
                {"theta", bound.params.theta},
                {"varkappa", bound.params.varkappa},
                {"upsilon_tilde", bound.upsilon_tilde.value()},
                {"bound_scale", opt.bound_scale},
                {"n_paths", n_paths},
                {"n_bins", opt.n_bins},
                {"seed", mc.seed}};
  return rep;
}

inline nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& x : r.records) {
    rows.push_back({{"t", x.t}, {"tv_hat", x.tv_hat}, {"band", x.band}, {"bound", x.bound}, {"pass", x.pass}});
  }
  return {{"pass", r.pass}, {"config", r.config}, {"records", rows}};
}

/// CSV with header t,tv_hat,band,bound,pass.
inline void write_report_csv(std::ostream& os, const VerificationReport& r) {
  os << "t,tv_hat,band,bound,pass\n";
  for (const auto& x : r.records) {
    os << format_double(x.t) << ',' << format_double(x.tv_hat) << ',' << format_double(x.band) << ','
       << format_double(x.bound) << ',' << (x.pass ? "true" : "false") << '\n';
  }
}

// ---------------------------------------------------------------------------
// Coupling-time tails

struct PhiKind {
  enum class Kind { power, exponential } kind = Kind::power;
  double parameter = 1.0;  // ell for power, beta for exponential

  static PhiKind power(int ell) { return {Kind::power, static_cast<double>(ell)}; }
  static PhiKind exponential(double beta) { return {Kind::exponential, beta}; }
  double operator()(double t) const {
    return kind == Kind::power ? std::pow(t, parameter) : std::exp(parameter * t);
  }
};

struct TailRecord {
  double t = 0.0;
  double tail = 0.0;  // fraction of samples with tau > t (censored count as exceeding)
  double se = 0.0;
  double bound = 1.0;
  bool pass = true;
};

struct TailReport {
  std::vector<TailRecord> records;
  bool pass = true;
  double margin = kInf;  // min over t of bound + 3 se - tail
};

/// P(tau > t) <= constant / phi(t) + 3 se, with censored samples counted as
/// exceeding every t.
inline TailReport verify_tau_tail(const std::vector<TauSample>& samples, const PhiKind& phi, double constant,
                                  const std::vector<double>& t_grid) {
  if (samples.size() < 1000) throw DomainError("tail check needs at least 1000 samples");
  TailReport rep;
  const double n = static_cast<double>(samples.size());
  for (double t : t_grid) {
    std::size_t exceed = 0;
    for (const auto& s : samples) {
      if (s.censored || s.tau > t) ++exceed;
    }
    TailRecord r;
    r.t = t;
    r.tail = static_cast<double>(exceed) / n;
    r.se = binomial_se(r.tail, samples.size());
    r.bound = std::min(1.0, constant / phi(t));
    r.pass = r.tail <= r.bound + 3.0 * r.se;
    rep.margin = std::min(rep.margin, r.bound + 3.0 * r.se - r.tail);
    rep.pass = rep.pass && r.pass;
    rep.records.push_back(r);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Marginals of the coupled processes

struct MarginalRecord {
  double t = 0.0;
  double ks_first = 0.0;   // coupled B vs plain B
  double ks_second = 0.0;  // coupled B' vs plain B'
  double critical = 0.0;
  bool pass = true;
};

struct MarginalReport {
  std::vector<MarginalRecord> records;
  bool pass = true;
  double censor_rate = 0.0;
};

/// Two-sample KS between each coupled coordinate's overshoot and an
/// independently simulated plain renewal process at every checkpoint; the
/// critical value is the alpha = 0.01 two-sample value.
inline MarginalReport verify_coupling_marginals(const LifetimeModel& model, double b, double b_prime, double theta,
                                                const std::vector<double>& checkpoints, std::size_t n_traces,
                                                const MonteCarlo& mc, CouplingOptions opt = {}) {
  if (checkpoints.empty()) throw DomainError("need at least one checkpoint");
  const double horizon = *std::max_element(checkpoints.begin(), checkpoints.end());
  opt.record_epochs = true;
  opt.stationary_second = false;
  const auto ctx = detail::coupling_context(model, theta, opt);
  const std::size_t m = checkpoints.size();
  std::vector<std::vector<double>> first(m, std::vector<double>(n_traces));
  std::vector<std::vector<double>> second(m, std::vector<double>(n_traces));
  std::vector<char> censored(n_traces, 0);
  parallel_for(n_traces, mc.jobs, [&](std::size_t i) {
    UniformStream stream = mc.substream(StreamTag::coupling, i);
    const CouplingTrace tr = detail::run_coupling(ctx, b, b_prime, theta, horizon, stream, opt);
    for (std::size_t j = 0; j < m; ++j) {
      first[j][i] = overshoot_at(*tr.first, checkpoints[j]);
      second[j][i] = overshoot_at(*tr.second, checkpoints[j]);
    }
    censored[i] = tr.censored ? 1 : 0;
  });
  const auto plain1 = overshoot_samples(model, b, checkpoints, n_traces, mc, StreamTag::plain_first);
  const auto plain2 = overshoot_samples(model, b_prime, checkpoints, n_traces, mc, StreamTag::plain_second);

  MarginalReport rep;
  std::size_t n_cens = 0;
  for (char c : censored) n_cens += static_cast<std::size_t>(c);
  rep.censor_rate = static_cast<double>(n_cens) / static_cast<double>(std::max<std::size_t>(n_traces, 1));
  const double crit = ks_critical_two_sample(0.01, n_traces, n_traces);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> p1(n_traces);
    std::vector<double> p2(n_traces);
    for (std::size_t i = 0; i < n_traces; ++i) {
      p1[i] = plain1[i][j];
      p2[i] = plain2[i][j];
    }
    MarginalRecord r;
    r.t = checkpoints[j];
    r.ks_first = ks_two_sample(first[j], std::move(p1));
    r.ks_second = ks_two_sample(second[j], std::move(p2));
    r.critical = crit;
    r.pass = r.ks_first < crit && r.ks_second < crit;
    rep.pass = rep.pass && r.pass;
    rep.records.push_back(r);
  }
  return rep;
}

// ---------------------------------------------------------------------------

struct NamedModel {
  std::string name;
  LifetimeModel model;
};

/// Exponential(1), Uniform[0,1], Gamma(2,1) and the 0.5/0.5 hyperexponential with rates 1 and 2.
inline std::vector<NamedModel> standard_matrix() {
  return {{"exponential(1)", LifetimeModel::exponential(1.0)},
          {"uniform(0,1)", LifetimeModel::uniform(0.0, 1.0)},
          {"gamma(2,1)", LifetimeModel::gamma(2.0, 1.0)},
          {"hyperexp(0.5/0.5,1,2)", LifetimeModel::hyperexponential({0.5, 0.5}, {1.0, 2.0})}};
}

}  // namespace regen
