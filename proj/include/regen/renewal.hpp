#pragma once

// Delayed renewal processes and the overshoot (age) B_t and undershoot
// (residual life) W_t processes.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <string>
#include <vector>

#include "regen/distributions.hpp"
#include "regen/errors.hpp"
#include "regen/parallel.hpp"
#include "regen/random.hpp"

namespace regen {

/// Renewal epochs of a process whose last renewal before time 0 happened at -b.
struct RenewalPath {
  double initial_overshoot = 0.0;
  double horizon = 0.0;
  /// Strictly increasing; every epoch <= horizon plus one epoch beyond it.
  std::vector<double> epochs;
};

/// Shortest decimal text that round-trips to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Draw from F_age by inversion; age 0 uses F itself.
inline double residual_draw(const LifetimeModel& m, double age, double u) {
  if (age <= 0.0) return m.quantile(u);
  return DerivedModel(m, false, age).quantile(u);
}

/// t_1 = F_b^{-1}(U_1), t_k = t_{k-1} + F^{-1}(U_k), until one epoch passes the horizon.
inline RenewalPath simulate_renewal(const LifetimeModel& model, double b, double horizon, UniformStream& stream) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("simulate_renewal: horizon must be positive");
  const DerivedModel first = residual_model(model, b);
  RenewalPath path;
  path.initial_overshoot = b;
  path.horizon = horizon;
  double t = first.quantile(stream.next());
  path.epochs.push_back(t);
  while (t <= horizon) {
    t += model.quantile(stream.next());
    path.epochs.push_back(t);
  }
  return path;
}

/// B_t = t - (last epoch <= t), or b + t before the first epoch.
inline double overshoot_at(const RenewalPath& path, double t) {
  if (!(t >= 0.0) || t > path.horizon) throw RangeError("overshoot_at: t outside [0, horizon]");
  auto it = std::upper_bound(path.epochs.begin(), path.epochs.end(), t);
  if (it == path.epochs.begin()) return path.initial_overshoot + t;
  return t - *(it - 1);
}

/// W_t = (first epoch > t) - t.
inline double undershoot_at(const RenewalPath& path, double t) {
  if (!(t >= 0.0) || t > path.horizon) throw RangeError("undershoot_at: t outside [0, horizon]");
  auto it = std::upper_bound(path.epochs.begin(), path.epochs.end(), t);
  if (it == path.epochs.end()) throw RangeError("undershoot_at: no retained epoch beyond t");
  return *it - t;
}

/// Overshoot at each time in `times` for n independent paths started at age b.
/// Row i holds path i; path i uses substream (tag, i).
inline std::vector<std::vector<double>> overshoot_samples(const LifetimeModel& model, double b,
                                                          const std::vector<double>& times, std::size_t n,
                                                          const MonteCarlo& mc,
                                                          StreamTag tag = StreamTag::renewal) {
  double horizon = 0.0;
  for (double t : times) {
    if (!(t >= 0.0)) throw DomainError("overshoot_samples: times must be >= 0");
    horizon = std::max(horizon, t);
  }
  residual_model(model, b);  // saturation check up front
  std::vector<std::vector<double>> out(n, std::vector<double>(times.size(), 0.0));
  if (horizon == 0.0) {
    for (auto& row : out) std::fill(row.begin(), row.end(), b);
    return out;
  }
  parallel_for(n, mc.jobs, [&](std::size_t i) {
    UniformStream stream = mc.substream(tag, i);
    const RenewalPath path = simulate_renewal(model, b, horizon, stream);
    for (std::size_t j = 0; j < times.size(); ++j) out[i][j] = overshoot_at(path, times[j]);
  });
  return out;
}

struct MeanEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Sample mean and standard error (Welford).
inline MeanEstimate mean_and_error(const std::vector<double>& xs) {
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    ++k;
    const double delta = x - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (x - mean);
  }
  if (k < 2) return {mean, 0.0};
  const double var = m2 / static_cast<double>(k - 1);
  return {mean, std::sqrt(var / static_cast<double>(k))};
}

/// Monte Carlo estimate of E B_t from age b.
inline MeanEstimate mean_overshoot_estimate(const LifetimeModel& model, double b, double t, std::size_t n_paths,
                                            const MonteCarlo& mc) {
  if (n_paths < 100) throw DomainError("mean_overshoot_estimate: n_paths must be >= 100");
  const auto rows = overshoot_samples(model, b, {t}, n_paths, mc);
  std::vector<double> xs;
  xs.reserve(n_paths);
  for (const auto& r : rows) xs.push_back(r[0]);
  return mean_and_error(xs);
}

/// CSV with header path_id,k,epoch.
inline void write_paths_csv(std::ostream& os, const std::vector<RenewalPath>& paths) {
  os << "path_id,k,epoch\n";
  for (std::size_t i = 0; i < paths.size(); ++i) {
    for (std::size_t k = 0; k < paths[i].epochs.size(); ++k) {
      os << i << ',' << k << ',' << format_double(paths[i].epochs[k]) << '\n';
    }
  }
}

}  // namespace regen
