#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "regen/bounds.hpp"
#include "regen/coupling.hpp"
#include "regen/verify.hpp"

using namespace regen;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Oracle: varkappa(Theta) for Exp(1) in closed form, (1 - 2/Theta) e^{-Theta}.
double exp_varkappa(double theta) { return (1.0 - 2.0 / theta) * std::exp(-theta); }

// Oracle: overlap of Gamma(2,1) with its shift by u. f(s + u) < f(s) exactly
// when s > c = u e^{-u} / (1 - e^{-u}), so the overlap is
// G(c) + [1 - G(c + u)] with G(x) = 1 - (1 + x) e^{-x}.
double gamma2_overlap(double u) {
  auto G = [](double x) { return 1.0 - (1.0 + x) * std::exp(-x); };
  const double c = u * std::exp(-u) / (1.0 - std::exp(-u));
  return G(c) + (1.0 - G(c + u));
}

// Plain term-by-term sums, long double accumulation.
double direct_attempt_moment(double vk, int ell, long n_terms) {
  long double s = 0.0L;
  long double w = vk;
  for (long n = 1; n <= n_terms; ++n) {
    s += std::pow(static_cast<long double>(n + 1), ell - 1) * w;
    w *= (1.0L - vk);
  }
  return static_cast<double>(s);
}

double direct_series(double vk, int power, long n_terms) {
  long double s = 0.0L;
  long double w = 1.0L;
  for (long i = 1; i <= n_terms; ++i) {
    s += std::pow(static_cast<long double>(i + 1), power) * w;
    w *= (1.0L - vk);
  }
  return static_cast<double>(s);
}

}  // namespace

TEST_CASE("Lorden functional", "[bounds]") {
  CHECK_THAT(lorden_xi(LifetimeModel::exponential(1.0)), WithinAbs(2.0, 1e-9));
  CHECK_THAT(lorden_xi(LifetimeModel::uniform(0.0, 1.0)), WithinAbs(2.0 / 3.0, 1e-9));
  // E xi = 0.5 + 0.25, E xi^2 = 0.5 * 2 + 0.5 * 0.5.
  CHECK_THAT(lorden_xi(LifetimeModel::hyperexponential({0.5, 0.5}, {1.0, 2.0})), WithinAbs(1.25 / 0.75, 1e-9));
  CHECK_THROWS_AS(lorden_xi(LifetimeModel::lomax(1.5, 1.0)), DivergenceError);
}

TEST_CASE("kappa of theta", "[bounds]") {
  const auto e = LifetimeModel::exponential(1.0);
  CHECK_THAT(kappa_of_theta(e, 3.0), WithinAbs(std::exp(-3.0), 1e-9));
  CHECK_THAT(kappa_of_theta(e, 1.0), WithinAbs(std::exp(-1.0), 1e-9));

  const auto g = LifetimeModel::gamma(2.0, 1.0);
  double oracle = 1.0;
  for (int j = 1; j <= 10000; ++j) oracle = std::min(oracle, gamma2_overlap(2.0 * j / 10000.0));
  CHECK_THAT(kappa_of_theta(g, 2.0), WithinAbs(oracle, 1e-4));
  for (double u : {0.1, 0.7, 1.9, 4.0}) CHECK_THAT(overlap_at_shift(g, u), WithinAbs(gamma2_overlap(u), 1e-9));

  // Uniform[0,1] loses all overlap at a shift of 1.
  CHECK_THAT(kappa_of_theta(LifetimeModel::uniform(0, 1), 0.9), WithinAbs(0.1, 1e-8));
  CHECK_THROWS_AS(kappa_of_theta(LifetimeModel::uniform(0, 1), 1.0), VanishingOverlapError);
  CHECK_THROWS_AS(kappa_of_theta(e, 0.0), DomainError);
}

TEST_CASE("success probability parameters", "[bounds]") {
  const auto e = LifetimeModel::exponential(1.0);
  const BoundParameters p = success_prob(e, 3.0);
  CHECK_THAT(p.p0, WithinAbs(1.0 / 3.0, 1e-12));
  CHECK_THAT(p.varkappa, WithinAbs(std::exp(-3.0) / 3.0, 1e-9));
  CHECK_THAT(p.varkappa, WithinAbs(0.0165957, 1e-7));
  CHECK(p.theta == 3.0);
  CHECK(p.xi == 2.0);

  CHECK(success_prob(e, 2.0 + 1e-9).varkappa < 1e-8);
  CHECK_THROWS_AS(success_prob(e, 2.0), DomainError);
  CHECK_THROWS_AS(success_prob(e, 1.0), DomainError);

  const BoundParameters u = success_prob(LifetimeModel::uniform(0, 1), 0.9);
  CHECK_THAT(u.p0, WithinAbs(1.0 - (2.0 / 3.0) / 0.9, 1e-12));
  CHECK_THAT(u.p0, WithinAbs(0.2592593, 1e-7));
  CHECK_THAT(u.kappa, WithinAbs(0.1, 1e-8));
  CHECK_THAT(u.varkappa, WithinAbs(u.p0 * 0.1, 1e-9));
}

TEST_CASE("theta optimization", "[bounds]") {
  const auto e = LifetimeModel::exponential(1.0);
  const ThetaChoice c = optimize_theta(e, 20.0);
  CHECK_THAT(c.theta, WithinAbs(1.0 + std::sqrt(3.0), 1e-4));

  double grid_best = 0.0;
  for (int i = 1; i <= 100000; ++i) grid_best = std::max(grid_best, exp_varkappa(2.0 + 18.0 * i / 100000.0));
  CHECK_THAT(c.params.varkappa, WithinAbs(grid_best, 1e-5));
  CHECK_THAT(c.params.varkappa, WithinAbs(0.0174399, 1e-5));
  REQUIRE(c.grid.size() == 64);
  for (double v : c.grid_values) CHECK(c.params.varkappa >= v);
  for (std::size_t k = 1; k < c.grid.size(); ++k) CHECK(c.grid[k] > c.grid[k - 1]);
  CHECK(c.grid.front() > 2.0);
  CHECK(c.grid.back() == 20.0);

  // Uniform[0,1]: varkappa(Theta) = (1 - 2/(3 Theta))(1 - Theta), maximal at sqrt(2/3).
  const ThetaChoice u = optimize_theta(LifetimeModel::uniform(0, 1), 1.0);
  CHECK(u.theta > 2.0 / 3.0);
  CHECK(u.theta < 1.0);
  CHECK_THAT(u.theta, WithinAbs(std::sqrt(2.0 / 3.0), 1e-4));

  CHECK_THROWS_AS(optimize_theta(e, 2.0), DomainError);
  CHECK_THROWS_AS(optimize_theta(LifetimeModel::uniform(0, 1), 0.5), DomainError);

  // The upsilon objective never does worse on Upsilon~ than the kappa objective.
  const UpsilonObjective spec{2, 0.0, false};
  const ThetaChoice by_u = optimize_theta(e, 20.0, ThetaObjective::upsilon, spec);
  const double u_at_u = upsilon_integrated_terms(e, 2, 0.0, by_u.params).value();
  const double u_at_k = upsilon_integrated_terms(e, 2, 0.0, c.params).value();
  CHECK(u_at_u <= u_at_k * (1.0 + 1e-9));
}

TEST_CASE("attempt moments", "[bounds]") {
  for (double vk : {0.9, 0.3, 0.01}) CHECK(attempt_moment(vk, 1) == 1.0);
  CHECK(attempt_moment(1.0, 3) == 4.0);
  CHECK_THAT(attempt_moment(0.5, 2), WithinRel(direct_attempt_moment(0.5, 2, 1000000), 1e-12));
  CHECK_THAT(attempt_moment(0.5, 2), WithinRel(3.0, 1e-12));
  CHECK_THAT(attempt_moment(0.1, 3), WithinRel(direct_attempt_moment(0.1, 3, 1000000), 1e-12));
  CHECK_THAT(attempt_moment(0.01, 4), WithinRel(direct_attempt_moment(0.01, 4, 1000000), 1e-10));
  CHECK_THROWS_AS(attempt_moment(0.0, 2), DomainError);
  CHECK_THROWS_AS(attempt_moment(0.5, 0), DomainError);
  CHECK_FALSE(attempt_moment_series(0.01, 4).capped);
}

TEST_CASE("closed-form series equals direct summation", "[bounds]") {
  for (double vk : {0.9, 0.5, 0.1, 0.01}) {
    INFO("varkappa = " << vk);
    const double closed = attempt_series_closed(vk);
    CHECK_THAT(closed, WithinRel(attempt_series_direct(vk, 2).value, 1e-10));
    CHECK_THAT(closed, WithinRel(direct_series(vk, 2, 1000000), 1e-10));
  }
  CHECK(attempt_series_closed(1.0) == 4.0);
  CHECK_THAT(attempt_series_direct(0.05, 3).value, WithinRel(direct_series(0.05, 3, 1000000), 1e-10));
}

TEST_CASE("first alignment moments", "[bounds]") {
  const auto e = LifetimeModel::exponential(1.0);
  for (double b : {0.0, 1.0, 4.0}) {
    for (double bp : {0.0, 2.5}) CHECK_THAT(t1_moment_bound(e, b, bp, 1), WithinAbs(2.0, 1e-9));
  }
  CHECK_THAT(t1_moment_bound(e, 0.0, 0.0, 2), WithinAbs(6.0, 1e-9));

  // Uniform[0,1] aged 0.5 leaves U(0, 0.5): E(t1 + t1')^2 = 1/12 + 2 (1/4)(1/2) + 1/3.
  const auto u = LifetimeModel::uniform(0, 1);
  const double exact = 1.0 / 12.0 + 0.25 + 1.0 / 3.0;
  CHECK_THAT(t1_moment_bound(u, 0.5, 0.0, 2), WithinAbs(exact, 1e-9));
  UniformStream s(17);
  const int n = 1000000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = 0.5 * s.next() + s.next();
    sum += x * x;
    sq += x * x * x * x;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sq / n - mean * mean) / n);
  CHECK(std::abs(t1_moment_bound(u, 0.5, 0.0, 2) - mean) <= 3.0 * se);

  CHECK_THROWS_AS(t1_moment_bound(LifetimeModel::lomax(1.5, 1.0), 0.0, 0.0, 2), DivergenceError);
}

TEST_CASE("upsilon", "[bounds]") {
  const auto e = LifetimeModel::exponential(1.0);

  // Hypothetical varkappa = 1: single-term series.
  BoundParameters one;
  one.varkappa = 1.0;
  for (int ell : {1, 2, 3}) {
    const UpsilonTerms t = upsilon_terms(e, ell, 0.0, 0.0, one);
    CHECK(t.series == 4.0);
    CHECK_THAT(t.value(), WithinRel(std::pow(2.0, ell - 1) * t1_moment_bound(e, 0, 0, ell) + 4.0 * moment(e, ell), 1e-12));
  }

  // Brute-force series evaluation.
  const double theta = 1.0 + std::sqrt(3.0);
  const double vk = exp_varkappa(theta);
  const double brute = direct_attempt_moment(vk, 2, 3000000) * 6.0 + 2.0 * direct_series(vk, 2, 3000000);
  CHECK_THAT(upsilon(e, 2, 0.0, 0.0, theta), WithinRel(brute, 1e-10));

  // Nonincreasing in varkappa.
  double prev = kInf;
  for (double k : {0.001, 0.01, 0.05, 0.2, 0.5, 0.9, 1.0}) {
    BoundParameters p;
    p.varkappa = k;
    const double v = upsilon_terms(e, 2, 0.0, 1.0, p).value();
    CHECK(v <= prev);
    prev = v;
  }

  // Strict series uses the power max(2, ell).
  BoundParameters p;
  p.varkappa = 0.2;
  const UpsilonTerms strict = upsilon_terms(e, 3, 0.0, 0.0, p, true);
  CHECK(strict.series_power == 3);
  CHECK_THAT(strict.series, WithinRel(direct_series(0.2, 3, 100000), 1e-10));
  CHECK(upsilon_terms(e, 1, 0.0, 0.0, p, true).series_power == 2);
}

TEST_CASE("stationary residual moments", "[bounds]") {
  // Oracle: averaging the residual j-th moment over the stationary age gives E xi^(j+1) / ((j+1) mu).
  const auto u = LifetimeModel::uniform(0, 1);
  CHECK_THAT(stationary_residual_moment(u, 1), WithinAbs(1.0 / 3.0, 1e-9));
  CHECK_THAT(stationary_residual_moment(u, 2), WithinAbs(1.0 / 6.0, 1e-9));
  const auto g = LifetimeModel::gamma(2.0, 1.0);
  CHECK_THAT(stationary_residual_moment(g, 2), WithinRel(24.0 / 6.0, 1e-8));
  const auto h = LifetimeModel::hyperexponential({0.5, 0.5}, {1.0, 2.0});
  CHECK_THAT(stationary_residual_moment(h, 1), WithinRel(moment(h, 2) / (2.0 * moment(h, 1)), 1e-8));
  const auto w = LifetimeModel::weibull(1.5, 2.0);
  CHECK_THAT(stationary_residual_moment(w, 2), WithinRel(moment(w, 3) / (3.0 * moment(w, 1)), 1e-8));
  CHECK(stationary_residual_moment(u, 0) == 1.0);
}

TEST_CASE("integrated upsilon", "[bounds]") {
  const auto e = LifetimeModel::exponential(1.0);
  const double theta = 3.0;
  for (int ell : {1, 2}) {
    CHECK_THAT(upsilon_integrated(e, ell, 0.0, theta), WithinRel(upsilon(e, ell, 0.0, 5.0, theta), 1e-8));
  }

  // Uniform[0,1], b = 0, ell = 2 against the closed-form oracle for the alignment moment.
  const auto u = LifetimeModel::uniform(0, 1);
  const BoundParameters pu = success_prob(u, 0.9);
  const UpsilonTerms t = upsilon_integrated_terms(u, 2, 0.0, pu);
  const double oracle_t1 = 1.0 / 3.0 + 2.0 * 0.5 * (1.0 / 3.0) + 1.0 / 6.0;
  CHECK_THAT(t.t1_moment, WithinAbs(oracle_t1, 1e-9));

  // Mean-value bounds over the support of the stationary law.
  double lo = kInf;
  double hi = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double bp = 0.999 * i / 199.0;
    const double v = upsilon_terms(u, 2, 0.0, bp, pu).value();
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  CHECK(t.value() >= lo);
  CHECK(t.value() <= hi);
}

TEST_CASE("polynomial rate curve", "[bounds]") {
  CHECK(polynomial_rate_curve(16.0, 2, 8.0) == 0.25);
  CHECK(polynomial_rate_curve(16.0, 2, 4.0) == 1.0);
  CHECK(polynomial_rate_curve(16.0, 2, 2.0) == 1.0);
  CHECK_THROWS_AS(polynomial_rate_curve(16.0, 2, 0.0), DomainError);
  double prev = 1.0;
  for (int i = 1; i <= 100; ++i) {
    const double v = polynomial_rate_curve(300.0, 2, 0.5 * i);
    CHECK(v <= prev);
    CHECK(v <= 1.0);
    prev = v;
  }
}

TEST_CASE("exponential bound for Exp(1)", "[bounds]") {
  const auto e = LifetimeModel::exponential(1.0);
  const BoundParameters p = optimize_theta(e, 20.0).params;
  const ExpBoundReport r = exponential_rate(e, 0.0, 3.0, p, default_alpha(e));
  // Oracle: m(beta) = 1/(1 - beta), so the admissible edge solves (1 - vk)/(1 - beta) = 0.999.
  const double edge = 1.0 - (1.0 - p.varkappa) / 0.999;
  CHECK(r.beta <= edge);
  CHECK(r.beta >= edge - 1e-6);
  CHECK(r.beta < p.varkappa);
  CHECK_THAT(r.beta, WithinAbs(0.0164, 1e-4));
  CHECK(r.mgf_margin <= 0.999);

  const double m = 1.0 / (1.0 - r.beta);
  const double k_oracle = m * m * p.varkappa * m / (1.0 - (1.0 - p.varkappa) * m);
  CHECK_THAT(r.k_beta, WithinRel(k_oracle, 1e-8));
  // Averaging the residual MGF over the stationary age gives (m - 1)/(beta mu).
  CHECK_THAT(r.mgf_stationary_second, WithinRel((m - 1.0) / r.beta, 1e-8));
  CHECK_THAT(r.k_beta_tilde, WithinRel(k_oracle, 1e-8));
  CHECK(r.curve(0.0) == 1.0);
  CHECK(r.curve(1e4) < 1e-6);
}

TEST_CASE("exponential bound limits and unavailable cases", "[bounds]") {
  const auto e = LifetimeModel::exponential(1.0);
  const BoundParameters p = success_prob(e, 3.0);
  const ExpBoundReport tiny = exponential_rate(e, 0.0, 0.0, p, 2e-6);
  CHECK(tiny.beta < 2e-6);
  CHECK_THAT(tiny.k_beta, WithinAbs(1.0, 1e-3));

  const auto g = LifetimeModel::gamma(2.0, 1.0);
  const double beta = 0.05;
  const double mg = 1.0 / ((1.0 - beta) * (1.0 - beta));
  CHECK_THAT(stationary_residual_mgf(g, beta), WithinRel((mg - 1.0) / (beta * 2.0), 1e-8));

  BoundParameters weak = p;
  weak.varkappa = 1e-4;
  CHECK_THROWS_AS(exponential_rate(e, 0.0, 0.0, weak, 0.5), ExponentialBoundUnavailable);
  const auto lx = LifetimeModel::lomax(3.5, 2.0);
  CHECK(default_alpha(lx) == 0.0);
  CHECK_THROWS_AS(exponential_rate(lx, 0.0, 0.0, p, 0.1), DivergenceError);
  CHECK_THROWS_AS(exponential_rate(e, 0.0, 0.0, p, 0.0), DomainError);
  CHECK(default_alpha(e) == 1.0);
  CHECK(default_alpha(LifetimeModel::uniform(0, 1)) == 2.0);
}

TEST_CASE("exponential moment of the coupling time", "[bounds][mc]") {
  const auto e = LifetimeModel::exponential(1.0);
  const BoundParameters p = optimize_theta(e, 20.0).params;
  const ExpBoundReport r = exponential_rate(e, 0.0, 3.0, p, default_alpha(e));
  const auto taus = coupling_time_samples(e, 0.0, 3.0, p.theta, 10000, 1e4, MonteCarlo{606, 1});
  double sum = 0.0;
  double sq = 0.0;
  for (const auto& s : taus) {
    REQUIRE_FALSE(s.censored);
    const double v = std::exp(r.beta * s.tau);
    sum += v;
    sq += v * v;
  }
  const double mean = sum / 1e4;
  const double se = std::sqrt((sq / 1e4 - mean * mean) / 1e4);
  CHECK(mean <= r.k_beta + 3.0 * se);
}

TEST_CASE("coupling-time tails sit under the analytic bounds", "[bounds][mc]") {
  for (const auto& nm : standard_matrix()) {
    INFO(nm.name);
    const auto& m = nm.model;
    const double bp = m.quantile(0.5);
    const BoundParameters p = optimize_theta(m, default_theta_max(m)).params;
    const double u1 = upsilon_terms(m, 1, 0.0, bp, p).value();
    const double u2 = upsilon_terms(m, 2, 0.0, bp, p).value();
    std::optional<ExpBoundReport> ex;
    try {
      ex = exponential_rate(m, 0.0, bp, p, default_alpha(m));
    } catch (const ExponentialBoundUnavailable&) {
    }
    const auto taus = coupling_time_samples(m, 0.0, bp, p.theta, 10000, 1e6 * m.mean(), MonteCarlo{99, 1});

    std::vector<double> grid;
    for (int i = 1; i <= 20; ++i) grid.push_back(m.mean() * std::pow(1000.0, i / 20.0));
    const TailReport r1 = verify_tau_tail(taus, PhiKind::power(1), u1, grid);
    const TailReport r2 = verify_tau_tail(taus, PhiKind::power(2), u2, grid);
    CHECK(r1.pass);
    CHECK(r2.pass);
    if (ex) CHECK(verify_tau_tail(taus, PhiKind::exponential(ex->beta), ex->k_beta, grid).pass);

    double sum = 0.0;
    double sq = 0.0;
    for (const auto& s : taus) {
      REQUIRE_FALSE(s.censored);
      sum += s.tau;
      sq += s.tau * s.tau;
    }
    const double mean = sum / 1e4;
    const double se = std::sqrt((sq / 1e4 - mean * mean) / 1e4);
    CHECK(u1 >= mean + 3.0 * se);
  }
}

TEST_CASE("bound report", "[bounds]") {
  const auto e = LifetimeModel::exponential(1.0);
  BoundRequest req;
  req.ell = 2;
  const BoundReport r = compute_bound_report(e, req);
  CHECK(r.theta_optimized);
  CHECK_THAT(r.params.theta, WithinAbs(2.7320508, 1e-4));
  CHECK(r.params.xi == 2.0);
  CHECK(r.curve.size() == 100);
  for (std::size_t i = 1; i < r.curve.size(); ++i) CHECK(r.curve[i].second <= r.curve[i - 1].second);
  const auto j = to_json(r);
  for (const char* key : {"theta", "xi", "kappa", "p0", "varkappa", "upsilon", "upsilon_tilde", "attempt_moment",
                          "rate_curve", "ell"}) {
    CHECK(j.contains(key));
  }

  BoundRequest fixed;
  fixed.ell = 1;
  fixed.theta = 0.9;
  fixed.curve_times = {1.0, 2.0};
  const BoundReport ru = compute_bound_report(LifetimeModel::uniform(0, 1), fixed);
  CHECK_FALSE(ru.theta_optimized);
  CHECK_THAT(ru.params.xi, WithinAbs(2.0 / 3.0, 1e-12));
  CHECK(ru.curve.size() == 2);

  BoundRequest bad;
  bad.ell = 0;
  CHECK_THROWS_AS(compute_bound_report(e, bad), InvalidParameter);
  CHECK_THROWS_AS(compute_bound_report(LifetimeModel::lomax(1.8, 1.0), BoundRequest{}), DivergenceError);
}
