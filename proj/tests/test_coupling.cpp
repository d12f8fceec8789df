#include <catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <vector>

#include "regen/bounds.hpp"
#include "regen/coupling.hpp"
#include "regen/stats.hpp"
#include "regen/verify.hpp"

using namespace regen;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Brute-force oracle for the common part: midpoint rule on a dense grid.
template <class A, class B>
double brute_common_part(const A& a, const B& b, double lo, double hi, int n) {
  const double h = (hi - lo) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (i + 0.5) * h;
    s += std::min(a.pdf(x), b.pdf(x));
  }
  return s * h;
}

struct PairStats {
  std::vector<double> first;
  std::vector<double> second;
  std::size_t coupled = 0;
};

PairStats draw_pairs(const CommonPartDecomposition& dec, std::size_t n, std::uint64_t seed) {
  PairStats st;
  st.first.reserve(n);
  st.second.reserve(n);
  UniformStream s(seed, StreamTag::lemma, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = s.next();
    const double u1 = s.next();
    const double u2 = s.next();
    const CoupledPair p = couple_pair(dec, u, u1, u2);
    st.first.push_back(p.first);
    st.second.push_back(p.second);
    if (p.coupled) ++st.coupled;
  }
  return st;
}

}  // namespace

TEST_CASE("common part examples", "[coupling]") {
  const auto e = LifetimeModel::exponential(1.0);
  CHECK_THAT(common_part(e, e), WithinAbs(1.0, 1e-10));
  CHECK_THAT(common_part(LifetimeModel::uniform(0, 2), LifetimeModel::uniform(1, 3)), WithinAbs(0.5, 1e-10));

  // Unnormalized shifted density: min(e^{-(s+1)}, e^{-s}) integrates to e^{-1}.
  CHECK_THAT(overlap_at_shift(e, 1.0), WithinAbs(std::exp(-1.0), 1e-9));

  // Exp(1) vs Exp(2): the densities cross at ln 2, giving (1 - 1/2) + 1/4.
  const auto e2 = LifetimeModel::exponential(2.0);
  const double oracle = brute_common_part(e, e2, 0.0, 40.0, 400000);
  CHECK_THAT(common_part(e, e2), WithinAbs(oracle, 1e-6));
  CHECK_THAT(common_part(e, e2), WithinAbs(0.75, 1e-9));
}

TEST_CASE("decompose splits two uniforms into three uniforms", "[coupling]") {
  const auto dec = decompose(LifetimeModel::uniform(0, 2), LifetimeModel::uniform(1, 3));
  CHECK_THAT(dec.kappa, WithinAbs(0.5, 1e-10));
  for (double p : {0.1, 0.25, 0.5, 0.9}) {
    CHECK_THAT(dec.common.quantile(p), WithinAbs(1.0 + p, 1e-8));
    CHECK_THAT(dec.residual_1.quantile(p), WithinAbs(p, 1e-8));
    CHECK_THAT(dec.residual_2.quantile(p), WithinAbs(2.0 + p, 1e-8));
  }
}

TEST_CASE("decompose errors", "[coupling]") {
  const auto g = LifetimeModel::gamma(2.0, 1.0);
  CHECK_THROWS_AS(decompose(g, g), DegenerateDecomposition);
  CHECK_THROWS_AS(decompose(LifetimeModel::uniform(0, 1), LifetimeModel::uniform(2, 3)), NoOverlapError);
  CHECK(common_part(LifetimeModel::uniform(0, 1), LifetimeModel::uniform(2, 3)) == 0.0);
}

TEST_CASE("mixture reassembly reconstructs both CDFs", "[coupling]") {
  const auto e1 = LifetimeModel::exponential(1.0);
  const auto e2 = LifetimeModel::exponential(2.0);
  const auto g = LifetimeModel::gamma(2.0, 1.0);
  const auto w = LifetimeModel::weibull(1.5, 1.0);
  const auto aged = residual_model(g, 0.8);

  auto check = [](const auto& m1, const auto& m2, double hi) {
    const auto dec = decompose(m1, m2);
    for (int i = 0; i < 1000; ++i) {
      const double x = hi * i / 999.0;
      const double c = dec.kappa * dec.common.cdf(x);
      CHECK_THAT(c + (1.0 - dec.kappa) * dec.residual_1.cdf(x), WithinAbs(cdf(m1, x), 1e-8));
      CHECK_THAT(c + (1.0 - dec.kappa) * dec.residual_2.cdf(x), WithinAbs(cdf(m2, x), 1e-8));
    }
  };
  check(e1, e2, 15.0);
  check(g, w, 10.0);
  check(aged, g, 12.0);
  check(LifetimeModel::uniform(0, 2), LifetimeModel::uniform(1, 3), 4.0);
}

TEST_CASE("couple_pair branches", "[coupling]") {
  const auto dec = decompose(LifetimeModel::uniform(0, 2), LifetimeModel::uniform(1, 3));
  const CoupledPair a = couple_pair(dec, 0.2, 0.7, 0.1);
  CHECK(a.coupled);
  CHECK(a.first == a.second);
  const CoupledPair b = couple_pair(dec, 0.6, 0.7, 0.5);
  CHECK_FALSE(b.coupled);
  CHECK_THAT(b.first, WithinAbs(0.5, 1e-8));
  CHECK_THAT(b.second, WithinAbs(2.5, 1e-8));
}

TEST_CASE("couple_pair marginals and coupling probability", "[coupling][mc]") {
  const auto e1 = LifetimeModel::exponential(1.0);
  const auto e2 = LifetimeModel::exponential(2.0);
  const auto g = LifetimeModel::gamma(2.0, 1.0);
  const auto w = LifetimeModel::weibull(1.5, 1.0);
  const auto u1 = LifetimeModel::uniform(0, 2);
  const auto u2 = LifetimeModel::uniform(1, 3);
  const std::size_t n = 100000;

  auto check = [&](const auto& m1, const auto& m2, std::uint64_t seed) {
    const auto dec = decompose(m1, m2);
    const PairStats st = draw_pairs(dec, n, seed);
    CHECK(ks_one_sample(st.first, [&](double x) { return cdf(m1, x); }) < 0.0065);
    CHECK(ks_one_sample(st.second, [&](double x) { return cdf(m2, x); }) < 0.0065);
    const double p = static_cast<double>(st.coupled) / static_cast<double>(n);
    CHECK(std::abs(p - dec.kappa) <= 3.0 * binomial_se(dec.kappa, n));
  };
  check(u1, u2, 1);
  check(e1, e2, 2);
  check(g, w, 3);
}

TEST_CASE("couple_n with three uniforms", "[coupling][mc]") {
  const std::vector<LifetimeModel> ms{LifetimeModel::uniform(0, 2), LifetimeModel::uniform(1, 3),
                                      LifetimeModel::uniform(0.5, 2.5)};
  const auto dec = decompose_n(ms);
  CHECK_THAT(dec.kappa, WithinAbs(0.5, 1e-10));
  REQUIRE(dec.residuals.size() == 3);

  const std::size_t n = 100000;
  std::array<std::vector<double>, 3> xs;
  std::size_t equal = 0;
  UniformStream s(9, StreamTag::lemma, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = s.next();
    const double u1 = s.next();
    const std::array<double, 3> u2{s.next(), s.next(), s.next()};
    const CoupledDraw d = couple_n(dec, u, u1, u2);
    for (int k = 0; k < 3; ++k) xs[k].push_back(d.values[k]);
    if (d.all_equal) {
      ++equal;
      CHECK((d.values[0] == d.values[1] && d.values[1] == d.values[2]));
    }
  }
  for (int k = 0; k < 3; ++k) {
    CHECK(ks_one_sample(xs[k], [&](double x) { return ms[k].cdf(x); }) < 0.0065);
  }
  const double p = static_cast<double>(equal) / static_cast<double>(n);
  CHECK(std::abs(p - 0.5) <= 3.0 * binomial_se(0.5, n));
}

TEST_CASE("couple_n with identical models always agrees", "[coupling]") {
  const auto g = LifetimeModel::gamma(2.0, 1.0);
  const std::vector<LifetimeModel> ms{g, g, g};
  const auto dec = decompose_n(ms);
  CHECK(dec.kappa == 1.0);
  CHECK(dec.residuals.empty());
  const std::array<double, 3> u2{0.1, 0.2, 0.3};
  const CoupledDraw d = couple_n(ms, 0.999, 0.5, u2);
  CHECK(d.all_equal);
  CHECK_THAT(d.values[0], WithinAbs(g.quantile(0.5), 1e-8));
  CHECK(d.values[1] == d.values[0]);
  CHECK_THROWS_AS(decompose_n(std::vector<LifetimeModel>{g}), DomainError);
  const std::vector<LifetimeModel> us{LifetimeModel::uniform(0, 2), LifetimeModel::uniform(1, 3),
                                      LifetimeModel::uniform(0.5, 2.5)};
  CHECK_THROWS_AS(couple_n(us, 0.9, 0.5, std::span<const double>(u2.data(), 2)), DomainError);
}

TEST_CASE("symmetric start with a shared first gap couples at the first renewal", "[coupling]") {
  const auto g = LifetimeModel::gamma(2.0, 1.0);
  CouplingOptions opt;
  opt.shared_first_gap = true;
  for (std::uint64_t i = 0; i < 20; ++i) {
    UniformStream s(4, StreamTag::coupling, i);
    const auto tr = simulate_parallel_coupling(g, 1.5, 1.5, 5.0, 100.0, s, opt);
    CHECK_FALSE(tr.censored);
    CHECK(tr.tau == tr.t1);
    CHECK(tr.t1 == tr.t1_prime);
    CHECK(tr.attempts.empty());
  }
}

TEST_CASE("simulator preconditions", "[coupling]") {
  const auto e = LifetimeModel::exponential(1.0);
  UniformStream s(1);
  CHECK_THROWS_AS(simulate_parallel_coupling(e, 0.0, 3.0, 2.0, 10.0, s), DomainError);
  CHECK_THROWS_AS(simulate_parallel_coupling(e, 0.0, 3.0, 3.0, 0.0, s), DomainError);
  CHECK_THROWS_AS(simulate_parallel_coupling(LifetimeModel::uniform(0, 1), 1.0, 0.0, 1.0, 10.0, s), SaturationError);
}

TEST_CASE("trace invariants", "[coupling]") {
  const auto h = LifetimeModel::hyperexponential({0.5, 0.5}, {1.0, 2.0});
  const double theta = 3.0;
  CouplingOptions opt;
  opt.record_epochs = true;
  for (std::uint64_t i = 0; i < 300; ++i) {
    UniformStream s(8, StreamTag::coupling, i);
    const auto tr = simulate_parallel_coupling(h, 0.4, 2.0, theta, 200.0, s, opt);
    CHECK(tr.T1 == std::max(tr.t1, tr.t1_prime));
    CHECK(tr.T1 <= tr.t1 + tr.t1_prime);
    for (std::size_t k = 0; k < tr.attempts.size(); ++k) {
      const auto& a = tr.attempts[k];
      CHECK(a.epoch >= tr.T1);
      if (k > 0) CHECK(a.epoch > tr.attempts[k - 1].epoch);
      if (!a.theta_ok) CHECK_FALSE(a.success);
      CHECK(a.theta_ok == (a.overshoot < theta));
    }
    if (!tr.censored && !tr.attempts.empty()) {
      CHECK(tr.attempts.back().success);
      CHECK(tr.tau == tr.attempts.back().common_epoch);
    }
    if (!tr.censored) {
      // After tau both coordinates renew at the same epochs.
      std::vector<double> a;
      std::vector<double> b;
      for (double e : tr.first->epochs) {
        if (e >= tr.tau) a.push_back(e);
      }
      for (double e : tr.second->epochs) {
        if (e >= tr.tau) b.push_back(e);
      }
      CHECK(a == b);
      CHECK_FALSE(a.empty());
    }
  }
}

TEST_CASE("Exp(1) from (0, 3) couples before the horizon", "[coupling][mc]") {
  const auto e = LifetimeModel::exponential(1.0);
  const double theta = 1.0 + std::sqrt(3.0);
  const auto taus = coupling_time_samples(e, 0.0, 3.0, theta, 10000, 1e4, MonteCarlo{31, 1});
  std::size_t ok = 0;
  for (const auto& s : taus) ok += s.censored ? 0 : 1;
  CHECK(static_cast<double>(ok) / 1e4 > 0.999);
}

TEST_CASE("per-attempt success rate dominates kappa", "[coupling][mc]") {
  const auto g = LifetimeModel::gamma(2.0, 1.0);
  const double theta = 5.0;
  const double kappa = kappa_of_theta(g, theta);
  std::size_t tries = 0;
  std::size_t wins = 0;
  for (std::uint64_t i = 0; i < 1500; ++i) {
    UniformStream s(12, StreamTag::coupling, i);
    const auto tr = simulate_parallel_coupling(g, 0.0, 4.0, theta, 1e4, s);
    for (const auto& a : tr.attempts) {
      if (!a.theta_ok) continue;
      ++tries;
      if (a.success) ++wins;
      CHECK(a.gamma >= kappa - 1e-9);
    }
  }
  REQUIRE(tries > 0);
  const double rate = static_cast<double>(wins) / static_cast<double>(tries);
  CHECK(rate >= kappa - 3.0 * binomial_se(kappa, tries));
}

TEST_CASE("coupling time samples", "[coupling]") {
  const auto e = LifetimeModel::exponential(1.0);
  const MonteCarlo mc{5, 1};
  CHECK(coupling_time_samples(e, 0.0, 0.0, 3.0, 0, 100.0, mc).empty());

  const auto taus = coupling_time_samples(e, 0.0, 0.0, 3.0, 2000, 1e4, mc);
  double prev = 1.0;
  for (double t = 0.0; t <= 30.0; t += 0.5) {
    std::size_t k = 0;
    for (const auto& s : taus) k += (s.censored || s.tau > t) ? 1 : 0;
    const double tail = static_cast<double>(k) / 2000.0;
    CHECK(tail <= prev);
    prev = tail;
  }

  // Empirical mean coupling time sits under the first-moment bound.
  const auto taus3 = coupling_time_samples(e, 0.0, 3.0, 1.0 + std::sqrt(3.0), 4000, 1e4, mc);
  double sum = 0.0;
  double sq = 0.0;
  for (const auto& s : taus3) {
    REQUIRE_FALSE(s.censored);
    sum += s.tau;
    sq += s.tau * s.tau;
  }
  const double mean = sum / 4000.0;
  const double se = std::sqrt((sq / 4000.0 - mean * mean) / 4000.0);
  CHECK(mean - 3.0 * se <= upsilon(e, 1, 0.0, 3.0, 1.0 + std::sqrt(3.0)));

  // Same seed, different worker counts.
  const auto a = coupling_time_samples(e, 0.0, 3.0, 3.0, 500, 1e4, MonteCarlo{77, 1});
  const auto b = coupling_time_samples(e, 0.0, 3.0, 3.0, 500, 1e4, MonteCarlo{77, 4});
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].tau == b[i].tau);
    CHECK(a[i].n_attempts == b[i].n_attempts);
  }
}

TEST_CASE("trace dump as JSON lines", "[coupling]") {
  std::vector<TauSample> s(2);
  s[0] = {2.5, false, 1.25, 3, 0.0};
  s[1] = {kInf, true, 0.5, 7, 0.0};
  std::ostringstream os;
  write_traces_jsonl(os, s);
  CHECK(os.str() ==
        "{\"tau\":2.5,\"censored\":false,\"T1\":1.25,\"n_attempts\":3}\n"
        "{\"tau\":null,\"censored\":true,\"T1\":0.5,\"n_attempts\":7}\n");
}

TEST_CASE("coupled marginals match plain renewal processes", "[coupling][mc]") {
  const auto e = LifetimeModel::exponential(1.0);
  const auto rep = verify_coupling_marginals(e, 0.0, 3.0, 1.0 + std::sqrt(3.0), {1.0, 5.0, 20.0}, 20000,
                                             MonteCarlo{2024, 1});
  for (const auto& r : rep.records) {
    INFO("t = " << r.t << " ks " << r.ks_first << " " << r.ks_second);
    CHECK(r.pass);
  }
  CHECK(rep.pass);

  const auto g = LifetimeModel::gamma(2.0, 1.0);
  const auto rg = verify_coupling_marginals(g, 0.5, 2.0, 5.0, {2.0, 6.0}, 10000, MonteCarlo{2025, 1});
  CHECK(rg.pass);

  CouplingOptions shared;
  shared.shared_first_gap = true;
  const auto rs = verify_coupling_marginals(g, 1.0, 1.0, 5.0, {1.0, 4.0}, 10000, MonteCarlo{2026, 1}, shared);
  CHECK(rs.pass);
}

TEST_CASE("skipping residual draws breaks the marginals", "[coupling][mc]") {
  const auto e = LifetimeModel::exponential(1.0);
  CouplingOptions fault;
  fault.skip_residual_branch = true;
  const auto rep = verify_coupling_marginals(e, 0.0, 3.0, 1.0 + std::sqrt(3.0), {1.0, 5.0, 20.0}, 10000,
                                             MonteCarlo{2024, 1}, fault);
  CHECK_FALSE(rep.pass);

}
