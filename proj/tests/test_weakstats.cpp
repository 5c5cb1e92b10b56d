#include <cmath>
#include <random>
#include <vector>

#include <boost/rational.hpp>

#include "doctest.h"
#include "oracles.hpp"
#include "senssolve/error.hpp"
#include "senssolve/weakstats.hpp"

using namespace senssolve;
using Rational = boost::rational<long long>;

TEST_CASE("d_stat values") {
  CHECK(d_stat(5.0, 2.0) == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
  CHECK(d_stat(-3.0, 2.0) == doctest::Approx(-4.0).epsilon(1e-15));
  for (double x : {-7.5, -1.0, 0.0, 2.0, 100.0}) CHECK(d_stat(x, 1.0) == x);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 10.0);
  std::uniform_real_distribution<double> g(1.0, 50.0);
  for (int k = 0; k < 1000; ++k) {
    const double x = z(rng), gamma = g(rng);
    CHECK(d_stat(x, gamma) == doctest::Approx(oracle::d_stat(x, gamma)).epsilon(1e-12));
  }
}

TEST_CASE("three-unit example with exact rationals") {
  // Box for n = 3, gamma = 2.
  const GammaModel m(2.0);
  CHECK(m.rho_min(3) == 0.2);
  CHECK(m.rho_max(3) == 0.5);
  const std::vector<double> delta{5.0, -2.0, -3.0};
  const auto map = worst_case_probability_map(delta, 0.0, m);
  CHECK(map.weights == std::vector<double>{0.5, 0.2, 0.2});
  CHECK(map.sum == doctest::Approx(0.9).epsilon(1e-15));

  // W = (1/3) delta / rho~; exact expectation under every binary u at gamma 2.
  const std::vector<Rational> d{5, -2, -3};
  const std::vector<Rational> rho_tilde{Rational(1, 2), Rational(1, 5), Rational(1, 5)};
  Rational best(-1000);
  for (unsigned mask = 0; mask < 8; ++mask) {
    Rational total = 0;
    for (int j = 0; j < 3; ++j) total += (mask >> j) & 1U ? 2 : 1;
    Rational e = 0;
    for (int j = 0; j < 3; ++j) {
      const Rational p = Rational((mask >> j) & 1U ? 2 : 1) / total;
      e += p * Rational(1, 3) * d[j] / rho_tilde[j];
    }
    CHECK(e < 0);
    best = std::max(best, e);
  }
  CHECK(best == Rational(-5, 12));
  // The library's IPW form agrees with the same expression.
  CHECK(ipw_equivalent(5.0, 3, 5.0, 2.5) == doctest::Approx(10.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("worst_case_probability_map conventions") {
  const GammaModel m(3.0);
  const auto zero = worst_case_probability_map(std::vector<double>{1.0, 1.0, 1.0, 1.0}, 1.0, m);
  CHECK(zero.sum == doctest::Approx(4.0 * 3.0 / (3.0 + 3.0)));
  const auto pair = worst_case_probability_map(std::vector<double>{2.0, -2.0}, 0.0, m);
  CHECK(pair.weights[0] == doctest::Approx(0.75));
  CHECK(pair.weights[1] == doctest::Approx(0.25));
  CHECK(pair.sum == doctest::Approx(1.0));
}

TEST_CASE("k_weighted_average, ktilde and dbar") {
  std::vector<StratumSummary> one{{5.0, 1.0, 5.0, 3}};
  const GammaModel m(2.0);
  CHECK(ktilde(one, 0.0, m) == doctest::Approx(100.0 / 21.0).epsilon(1e-14));
  const std::vector<std::size_t> sizes{3};
  CHECK(k_weighted_average(one, 0.0, IntervalRestriction::rosenbaum(sizes, m)) ==
        doctest::Approx(100.0 / 21.0).epsilon(1e-14));

  std::vector<StratumSummary> two{{5.0, 0.4, 5.0, 2}, {-3.0, 0.6, -3.0, 3}};
  CHECK(dbar(two, 0.0, m) == doctest::Approx(-16.0 / 15.0).epsilon(1e-14));
  CHECK(dbar(two, 0.0, GammaModel(1.0)) == doctest::Approx(0.4 * 5.0 - 0.6 * 3.0));
  CHECK(ktilde(two, 0.0, GammaModel(1.0)) == doctest::Approx(0.4 * 5.0 - 0.6 * 3.0));
  std::vector<StratumSummary> null{{1.0, 0.5, 1.0, 2}, {1.0, 0.5, 1.0, 4}};
  CHECK(dbar(null, 1.0, m) == 0.0);
  CHECK(ktilde(null, 1.0, m) == 0.0);

  IntervalRestriction bad{{1.0}, {2.0}, {3}};
  CHECK_THROWS_AS(bad.validate(), Error);
  CHECK_THROWS_AS(k_weighted_average(one, 0.0, bad), Error);
}

TEST_CASE("pairs collapse ktilde onto dbar") {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 100; ++rep) {
    const MatchedDesign d = oracle::random_design(rng, 25, 2, 0.5);
    const auto s = summarize(d);
    for (double g : {1.0, 1.3, 2.0, 6.0}) {
      const GammaModel m(g);
      const auto kt = ktilde_terms(s, 0.1, m);
      const auto db = dbar_terms(s, 0.1, m);
      // Same terms up to the constant (1 + G)/2.
      for (std::size_t i = 0; i < kt.size(); ++i) CHECK(kt[i] == doctest::Approx(0.5 * (1.0 + g) * db[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("ipw equivalence holds on random inputs") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 5.0);
  std::uniform_real_distribution<double> g(1.0, 10.0), t(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> size(2, 20);
  for (int k = 0; k < 10000; ++k) {
    const double x = z(rng), gamma = g(rng);
    const std::size_t n = size(rng);
    const double kappa = n + t(rng) * (n * gamma - n);
    const double lhs = ipw_equivalent(x, n, kappa, gamma);
    const double rhs = kappa / n * (1.0 + gamma) / (2.0 * gamma) * d_stat(x, gamma);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
  CHECK(ipw_equivalent(0.0, 3, 5.0, 2.5) == 0.0);
  // Negative values divide by the lower endpoint 1/kappa.
  CHECK(ipw_equivalent(-2.0, 4, 8.0, 3.0) == doctest::Approx(-2.0 * 8.0 / 4.0));
  CHECK_THROWS_AS(ipw_equivalent(1.0, 3, 2.0, 2.0), Error);
}

TEST_CASE("zero-sum strata: the penalized statistic has expectation at most zero") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> g(1.0, 8.0);
  for (int rep = 0; rep < 500; ++rep) {
    const std::size_t n = 2 + rep % 5;
    std::vector<double> q(n);
    double mean = 0.0;
    for (double& v : q) {
      v = z(rng);
      mean += v / n;
    }
    for (double& v : q) v -= mean;
    const double gamma = g(rng);
    std::vector<double> a(n);
    for (std::size_t j = 0; j < n; ++j) a[j] = d_stat(q[j], gamma);
    std::vector<int> signs(n);
    for (std::size_t j = 0; j < n; ++j) signs[j] = q[j] >= 0.0 ? 1 : 0;
    CHECK(std::abs(oracle::moments_for(a, signs, gamma).mu) < 1e-12);
    for (unsigned mask = 0; mask < (1U << n); ++mask) {
      CHECK(oracle::moments_for(a, oracle::bits(mask, n), gamma).mu <= 1e-12);
    }
  }
}

namespace {

// Exact E(statistic) over all assignments drawn from rho.
double exact_expectation(const PotentialOutcomes& po, const std::vector<std::vector<double>>& rho,
                         const std::function<double(const MatchedDesign&)>& stat) {
  double e = 0.0;
  oracle::for_each_assignment(rho, [&](const std::vector<std::size_t>& z, double p) { e += p * stat(po.observe(z)); });
  return e;
}

PotentialOutcomes random_potential(std::mt19937_64& rng, std::size_t b, std::size_t max_n, bool center) {
  std::normal_distribution<double> z(0.0, 1.0);
  std::exponential_distribution<double> e(1.0);
  std::uniform_int_distribution<std::size_t> size(2, max_n);
  std::vector<PotentialStratum> strata(b);
  for (auto& s : strata) {
    const std::size_t n = size(rng);
    for (std::size_t j = 0; j < n; ++j) {
      s.r_control.push_back(z(rng));
      s.r_treated.push_back(s.r_control.back() + 3.0 * (e(rng) - 1.0) + z(rng));
    }
  }
  PotentialOutcomes po(strata);
  if (center) {
    // Shift treated outcomes so that tau_bar = 0.
    const double shift = po.tau_bar();
    for (auto& s : strata) {
      for (double& v : s.r_treated) v -= shift;
    }
    po = PotentialOutcomes(strata);
  }
  return po;
}

}  // namespace

TEST_CASE("interval-restriction bound on the expectation of K") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> g(1.0, 4.0);
  std::gamma_distribution<double> dir(1.0, 1.0);
  for (int rep = 0; rep < 150; ++rep) {
    const PotentialOutcomes po = random_potential(rng, 1 + rep % 3, 4, false);
    const GammaModel m(g(rng));
    std::vector<std::size_t> sizes;
    for (const auto& s : po.strata()) sizes.push_back(s.size());
    const auto restriction = IntervalRestriction::concordant(sizes, m);
    // Random rho inside the box kappa^-1 <= rho <= G kappa^-1.
    std::vector<std::vector<double>> rho;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      const double n = static_cast<double>(sizes[i]);
      const double lo = 1.0 / restriction.kappa[i], hi = m.gamma() / restriction.kappa[i];
      std::vector<double> row;
      while (true) {
        row.assign(sizes[i], 0.0);
        double total = 0.0;
        for (double& v : row) total += (v = dir(rng));
        bool ok = true;
        for (double& v : row) {
          v = lo + (1.0 - n * lo) * v / total;
          ok = ok && v <= hi + 1e-15;
        }
        if (ok) break;
      }
      rho.push_back(row);
    }
    const double tau0 = po.tau_bar() + 0.2 * (rep % 5 - 2);
    const double e = exact_expectation(po, rho, [&](const MatchedDesign& d) {
      return k_weighted_average(summarize(d), tau0, restriction);
    });
    CHECK(e <= 2.0 * m.gamma() / (1.0 + m.gamma()) * (po.tau_bar() - tau0) + 1e-12);
  }
}

TEST_CASE("ktilde has nonpositive expectation over the weak null for every binary confounder") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> g(1.0, 5.0);
  for (int rep = 0; rep < 60; ++rep) {
    const PotentialOutcomes po = random_potential(rng, 1 + rep % 3, 4, true);
    const GammaModel m(g(rng));
    // Every combination of per-stratum binary u.
    std::vector<unsigned> masks(po.num_strata(), 0);
    while (true) {
      std::vector<std::vector<int>> u;
      for (std::size_t i = 0; i < po.num_strata(); ++i) u.push_back(oracle::bits(masks[i], po.stratum(i).size()));
      const auto a = make_assignment(u, m.gamma());
      const double e =
          exact_expectation(po, a.rho, [&](const MatchedDesign& d) { return ktilde(summarize(d), 0.0, m); });
      CHECK(e <= 1e-12);
      std::size_t i = 0;
      while (i < masks.size() && ++masks[i] == (1U << po.stratum(i).size())) masks[i++] = 0;
      if (i == masks.size()) break;
    }
  }
}

TEST_CASE("dbar has zero expectation under constant effects at u = 1(delta >= tau0)") {
  std::mt19937_64 rng(51);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<PotentialStratum> strata(3);
    for (auto& s : strata) {
      for (std::size_t j = 0; j < static_cast<std::size_t>(2 + rep % 4); ++j) {
        s.r_control.push_back(z(rng));
        s.r_treated.push_back(s.r_control.back() + 1.5);
      }
    }
    const PotentialOutcomes po(strata);
    const GammaModel m(3.0);
    std::vector<std::vector<int>> u;
    for (std::size_t i = 0; i < po.num_strata(); ++i) {
      std::vector<int> row;
      for (double d : po.deltas(i)) row.push_back(d >= 1.5 ? 1 : 0);
      u.push_back(row);
    }
    const auto a = make_assignment(u, m.gamma());
    const double e = exact_expectation(po, a.rho, [&](const MatchedDesign& d) { return dbar(summarize(d), 1.5, m); });
    CHECK(std::abs(e) < 1e-12);
  }
}
