#include <cmath>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "senssolve/binaryip.hpp"
#include "senssolve/error.hpp"
#include "senssolve/weakstats.hpp"

using namespace senssolve;

namespace {

// All unit-level completions of one stratum: pairs (r_T, r_C) per unit.
std::vector<std::pair<std::vector<double>, std::vector<double>>> completions(const Stratum& s) {
  std::vector<std::pair<std::vector<double>, std::vector<double>>> out;
  const std::size_t n = s.size();
  for (unsigned mask = 0; mask < (1U << n); ++mask) {
    // Bit j fills the missing outcome of unit j.
    std::vector<double> rt(n), rc(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double missing = (mask >> j) & 1U;
      if (j == s.treated_index) {
        rt[j] = s.outcomes[j];
        rc[j] = missing;
      } else {
        rc[j] = s.outcomes[j];
        rt[j] = missing;
      }
    }
    out.emplace_back(rt, rc);
  }
  return out;
}

struct Option {
  int effect = 0;
  double mu = 0.0;
};

// Best brute-force total over completions with effects summing to target;
// nullopt when none exists.
std::optional<double> brute_ip(const MatchedDesign& d, long target, double tau0, const GammaModel& m) {
  const double total_units = static_cast<double>(d.num_units());
  std::vector<std::vector<Option>> per;
  for (const Stratum& s : d.strata()) {
    std::vector<Option> opts;
    const double w = s.size() / total_units;
    for (const auto& [rt, rc] : completions(s)) {
      Option o;
      double control_total = 0.0;
      for (std::size_t j = 0; j < s.size(); ++j) {
        control_total += rc[j];
        o.effect += static_cast<int>(rt[j] - rc[j]);
      }
      std::vector<double> q(s.size());
      for (std::size_t j = 0; j < s.size(); ++j) {
        const double delta = rt[j] - (control_total - rc[j]) / (s.size() - 1.0);
        q[j] = w * oracle::d_stat(delta - tau0, m.gamma());
      }
      double best = -INFINITY;
      for (unsigned mask = 0; mask < (1U << s.size()); ++mask) {
        best = std::max(best, oracle::moments_for(q, oracle::bits(mask, s.size()), m.gamma()).mu);
      }
      o.mu = best;
      opts.push_back(o);
    }
    per.push_back(opts);
  }
  std::optional<double> best;
  std::vector<std::size_t> idx(per.size(), 0);
  while (true) {
    long effect = 0;
    double mu = 0.0;
    for (std::size_t i = 0; i < per.size(); ++i) {
      effect += per[i][idx[i]].effect;
      mu += per[i][idx[i]].mu;
    }
    if (effect == target && (!best || mu > *best)) best = mu;
    std::size_t i = 0;
    while (i < per.size() && ++idx[i] == per[i].size()) idx[i++] = 0;
    if (i == per.size()) break;
  }
  return best;
}

}  // namespace

TEST_CASE("pair accounting: four observed tables with four completions each") {
  std::vector<Stratum> strata;
  int k = 0;
  for (double t : {0.0, 1.0}) {
    for (double c : {0.0, 1.0}) strata.push_back({"p" + std::to_string(k++), {t, c}, 0});
  }
  const MatchedDesign d(strata);
  const auto groups = group_tables(d);
  CHECK(groups.size() == 4);
  std::size_t total = 0;
  for (const auto& g : groups) {
    const auto c = enumerate_completions(g, 0.0, GammaModel(2.0), 0.5);
    CHECK(c.size() == 4);
    total += c.size();
  }
  CHECK(total == 16);
  // Treated 1, control 0: effect sums {2, 1, 1, 0}.
  const auto c = enumerate_completions({2, 1, 0, 1}, 0.0, GammaModel(2.0), 0.5);
  std::multiset<int> effects;
  for (const auto& x : c) effects.insert(x.effect_sum);
  CHECK(effects == std::multiset<int>{0, 1, 1, 2});
}

TEST_CASE("completion counts and gamma-1 means") {
  const ObservedTableGroup g{5, 1, 2, 3};
  const auto c = enumerate_completions(g, 0.1, GammaModel(1.0), 0.25);
  CHECK(c.size() == 2 * 3 * 3);
  for (const auto& x : c) {
    CHECK(x.table[0] + x.table[1] + x.table[2] + x.table[3] == 5);
    CHECK(std::abs(x.effect_sum) <= 5);
    // Leave-one-out deltas average to the mean effect, and d_stat is the identity at gamma 1.
    CHECK(x.worst_case_mu == doctest::Approx(0.25 * (x.effect_sum / 5.0 - 0.1)).epsilon(1e-12));
  }
  const auto all_ones = enumerate_completions({3, 1, 2, 1}, 0.0, GammaModel(4.0), 1.0);
  bool found = false;
  for (const auto& x : all_ones) {
    if (x.treated_control_outcome == 1 && x.ones_among_control_ones == 2) {
      found = true;
      CHECK(x.worst_case_mu == doctest::Approx(0.0));
    }
  }
  CHECK(found);
}

TEST_CASE("ip_bound equals the exhaustive optimum on small designs") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> g(1.0, 6.0);
  int compared = 0;
  for (int rep = 0; rep < 200; ++rep) {
    const MatchedDesign d = oracle::random_design(rng, 1 + rep % 3, 3, 0.5, true);
    const long n = static_cast<long>(d.num_units());
    const long target = std::uniform_int_distribution<long>(-n / 2, n / 2)(rng);
    const double tau0 = static_cast<double>(target) / static_cast<double>(n);
    const GammaModel m(g(rng));
    const auto ref = brute_ip(d, target, tau0, m);
    if (ref) {
      CHECK(ip_bound(d, tau0, m) == doctest::Approx(*ref).epsilon(1e-10));
      ++compared;
    } else {
      CHECK_THROWS_AS(ip_bound(d, tau0, m), Error);
    }
  }
  CHECK(compared > 150);
}

TEST_CASE("ip_bound properties") {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 30; ++rep) {
    const MatchedDesign d = oracle::random_design(rng, 40, 5, 0.3, true);
    CHECK(std::abs(ip_bound(d, 0.0, GammaModel(1.0))) < 1e-12);
    for (double g : {1.0, 1.5, 2.0, 3.0, 5.0}) CHECK(ip_bound(d, 0.0, GammaModel(g)) >= -1e-12);
  }
  std::mt19937_64 r2(6);
  const MatchedDesign d = oracle::random_design(r2, 10, 3, 0.3, true);
  CHECK_THROWS_AS(ip_bound(d, 0.5 / d.num_units(), GammaModel(2.0)), Error);
  CHECK_THROWS_AS(ip_bound(d, 2.0, GammaModel(2.0)), Error);
  const MatchedDesign continuous = oracle::random_design(r2, 10, 3, 0.3, false);
  try {
    ip_bound(continuous, 0.0, GammaModel(2.0));
    FAIL("expected NonBinaryOutcome");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNonBinaryOutcome);
  }
}

TEST_CASE("ip_bound need not grow with gamma") {
  // The statistic itself is penalized more heavily as gamma grows, so its
  // worst-case expectation over the weak null can fall. Confirmed by the
  // exhaustive oracle.
  const MatchedDesign d(std::vector<Stratum>{{"a", {1, 1, 1}, 0}, {"b", {1, 0, 1}, 0}, {"c", {0, 0, 0}, 2}});
  const double at5 = ip_bound(d, 0.0, GammaModel(5.0));
  const double at8 = ip_bound(d, 0.0, GammaModel(8.0));
  CHECK(at5 == doctest::Approx(*brute_ip(d, 0, 0.0, GammaModel(5.0))).epsilon(1e-12));
  CHECK(at8 == doctest::Approx(*brute_ip(d, 0, 0.0, GammaModel(8.0))).epsilon(1e-12));
  CHECK(at8 < at5);
}

TEST_CASE("ip_bound dominates sampled feasible completions") {
  std::mt19937_64 rng(15);
  const MatchedDesign d = oracle::random_design(rng, 30, 4, 0.4, true);
  const GammaModel m(3.0);
  const double bound = ip_bound(d, 0.0, m);
  const double total_units = static_cast<double>(d.num_units());
  int feasible = 0;
  for (int k = 0; k < 20000 && feasible < 1000; ++k) {
    double mu = 0.0;
    int effect = 0;
    for (const Stratum& s : d.strata()) {
      const auto all = completions(s);
      const auto& [rt, rc] = all[std::uniform_int_distribution<std::size_t>(0, all.size() - 1)(rng)];
      double control_total = 0.0;
      for (std::size_t j = 0; j < s.size(); ++j) {
        control_total += rc[j];
        effect += static_cast<int>(rt[j] - rc[j]);
      }
      std::vector<double> q(s.size());
      for (std::size_t j = 0; j < s.size(); ++j) {
        const double delta = rt[j] - (control_total - rc[j]) / (s.size() - 1.0);
        q[j] = s.size() / total_units * oracle::d_stat(delta, 3.0);
      }
      mu += oracle::moments_for(q, oracle::bits(std::uniform_int_distribution<unsigned>(0, (1U << s.size()) - 1)(rng), s.size()), 3.0).mu;
    }
    if (effect != 0) continue;
    ++feasible;
    CHECK(mu <= bound + 1e-12);
  }
  CHECK(feasible > 0);
}

TEST_CASE("test_binary") {
  // Zero bound and zero statistic give p = 1/2 when se > 0.
  std::vector<Stratum> strata{{"a", {1, 0}, 0}, {"b", {0, 1}, 0}, {"c", {1, 1}, 0}, {"d", {0, 0}, 0}};
  const MatchedDesign d(strata);
  const auto r = test_binary(d, 0.0, GammaModel(1.0));
  CHECK(std::abs(r.statistic) < 1e-15);
  CHECK(std::abs(r.expectation_bound) < 1e-15);
  CHECK(r.p_value == doctest::Approx(0.5));
  CHECK(r.method == Method::kBinaryIp);
}
