#include "senssolve/binaryip.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>

#include "senssolve/error.hpp"
#include "senssolve/variance.hpp"
#include "senssolve/weakstats.hpp"

namespace senssolve {
namespace {

void require_binary(const MatchedDesign& design) {
  if (!design.is_binary()) throw Error(ErrorCode::kNonBinaryOutcome, "binary_ip needs outcomes in {0, 1}");
}

}  // namespace

std::vector<ObservedTableGroup> group_tables(const MatchedDesign& design) {
  require_binary(design);
  std::vector<ObservedTableGroup> groups;
  std::map<std::tuple<std::size_t, int, std::size_t>, std::size_t> index;
  for (const Stratum& s : design.strata()) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j != s.treated_index && s.outcomes[j] == 1.0) ++ones;
    }
    const int treated = s.treated_outcome() == 1.0 ? 1 : 0;
    const auto key = std::make_tuple(s.size(), treated, ones);
    auto [it, inserted] = index.try_emplace(key, groups.size());
    if (inserted) groups.push_back(ObservedTableGroup{s.size(), treated, ones, 0});
    ++groups[it->second].multiplicity;
  }
  return groups;
}

std::vector<CompletionCandidate> enumerate_completions(const ObservedTableGroup& group, double tau0,
                                                       const GammaModel& model, double weight) {
  if (group.n < 2 || group.control_ones > group.n - 1) {
    throw Error(ErrorCode::kInvalidArgument, "inconsistent observed table");
  }
  const std::size_t c1 = group.control_ones;
  const std::size_t c0 = group.n - 1 - c1;
  std::vector<CompletionCandidate> out;
  out.reserve(2 * (c1 + 1) * (c0 + 1));

  std::vector<double> r_t(group.n), r_c(group.n), q(group.n);
  for (int x = 0; x <= 1; ++x) {
    for (std::size_t k1 = 0; k1 <= c1; ++k1) {
      for (std::size_t k0 = 0; k0 <= c0; ++k0) {
        // Unit 0 is treated, then controls with r_C = 1, then r_C = 0.
        r_t[0] = group.treated_outcome;
        r_c[0] = x;
        for (std::size_t j = 0; j < c1; ++j) {
          r_c[1 + j] = 1.0;
          r_t[1 + j] = j < k1 ? 1.0 : 0.0;
        }
        for (std::size_t j = 0; j < c0; ++j) {
          r_c[1 + c1 + j] = 0.0;
          r_t[1 + c1 + j] = j < k0 ? 1.0 : 0.0;
        }

        CompletionCandidate c;
        c.treated_control_outcome = x;
        c.ones_among_control_ones = k1;
        c.ones_among_control_zeros = k0;
        double control_total = 0.0;
        for (std::size_t j = 0; j < group.n; ++j) {
          control_total += r_c[j];
          ++c.table[2 * static_cast<int>(r_t[j]) + static_cast<int>(r_c[j])];
          c.effect_sum += static_cast<int>(r_t[j]) - static_cast<int>(r_c[j]);
        }
        const double others = static_cast<double>(group.n) - 1.0;
        for (std::size_t j = 0; j < group.n; ++j) {
          const double delta = r_t[j] - (control_total - r_c[j]) / others;
          q[j] = weight * d_stat(delta - tau0, model.gamma());
        }
        c.worst_case_mu = worst_case_moments(q, model).mu;
        out.push_back(c);
      }
    }
  }
  return out;
}

double ip_bound(const MatchedDesign& design, double tau0, const GammaModel& model) {
  const std::vector<ObservedTableGroup> groups = group_tables(design);
  const auto total_units = static_cast<long>(design.num_units());
  const double scaled = static_cast<double>(total_units) * tau0;
  const double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) > 1e-9) {
    throw Error(ErrorCode::kNonIntegerTarget, "N * tau0 = " + std::to_string(scaled) + " is not an integer");
  }
  const auto target = static_cast<long>(rounded);
  if (target < -total_units || target > total_units) {
    throw Error(ErrorCode::kInfeasibleTau0, "target effect total outside [-N, N]");
  }

  // best[s + offset] = largest total mu over strata processed so far with
  // effect total s. Reachable totals form a contiguous window [lo, hi].
  constexpr double kUnreached = -std::numeric_limits<double>::infinity();
  const long offset = total_units;
  std::vector<double> best(static_cast<std::size_t>(2 * total_units + 1), kUnreached);
  std::vector<double> next(best.size(), kUnreached);
  best[static_cast<std::size_t>(offset)] = 0.0;
  long lo = 0, hi = 0;

  for (const ObservedTableGroup& group : groups) {
    const double weight = static_cast<double>(group.n) / static_cast<double>(total_units);
    const std::vector<CompletionCandidate> candidates = enumerate_completions(group, tau0, model, weight);
    // Keep only the best mu per effect total within the group.
    std::map<int, double> per_effect;
    for (const CompletionCandidate& c : candidates) {
      auto [it, inserted] = per_effect.try_emplace(c.effect_sum, c.worst_case_mu);
      if (!inserted) it->second = std::max(it->second, c.worst_case_mu);
    }
    const long step_lo = per_effect.begin()->first;
    const long step_hi = per_effect.rbegin()->first;

    for (std::size_t copy = 0; copy < group.multiplicity; ++copy) {
      const long new_lo = lo + step_lo;
      const long new_hi = hi + step_hi;
      std::fill(next.begin() + (new_lo + offset), next.begin() + (new_hi + offset + 1), kUnreached);
      for (long s = lo; s <= hi; ++s) {
        const double base = best[static_cast<std::size_t>(s + offset)];
        if (base == kUnreached) continue;
        for (const auto& [effect, mu] : per_effect) {
          double& slot = next[static_cast<std::size_t>(s + effect + offset)];
          slot = std::max(slot, base + mu);
        }
      }
      std::swap(best, next);
      std::fill(next.begin() + (lo + offset), next.begin() + (hi + offset + 1), kUnreached);
      lo = new_lo;
      hi = new_hi;
    }
  }

  if (target < lo || target > hi || best[static_cast<std::size_t>(target + offset)] == kUnreached) {
    throw Error(ErrorCode::kInfeasibleTau0, "no completion has effects summing to " + std::to_string(target));
  }
  return best[static_cast<std::size_t>(target + offset)];
}

SensitivityResult test_binary(const MatchedDesign& design, double tau0, const GammaModel& model, double alpha) {
  check_alpha(alpha);
  require_binary(design);
  if (design.num_strata() < 2) throw Error(ErrorCode::kTooFewStrata, "studentized tests need B >= 2");
  const auto summaries = summarize(design);
  const std::vector<double> terms = dbar_terms(summaries, tau0, model);

  SensitivityResult result;
  result.method = Method::kBinaryIp;
  result.gamma = model.gamma();
  result.tau0 = tau0;
  result.alpha = alpha;
  for (double t : terms) result.statistic += t;
  result.expectation_bound = ip_bound(design, tau0, model);
  const double se = se_q(terms, default_q(design));
  result.se = is_degenerate_se(se, terms) ? 0.0 : se;
  apply_normal_reference(result);
  return result;
}

}  // namespace senssolve
