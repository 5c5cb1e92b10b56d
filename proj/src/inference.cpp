#include "senssolve/inference.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "senssolve/binaryip.hpp"
#include "senssolve/error.hpp"
#include "senssolve/parallel.hpp"
#include "senssolve/rng.hpp"
#include "senssolve/variance.hpp"
#include "senssolve/weakstats.hpp"

namespace senssolve {
namespace {

void check_strata(const MatchedDesign& design) {
  if (design.num_strata() < 2) throw Error(ErrorCode::kTooFewStrata, "studentized tests need B >= 2");
}

SensitivityResult studentized(Method method, const std::vector<double>& terms, const MatchedDesign& design,
                              double tau0, const GammaModel& model, double alpha) {
  SensitivityResult result;
  result.method = method;
  result.gamma = model.gamma();
  result.tau0 = tau0;
  result.alpha = alpha;
  for (double t : terms) result.statistic += t;
  result.expectation_bound = 0.0;
  const double se = se_q(terms, default_q(design));
  result.se = is_degenerate_se(se, terms) ? 0.0 : se;
  apply_normal_reference(result);
  return result;
}

}  // namespace

Alternative parse_alternative(std::string_view name) {
  if (name == "greater") return Alternative::kGreater;
  if (name == "less") return Alternative::kLess;
  throw Error(ErrorCode::kInvalidArgument, "alternative must be greater or less");
}

SensitivityResult test_dbar(const MatchedDesign& design, double tau0, const GammaModel& model, double alpha) {
  check_alpha(alpha);
  check_strata(design);
  const auto summaries = summarize(design);
  return studentized(Method::kDbar, dbar_terms(summaries, tau0, model), design, tau0, model, alpha);
}

SensitivityResult test_ktilde(const MatchedDesign& design, double tau0, const GammaModel& model, double alpha) {
  check_alpha(alpha);
  check_strata(design);
  const auto summaries = summarize(design);
  return studentized(Method::kKtilde, ktilde_terms(summaries, tau0, model), design, tau0, model, alpha);
}

SensitivityResult run_method(const MatchedDesign& design, Method method, double tau0, const GammaModel& model,
                             double alpha, Alternative alternative) {
  check_alpha(alpha);
  if (alternative == Alternative::kLess) {
    SensitivityResult flipped = run_method(design.negated(), method, -tau0, model, alpha, Alternative::kGreater);
    flipped.tau0 = tau0;
    return flipped;
  }
  switch (method) {
    case Method::kPermT: return perm_t_sensitivity(design, tau0, model, alpha);
    case Method::kDbar: return test_dbar(design, tau0, model, alpha);
    case Method::kKtilde: return test_ktilde(design, tau0, model, alpha);
    case Method::kBinaryIp: return test_binary(design, tau0, model, alpha);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown method");
}

ChangepointResult changepoint(const MatchedDesign& design, double tau0, Method method, double alpha,
                              double gamma_max, Alternative alternative) {
  check_alpha(alpha);
  if (!(gamma_max >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "gamma_max must be >= 1");
  auto p_at = [&](double gamma) {
    return run_method(design, method, tau0, GammaModel(gamma), alpha, alternative).p_value;
  };

  ChangepointResult out;
  constexpr int kGrid = 10;
  double previous = -1.0;
  for (int k = 0; k < kGrid; ++k) {
    const double gamma = 1.0 + (gamma_max - 1.0) * k / (kGrid - 1);
    const double p = p_at(gamma);
    if (p < previous - 1e-12) out.monotonicity_warning = true;
    previous = p;
  }

  if (p_at(1.0) >= alpha) {
    out.gamma = 1.0;
    out.not_significant_at_one = true;
    return out;
  }
  if (p_at(gamma_max) < alpha) {
    throw Error(ErrorCode::kNoCrossingBelowMax, "p stays below alpha up to gamma " + std::to_string(gamma_max));
  }
  double lo = 1.0;
  double hi = gamma_max;
  while (hi - lo > 1e-4) {
    const double mid = 0.5 * (lo + hi);
    if (p_at(mid) >= alpha) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  out.gamma = hi;
  return out;
}

double ReferenceDistribution::quantile(double level) const {
  if (sorted_.empty()) throw Error(ErrorCode::kInvalidArgument, "empty reference distribution");
  if (!(level > 0.0 && level <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "level must lie in (0, 1]");
  const double m = static_cast<double>(sorted_.size());
  // Smallest k with k / m >= level; the shrink guards against level * m
  // landing just above an integer.
  auto k = static_cast<std::size_t>(std::ceil(level * m * (1.0 - 1e-12)));
  k = std::clamp<std::size_t>(k, 1, sorted_.size());
  return sorted_[k - 1];
}

double ReferenceDistribution::cdf(double k) const {
  if (sorted_.empty()) return 0.0;
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), k);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

ReferenceDistribution randomization_reference(const MatchedDesign& design, double tau0, const GammaModel& model,
                                              std::size_t m_draws, std::uint64_t seed) {
  if (m_draws < 1000) throw Error(ErrorCode::kInvalidArgument, "m_draws must be at least 1000");
  check_strata(design);
  const std::size_t b = design.num_strata();
  const double total = static_cast<double>(design.num_units());
  const DesignMatrixQ q = default_q(design);

  // Penalized, weighted contribution of each unit if it were the treated one,
  // and its cumulative assignment probability.
  std::vector<std::vector<double>> contribution(b);
  std::vector<std::vector<double>> cumulative(b);
  for (std::size_t i = 0; i < b; ++i) {
    const Stratum& s = design.stratum(i);
    const std::vector<double> a = adjusted_deltas(s, tau0);
    std::vector<int> u(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) u[j] = a[j] >= 0.0 ? 1 : 0;
    const std::vector<double> rho = assignment_probabilities(u, model.gamma());
    const double w = static_cast<double>(s.size()) / total;
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      contribution[i].push_back(w * d_stat(a[j], model.gamma()));
      acc += rho[j];
      cumulative[i].push_back(acc);
    }
  }

  auto draw = [&](std::size_t m, double& value) {
    std::vector<double> terms(b);
    for (std::size_t i = 0; i < b; ++i) {
      const double x = stream_uniform(seed, static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(m)) *
                       cumulative[i].back();
      const auto it = std::upper_bound(cumulative[i].begin(), cumulative[i].end(), x);
      const auto j = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative[i].begin()), cumulative[i].size() - 1);
      terms[i] = contribution[i][j];
    }
    double stat = 0.0;
    for (double t : terms) stat += t;
    const double se = se_q(terms, q);
    if (is_degenerate_se(se, terms)) return false;
    value = stat / se;
    return true;
  };

  ReferenceDistribution out;
  out.seed = seed;
  const std::size_t max_discards = m_draws / 100;
  std::size_t next_index = 0;
  while (out.draws.size() < m_draws) {
    const std::size_t batch = m_draws - out.draws.size();
    std::vector<double> values(batch);
    std::vector<char> ok(batch, 0);
    parallel_for(batch, [&](std::size_t k) { ok[k] = draw(next_index + k, values[k]) ? 1 : 0; });
    for (std::size_t k = 0; k < batch; ++k) {
      if (ok[k]) {
        out.draws.push_back(values[k]);
      } else if (++out.discarded > max_discards) {
        throw Error(ErrorCode::kDegenerateSE, std::to_string(out.discarded) + " draws had a zero standard error");
      }
    }
    next_index += batch;
  }
  out.count = out.draws.size();
  out.sorted_ = out.draws;
  std::sort(out.sorted_.begin(), out.sorted_.end());
  return out;
}

SensitivityResult test_dbar_reference(const MatchedDesign& design, double tau0, const GammaModel& model,
                                      double alpha, const ReferenceDistribution& reference) {
  SensitivityResult result = test_dbar(design, tau0, model, alpha);
  const double critical = reference.quantile(1.0 - alpha);
  double at_or_above = 0.0;
  for (double v : reference.draws) at_or_above += v >= result.deviate ? 1.0 : 0.0;
  result.p_value = at_or_above / static_cast<double>(reference.count);
  result.reject = result.deviate >= critical;
  return result;
}

}  // namespace senssolve
