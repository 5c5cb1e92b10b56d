#include "senssolve/separable.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "senssolve/error.hpp"
#include "senssolve/normal.hpp"

namespace senssolve {
namespace {

constexpr double kTieTolerance = 1e-12;

// Optimum over sorted candidates; `sorted` must be ascending.
StratumWorstCase optimize_sorted(std::span<const double> sorted, double gamma) {
  const std::size_t n = sorted.size();
  double scale = 0.0;
  for (double v : sorted) scale = std::max(scale, std::abs(v));
  const double mean_tol = kTieTolerance * scale;
  const double var_tol = kTieTolerance * scale * scale;

  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) prefix[j + 1] = prefix[j] + sorted[j];
  const double total = prefix[n];

  std::vector<double> means(n, 0.0);
  double best_mean = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 1; a < n; ++a) {
    const double low = prefix[a];
    const double high = total - low;
    means[a] = (low + gamma * high) / (static_cast<double>(a) + gamma * static_cast<double>(n - a));
    best_mean = std::max(best_mean, means[a]);
  }

  StratumWorstCase best;
  double best_var = -1.0;
  std::size_t best_a = 0;
  for (std::size_t a = 1; a < n; ++a) {
    if (means[a] < best_mean - mean_tol) continue;
    const double weight_sum = static_cast<double>(a) + gamma * static_cast<double>(n - a);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = sorted[j] - means[a];
      var += (j < a ? 1.0 : gamma) * d * d;
    }
    var /= weight_sum;
    if (best_a == 0 || var > best_var + var_tol) {
      best_a = a;
      best_var = var;
    }
  }
  best.mu = means[best_a];
  best.nu = std::max(best_var, 0.0);
  best.ones_count = n - best_a;
  return best;
}

void check_length(std::size_t n) {
  if (n < 2) throw Error(ErrorCode::kLengthTooSmall, "need at least 2 values, got " + std::to_string(n));
}

}  // namespace

GammaModel::GammaModel(double gamma) : gamma_(gamma) {
  if (!(gamma >= 1.0) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::kInvalidArgument, "gamma must be a finite value >= 1");
  }
}

double GammaModel::log_gamma() const { return std::log(gamma_); }

double GammaModel::gamma_n(std::size_t n) const {
  const double m = static_cast<double>(n) - 1.0;
  return gamma_ * (gamma_ * m + 1.0) / (m + gamma_);
}

double GammaModel::kappa_tilde(std::size_t n) const { return gamma_ * (static_cast<double>(n) - 1.0) + 1.0; }

double GammaModel::rho_min(std::size_t n) const { return 1.0 / kappa_tilde(n); }

double GammaModel::rho_max(std::size_t n) const { return gamma_ / (static_cast<double>(n) - 1.0 + gamma_); }

StratumWorstCase worst_case_moments(std::span<const double> q, const GammaModel& model) {
  check_length(q.size());
  std::vector<double> sorted(q.begin(), q.end());
  std::sort(sorted.begin(), sorted.end());
  return optimize_sorted(sorted, model.gamma());
}

StratumWorstCase worst_case_pattern(std::span<const double> q, const GammaModel& model, std::vector<int>& u) {
  check_length(q.size());
  const std::size_t n = q.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return q[a] < q[b]; });
  std::vector<double> sorted(n);
  for (std::size_t k = 0; k < n; ++k) sorted[k] = q[order[k]];
  const StratumWorstCase best = optimize_sorted(sorted, model.gamma());
  u.assign(n, 0);
  for (std::size_t k = n - best.ones_count; k < n; ++k) u[order[k]] = 1;
  return best;
}

double separable_pvalue(double statistic, const std::vector<std::vector<double>>& per_stratum_q,
                        const GammaModel& model) {
  double mu = 0.0;
  double nu = 0.0;
  for (const auto& q : per_stratum_q) {
    const StratumWorstCase wc = worst_case_moments(q, model);
    mu += wc.mu;
    nu += wc.nu;
  }
  if (!(nu > 0.0)) throw Error(ErrorCode::kDegenerateVariance, "sum of worst-case variances is zero");
  return normal_sf((statistic - mu) / std::sqrt(nu));
}

SensitivityResult perm_t_sensitivity(const MatchedDesign& design, double tau0, const GammaModel& model,
                                     double alpha) {
  const double total = static_cast<double>(design.num_units());
  double statistic = 0.0;
  double mu = 0.0;
  double nu = 0.0;
  std::vector<double> q;
  for (const Stratum& s : design.strata()) {
    const double w = static_cast<double>(s.size()) / total;
    q = adjusted_deltas(s, tau0);
    statistic += w * q[s.treated_index];
    for (double& v : q) v *= w;
    const StratumWorstCase wc = worst_case_moments(q, model);
    mu += wc.mu;
    nu += wc.nu;
  }

  SensitivityResult result;
  result.method = Method::kPermT;
  result.gamma = model.gamma();
  result.tau0 = tau0;
  result.statistic = statistic;
  result.expectation_bound = mu;
  result.se = std::sqrt(nu);
  result.alpha = alpha;
  apply_normal_reference(result);
  return result;
}

double perm_t_offset(std::span<const double> outcomes, std::size_t treated, double weight, double tau0,
                     const GammaModel& model) {
  std::vector<double> q = adjusted_deltas(outcomes, treated, tau0);
  for (double& v : q) v *= weight;
  return worst_case_moments(q, model).mu;
}

void validate_probability_rows(const PotentialOutcomes& potential, const std::vector<std::vector<double>>& rho) {
  if (rho.size() != potential.num_strata()) {
    throw Error(ErrorCode::kProbabilityRowInvalid, "expected one row per stratum");
  }
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho[i].size() != potential.stratum(i).size()) {
      throw Error(ErrorCode::kProbabilityRowInvalid, "row " + std::to_string(i) + " has the wrong length");
    }
    double total = 0.0;
    for (double p : rho[i]) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw Error(ErrorCode::kProbabilityRowInvalid, "row " + std::to_string(i) + " has an entry outside [0,1]");
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw Error(ErrorCode::kProbabilityRowInvalid, "row " + std::to_string(i) + " does not sum to 1");
    }
  }
}

PermTBias perm_t_bias_bound(const PotentialOutcomes& potential, const std::vector<std::vector<double>>& rho,
                            double tau0, const GammaModel& model) {
  validate_probability_rows(potential, rho);
  const double total = static_cast<double>(potential.num_units());
  PermTBias out;
  for (std::size_t i = 0; i < potential.num_strata(); ++i) {
    const PotentialStratum& s = potential.stratum(i);
    const double n = static_cast<double>(s.size());
    const double w = n / total;
    const std::vector<double> tau = potential.effects(i);
    const std::vector<double> delta = potential.deltas(i);

    double inner = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) inner += rho[i][j] * (1.0 - rho[i][j]) * (tau[j] - tau0);
    out.bound += n * n / (total * (n - 1.0)) * inner;

    for (std::size_t k = 0; k < s.size(); ++k) {
      const Stratum observed = potential.observe(i, k);
      const double offset = perm_t_offset(observed.outcomes, k, w, tau0, model);
      out.exact_expectation += rho[i][k] * (w * (delta[k] - tau0) - offset);
    }
  }
  return out;
}

}  // namespace senssolve
