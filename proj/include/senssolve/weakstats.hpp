#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "senssolve/design.hpp"
#include "senssolve/separable.hpp"

namespace senssolve {

// x - ((g - 1)/(1 + g)) |x|, evaluated as 2x/(1+g) for x >= 0 and
// 2gx/(1+g) otherwise.
double d_stat(double x, double gamma_eff);

// Per-stratum box kappa_i^-1 <= rho_ij <= gamma_i kappa_i^-1.
struct IntervalRestriction {
  std::vector<double> kappa;
  std::vector<double> gamma_eff;
  std::vector<std::size_t> sizes;

  // kappa~ = G(n-1)+1 with gamma_eff = Gamma_n; implied by Rosenbaum's model.
  static IntervalRestriction rosenbaum(std::span<const std::size_t> sizes, const GammaModel& model);
  // kappa = n(1+G)/2 with gamma_eff = G; the restriction behind dbar.
  static IntervalRestriction concordant(std::span<const std::size_t> sizes, const GammaModel& model);

  // Throws InfeasibleRestriction unless n_i <= kappa_i <= n_i gamma_i.
  void validate() const;
};

std::vector<std::size_t> stratum_sizes(const MatchedDesign& design);

// N^-1 sum kappa_i d_stat(tau_hat_i - tau0, gamma_i)
double k_weighted_average(std::span<const StratumSummary> summaries, double tau0,
                          const IntervalRestriction& restriction);

// Per-stratum terms whose sum is ktilde: (kappa~_i / N) d_stat(., Gamma_ni).
std::vector<double> ktilde_terms(std::span<const StratumSummary> summaries, double tau0, const GammaModel& model);
// Per-stratum terms whose sum is dbar: (n_i / N) d_stat(., G).
std::vector<double> dbar_terms(std::span<const StratumSummary> summaries, double tau0, const GammaModel& model);

double ktilde(std::span<const StratumSummary> summaries, double tau0, const GammaModel& model);
double dbar(std::span<const StratumSummary> summaries, double tau0, const GammaModel& model);

// min over p in [1/kappa, gamma/kappa] of x / (n p).
double ipw_equivalent(double tau_hat_minus_tau0, std::size_t n, double kappa, double gamma_eff);
double ipw_equivalent(double tau_hat_minus_tau0, const IntervalRestriction& restriction, std::size_t stratum);

struct ProbabilityMap {
  std::vector<double> weights;
  double sum = 0.0;
};

// Worst-case "probabilities" used by the inverse-probability form of ktilde:
// G/(n-1+G) for positive delta - tau0, 1/(G(n-1)+1) for negative; zero maps
// to the upper value.
ProbabilityMap worst_case_probability_map(std::span<const double> deltas, double tau0, const GammaModel& model);

}  // namespace senssolve
