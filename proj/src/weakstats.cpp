#include "senssolve/weakstats.hpp"

#include <cmath>
#include <string>

#include "senssolve/error.hpp"
#include "senssolve/kernels.hpp"

namespace senssolve {

double d_stat(double x, double gamma_eff) {
  return (x * (x >= 0.0 ? 2.0 : 2.0 * gamma_eff)) / (1.0 + gamma_eff);
}

IntervalRestriction IntervalRestriction::rosenbaum(std::span<const std::size_t> sizes, const GammaModel& model) {
  IntervalRestriction out;
  out.sizes.assign(sizes.begin(), sizes.end());
  for (std::size_t n : sizes) {
    out.kappa.push_back(model.kappa_tilde(n));
    out.gamma_eff.push_back(model.gamma_n(n));
  }
  return out;
}

IntervalRestriction IntervalRestriction::concordant(std::span<const std::size_t> sizes, const GammaModel& model) {
  IntervalRestriction out;
  out.sizes.assign(sizes.begin(), sizes.end());
  for (std::size_t n : sizes) {
    out.kappa.push_back(static_cast<double>(n) * (1.0 + model.gamma()) / 2.0);
    out.gamma_eff.push_back(model.gamma());
  }
  return out;
}

void IntervalRestriction::validate() const {
  if (kappa.size() != sizes.size() || gamma_eff.size() != sizes.size()) {
    throw Error(ErrorCode::kInfeasibleRestriction, "kappa, gamma and sizes differ in length");
  }
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const double n = static_cast<double>(sizes[i]);
    // Relative slack absorbs round-off in the constructors above.
    const double slack = 1e-12 * n * gamma_eff[i];
    if (!(gamma_eff[i] >= 1.0) || kappa[i] < n - slack || kappa[i] > n * gamma_eff[i] + slack) {
      throw Error(ErrorCode::kInfeasibleRestriction,
                  "stratum " + std::to_string(i) + ": need n <= kappa <= n * gamma");
    }
  }
}

std::vector<std::size_t> stratum_sizes(const MatchedDesign& design) {
  std::vector<std::size_t> sizes;
  sizes.reserve(design.num_strata());
  for (const Stratum& s : design.strata()) sizes.push_back(s.size());
  return sizes;
}

double k_weighted_average(std::span<const StratumSummary> summaries, double tau0,
                          const IntervalRestriction& restriction) {
  restriction.validate();
  if (restriction.sizes.size() != summaries.size()) {
    throw Error(ErrorCode::kInfeasibleRestriction, "restriction does not match the design");
  }
  double total_units = 0.0;
  for (const StratumSummary& s : summaries) total_units += static_cast<double>(s.size);
  double acc = 0.0;
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    acc += restriction.kappa[i] * d_stat(summaries[i].tau_hat - tau0, restriction.gamma_eff[i]);
  }
  return acc / total_units;
}

std::vector<double> ktilde_terms(std::span<const StratumSummary> summaries, double tau0, const GammaModel& model) {
  double total_units = 0.0;
  for (const StratumSummary& s : summaries) total_units += static_cast<double>(s.size);
  std::vector<double> out(summaries.size());
  for (std::size_t i = 0; i < summaries.size(); ++i) {
    const std::size_t n = summaries[i].size;
    out[i] = model.kappa_tilde(n) / total_units * d_stat(summaries[i].tau_hat - tau0, model.gamma_n(n));
  }
  return out;
}

std::vector<double> dbar_terms(std::span<const StratumSummary> summaries, double tau0, const GammaModel& model) {
  std::vector<double> shifted(summaries.size());
  for (std::size_t i = 0; i < summaries.size(); ++i) shifted[i] = summaries[i].tau_hat - tau0;
  std::vector<double> out(summaries.size());
  kernels::penalize(shifted, model.gamma(), out);
  for (std::size_t i = 0; i < summaries.size(); ++i) out[i] *= summaries[i].weight;
  return out;
}

double ktilde(std::span<const StratumSummary> summaries, double tau0, const GammaModel& model) {
  return kernels::sum(ktilde_terms(summaries, tau0, model));
}

double dbar(std::span<const StratumSummary> summaries, double tau0, const GammaModel& model) {
  return kernels::sum(dbar_terms(summaries, tau0, model));
}

double ipw_equivalent(double tau_hat_minus_tau0, std::size_t n, double kappa, double gamma_eff) {
  IntervalRestriction single{{kappa}, {gamma_eff}, {n}};
  single.validate();
  const double p = tau_hat_minus_tau0 >= 0.0 ? gamma_eff / kappa : 1.0 / kappa;
  return tau_hat_minus_tau0 / (static_cast<double>(n) * p);
}

double ipw_equivalent(double tau_hat_minus_tau0, const IntervalRestriction& restriction, std::size_t stratum) {
  return ipw_equivalent(tau_hat_minus_tau0, restriction.sizes.at(stratum), restriction.kappa.at(stratum),
                        restriction.gamma_eff.at(stratum));
}

ProbabilityMap worst_case_probability_map(std::span<const double> deltas, double tau0, const GammaModel& model) {
  const std::size_t n = deltas.size();
  ProbabilityMap out;
  out.weights.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    out.weights[j] = deltas[j] - tau0 >= 0.0 ? model.rho_max(n) : model.rho_min(n);
    out.sum += out.weights[j];
  }
  return out;
}

}  // namespace senssolve
