#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "senssolve/design.hpp"
#include "senssolve/potential.hpp"
#include "senssolve/result.hpp"

namespace senssolve {

// Sensitivity parameter: within a stratum, treatment odds of two units
// differ by at most gamma.
class GammaModel {
 public:
  explicit GammaModel(double gamma);

  double gamma() const { return gamma_; }
  double log_gamma() const;

  // Gamma_n = G (G (n-1) + 1) / ((n-1) + G), the parameter seen by the
  // interval restriction that Rosenbaum's model implies for a set of size n.
  double gamma_n(std::size_t n) const;
  // kappa~_n = G (n-1) + 1
  double kappa_tilde(std::size_t n) const;
  double rho_min(std::size_t n) const;  // 1 / (G (n-1) + 1)
  double rho_max(std::size_t n) const;  // G / ((n-1) + G)

 private:
  double gamma_;
};

struct StratumWorstCase {
  double mu = 0.0;
  double nu = 0.0;
  // Units given u = 1 in the attaining pattern (the largest ones_count q's).
  std::size_t ones_count = 0;
};

// Maximizes the expectation of q over the sorted binary patterns
// (zeros on the a smallest values, a = 1..n-1), breaking ties by the
// larger variance and then the smaller a.
StratumWorstCase worst_case_moments(std::span<const double> q, const GammaModel& model);

// Same optimum, plus the attaining u in the original unit order.
StratumWorstCase worst_case_pattern(std::span<const double> q, const GammaModel& model, std::vector<int>& u);

// 1 - Phi((statistic - sum mu) / sqrt(sum nu)). Throws DegenerateVariance
// when sum nu is zero.
double separable_pvalue(double statistic, const std::vector<std::vector<double>>& per_stratum_q,
                        const GammaModel& model);

// Permutational t: statistic tau_hat - tau0 against the separable worst case
// of q_ij = (n_i/N)(delta_ij - tau0) under constant effects. A degenerate
// variance yields p = 1 when the statistic does not exceed sum mu, else 0.
SensitivityResult perm_t_sensitivity(const MatchedDesign& design, double tau0, const GammaModel& model,
                                     double alpha = 0.05);

// Worst-case expectation of the stratum's q values when unit `treated` is
// treated, imputing the others under the sharp null.
double perm_t_offset(std::span<const double> outcomes, std::size_t treated, double weight, double tau0,
                     const GammaModel& model);

struct PermTBias {
  // sum_i n_i^2 / (N (n_i - 1)) sum_j rho_ij (1 - rho_ij) (tau_ij - tau0)
  double bound = 0.0;
  // Exact E(tau_hat - tau0 - sum_i mu_i) under rho.
  double exact_expectation = 0.0;
};

PermTBias perm_t_bias_bound(const PotentialOutcomes& potential, const std::vector<std::vector<double>>& rho,
                            double tau0, const GammaModel& model);

// Throws ProbabilityRowInvalid unless each row matches its stratum size,
// has entries in [0, 1] and sums to 1 within 1e-9.
void validate_probability_rows(const PotentialOutcomes& potential, const std::vector<std::vector<double>>& rho);

}  // namespace senssolve
