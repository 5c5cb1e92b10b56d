#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "senssolve/potential.hpp"
#include "senssolve/result.hpp"
#include "senssolve/rng.hpp"
#include "senssolve/separable.hpp"

namespace senssolve {

// A generative model for simulated matched studies. Rows a..k draw
// r_C = eps_C and r_T = r_C + beta + eps_T with set sizes 2 + Poisson(2);
// binary-a..binary-k threshold both at zero; appendixA uses five-unit sets
// with r_C ~ Exp(mean 15) and r_T = r_C + Exp(mean 30).
struct Scenario {
  std::string label;
  char row = 'a';
  bool binary = false;
  bool appendix_a = false;
  std::size_t strata = 500;
  std::size_t fixed_size = 0;  // 0 selects 2 + Poisson(2), truncated at 30
  double gamma = 5.0;
  double alpha = 0.1;
  std::size_t replicates = 1000;
  std::uint64_t seed = 1;
};

// Throws UnknownScenario.
Scenario make_scenario(std::string_view label);
std::vector<std::string> scenario_labels();

PotentialOutcomes generate(const Scenario& scenario, std::size_t replicate);

// Which statistic the adversarial confounder targets.
enum class ConfounderTarget { kKtilde, kDbar, kPermT, kTauHat };

// Per stratum, the sorted binary pattern maximizing the exact expectation of
// the target statistic's contribution given the true potential outcomes.
ConfounderAssignment worst_case_confounder(const PotentialOutcomes& potential, ConfounderTarget target,
                                           double tau0, const GammaModel& model);

// One treated index per stratum drawn from the rows of rho.
std::vector<std::size_t> draw_assignment(const std::vector<std::vector<double>>& rho, PhiloxEngine& engine);

// Right-hand side of the dbar bias bound under rho: the expectation of the
// centred terms at each stratum's own average effect plus the first-order
// term in (tau_bar_i - tau0).
double dbar_bias_bound(const PotentialOutcomes& potential, const std::vector<std::vector<double>>& rho,
                       double tau0, const GammaModel& model);

// Exact expectation of dbar under rho.
double dbar_expectation(const PotentialOutcomes& potential, const std::vector<std::vector<double>>& rho,
                        double tau0, const GammaModel& model);

struct StudyRow {
  Method method = Method::kDbar;
  double size = 0.0;
  // mean(statistic - its assumed worst-case expectation) / sd across replicates
  double bias = 0.0;
  // mean of the analytic bound / the same sd; for binary_ip, mean solve time
  double bound = 0.0;
  bool bound_is_seconds = false;
  double mean_deviate = 0.0;
  double sd_deviate = 0.0;
  std::size_t rejections = 0;
};

struct StudyResult {
  Scenario scenario;
  std::vector<StudyRow> rows;
};

// Statistics default to the scenario's table: ktilde, dbar, perm_t for
// continuous rows; ktilde, dbar, binary_ip for binary rows; perm_t for
// appendixA. M >= 100.
StudyResult run_size_study(const Scenario& scenario, std::vector<Method> methods = {});
std::vector<Method> default_methods(const Scenario& scenario);

struct DiagnosticRecord {
  double cov_true = 0.0;         // cov{P_u(tau_hat_i >= tau_bar_i), n_i (tau_bar_i - tau0)}
  double cov_star = 0.0;         // same at the worst-case confounder
  double cov_double_star = 0.0;  // cov{n_i / sum(1(delta < tau_bar) + G 1(delta >= tau_bar)), n_i (tau_bar_i - tau0)}
};

DiagnosticRecord diagnostics(const PotentialOutcomes& potential, const ConfounderAssignment& u_true,
                             const ConfounderAssignment& u_star, double tau0, const GammaModel& model);

// Sample covariance over units between the stratum means of delta and the
// deviations from them; zero up to round-off.
double fitted_residual_covariance(const PotentialOutcomes& potential);

// Three sets of three units where the constant-effects worst case
// understates the expectation of the difference in means: returns the sum
// over sets of E(tau_hat_i - mu_i) under the adversarial confounder.
double theorem1_fixture(double gamma, double c);
PotentialOutcomes theorem1_potential(double c);
std::vector<std::vector<int>> theorem1_confounder();

// Limiting variances of sqrt(B) tau_hat with equal set size n: the true one
// and the one implied by a constant-effects permutation distribution.
double limiting_variance_true(double sigma2_control, double sigma2_treated, double sigma2_effect, std::size_t n);
double limiting_variance_permutation(double sigma2_control, double sigma2_treated, std::size_t n);

}  // namespace senssolve
