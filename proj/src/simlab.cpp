#include "senssolve/simlab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "senssolve/binaryip.hpp"
#include "senssolve/error.hpp"
#include "senssolve/inference.hpp"
#include "senssolve/parallel.hpp"
#include "senssolve/weakstats.hpp"

namespace senssolve {
namespace {

constexpr std::size_t kMaxSetSize = 30;

// Exponential with the given rate, minus its mean.
double centered_exponential(PhiloxEngine& engine, double rate) {
  std::exponential_distribution<double> exp(rate);
  return exp(engine) - 1.0 / rate;
}

double normal(PhiloxEngine& engine, double sd) {
  std::normal_distribution<double> dist(0.0, sd);
  return dist(engine);
}

struct RowDraw {
  double beta = 0.0;
  double sign = 1.0;  // V_i = 2 1(beta >= 0) - 1
};

double draw_beta(char row, PhiloxEngine& engine) {
  switch (row) {
    case 'a': return 0.0;
    case 'b': return normal(engine, 1.0);
    case 'c': return normal(engine, 10.0);
    case 'd': return centered_exponential(engine, 1.0);
    case 'e': return centered_exponential(engine, 0.1);
    case 'f': return -centered_exponential(engine, 1.0);
    case 'g': return -centered_exponential(engine, 0.1);
    case 'h':
    case 'j': return normal(engine, 1.0);
    case 'i':
    case 'k': return normal(engine, 5.0);
  }
  throw Error(ErrorCode::kUnknownScenario, std::string(1, row));
}

double draw_control_error(char row, double sign, PhiloxEngine& engine) {
  switch (row) {
    case 'a':
    case 'd':
    case 'e': return centered_exponential(engine, 0.1);
    case 'b':
    case 'c': return normal(engine, 10.0);
    case 'f':
    case 'g': return -centered_exponential(engine, 0.1);
    case 'h':
    case 'i': return sign * centered_exponential(engine, 0.1);
    case 'j':
    case 'k': return -sign * centered_exponential(engine, 0.1);
  }
  throw Error(ErrorCode::kUnknownScenario, std::string(1, row));
}

double draw_treated_error(char row, PhiloxEngine& engine) {
  switch (row) {
    case 'a': return 0.0;
    case 'b':
    case 'c': return normal(engine, 10.0);
    case 'd':
    case 'e': return centered_exponential(engine, 0.1);
    case 'f':
    case 'g': return -centered_exponential(engine, 0.1);
    case 'h':
    case 'i':
    case 'j':
    case 'k': return normal(engine, 1.0);
  }
  throw Error(ErrorCode::kUnknownScenario, std::string(1, row));
}

std::size_t draw_size(PhiloxEngine& engine) {
  std::poisson_distribution<int> poisson(2.0);
  while (true) {
    const auto n = static_cast<std::size_t>(2 + poisson(engine));
    if (n <= kMaxSetSize) return n;
  }
}

double sample_mean(const std::vector<double>& x) {
  double total = 0.0;
  for (double v : x) total += v;
  return x.empty() ? 0.0 : total / static_cast<double>(x.size());
}

double sample_sd(const std::vector<double>& x) {
  if (x.size() < 2) return 0.0;
  const double m = sample_mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double sample_covariance(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return 0.0;
  const double mx = sample_mean(x);
  const double my = sample_mean(y);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - mx) * (y[i] - my);
  return acc / static_cast<double>(x.size() - 1);
}

double ratio(double numerator, double denominator) {
  if (denominator > 0.0) return numerator / denominator;
  if (numerator == 0.0) return 0.0;
  return numerator > 0.0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
}

ConfounderTarget target_for(Method method, const Scenario& scenario) {
  switch (method) {
    case Method::kKtilde: return ConfounderTarget::kKtilde;
    case Method::kDbar:
    case Method::kBinaryIp: return ConfounderTarget::kDbar;
    case Method::kPermT: return scenario.appendix_a ? ConfounderTarget::kTauHat : ConfounderTarget::kPermT;
  }
  return ConfounderTarget::kDbar;
}

struct Cell {
  double excess = 0.0;  // statistic minus its assumed worst-case expectation
  double bound = 0.0;   // analytic bound, or solve seconds for binary_ip
  double deviate = 0.0;
  bool reject = false;
};

}  // namespace

Scenario make_scenario(std::string_view label) {
  Scenario s;
  s.label = std::string(label);
  if (label == "appendixA") {
    s.appendix_a = true;
    s.fixed_size = 5;
    s.gamma = 1.0;
    s.alpha = 0.05;
    return s;
  }
  std::string_view row = label;
  if (row.starts_with("binary-")) {
    s.binary = true;
    row.remove_prefix(7);
  }
  if (row.size() != 1 || row[0] < 'a' || row[0] > 'k') {
    throw Error(ErrorCode::kUnknownScenario, "'" + std::string(label) + "'");
  }
  s.row = row[0];
  return s;
}

std::vector<std::string> scenario_labels() {
  std::vector<std::string> out;
  for (char c = 'a'; c <= 'k'; ++c) out.emplace_back(1, c);
  for (char c = 'a'; c <= 'k'; ++c) out.push_back(std::string("binary-") + c);
  out.emplace_back("appendixA");
  return out;
}

PotentialOutcomes generate(const Scenario& scenario, std::size_t replicate) {
  PhiloxEngine engine(scenario.seed, stream_id(static_cast<std::uint32_t>(replicate), 0));
  std::vector<PotentialStratum> strata(scenario.strata);
  for (PotentialStratum& s : strata) {
    const std::size_t n = scenario.fixed_size != 0 ? scenario.fixed_size : draw_size(engine);
    s.r_control.resize(n);
    s.r_treated.resize(n);
    if (scenario.appendix_a) {
      std::exponential_distribution<double> control(1.0 / 15.0);
      std::exponential_distribution<double> effect(1.0 / 30.0);
      for (std::size_t j = 0; j < n; ++j) {
        s.r_control[j] = control(engine);
        s.r_treated[j] = s.r_control[j] + effect(engine);
      }
      continue;
    }
    const double beta = draw_beta(scenario.row, engine);
    const double sign = beta >= 0.0 ? 1.0 : -1.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double control = draw_control_error(scenario.row, sign, engine);
      const double treated = control + beta + draw_treated_error(scenario.row, engine);
      s.r_control[j] = control;
      s.r_treated[j] = treated;
    }
    if (scenario.binary) {
      for (std::size_t j = 0; j < n; ++j) {
        s.r_control[j] = s.r_control[j] > 0.0 ? 1.0 : 0.0;
        s.r_treated[j] = s.r_treated[j] > 0.0 ? 1.0 : 0.0;
      }
    }
  }
  return PotentialOutcomes(std::move(strata));
}

ConfounderAssignment worst_case_confounder(const PotentialOutcomes& potential, ConfounderTarget target,
                                           double tau0, const GammaModel& model) {
  std::vector<std::vector<int>> u(potential.num_strata());
  for (std::size_t i = 0; i < potential.num_strata(); ++i) {
    const std::size_t n = potential.stratum(i).size();
    const std::vector<double> delta = potential.deltas(i);
    std::vector<double> q(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double x = delta[j] - tau0;
      switch (target) {
        case ConfounderTarget::kDbar: q[j] = d_stat(x, model.gamma()); break;
        case ConfounderTarget::kKtilde: q[j] = d_stat(x, model.gamma_n(n)); break;
        case ConfounderTarget::kTauHat: q[j] = x; break;
        case ConfounderTarget::kPermT: {
          const double w = potential.weight(i);
          const Stratum observed = potential.observe(i, j);
          q[j] = w * x - perm_t_offset(observed.outcomes, j, w, tau0, model);
          break;
        }
      }
    }
    worst_case_pattern(q, model, u[i]);
  }
  return make_assignment(std::move(u), model.gamma());
}

std::vector<std::size_t> draw_assignment(const std::vector<std::vector<double>>& rho, PhiloxEngine& engine) {
  std::vector<std::size_t> treated(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double x = engine.uniform();
    double acc = 0.0;
    std::size_t pick = rho[i].size() - 1;
    for (std::size_t j = 0; j < rho[i].size(); ++j) {
      acc += rho[i][j];
      if (x < acc) {
        pick = j;
        break;
      }
    }
    treated[i] = pick;
  }
  return treated;
}

double dbar_bias_bound(const PotentialOutcomes& potential, const std::vector<std::vector<double>>& rho,
                       double tau0, const GammaModel& model) {
  validate_probability_rows(potential, rho);
  const double g = model.gamma();
  double centred = 0.0;
  double drift = 0.0;
  for (std::size_t i = 0; i < potential.num_strata(); ++i) {
    const double w = potential.weight(i);
    const double tau_bar_i = potential.tau_bar(i);
    const std::vector<double> delta = potential.deltas(i);
    double expected = 0.0;
    double p_above = 0.0;
    for (std::size_t j = 0; j < delta.size(); ++j) {
      expected += rho[i][j] * d_stat(delta[j] - tau_bar_i, g);
      if (delta[j] >= tau_bar_i) p_above += rho[i][j];
    }
    centred += w * expected;
    drift += w * (1.0 + (1.0 - g) / g * p_above) * (tau_bar_i - tau0);
  }
  return centred + 2.0 * g / (1.0 + g) * drift;
}

double dbar_expectation(const PotentialOutcomes& potential, const std::vector<std::vector<double>>& rho,
                        double tau0, const GammaModel& model) {
  validate_probability_rows(potential, rho);
  double total = 0.0;
  for (std::size_t i = 0; i < potential.num_strata(); ++i) {
    const std::vector<double> delta = potential.deltas(i);
    double expected = 0.0;
    for (std::size_t j = 0; j < delta.size(); ++j) expected += rho[i][j] * d_stat(delta[j] - tau0, model.gamma());
    total += potential.weight(i) * expected;
  }
  return total;
}

std::vector<Method> default_methods(const Scenario& scenario) {
  if (scenario.appendix_a) return {Method::kPermT};
  if (scenario.binary) return {Method::kKtilde, Method::kDbar, Method::kBinaryIp};
  return {Method::kKtilde, Method::kDbar, Method::kPermT};
}

StudyResult run_size_study(const Scenario& scenario, std::vector<Method> methods) {
  if (scenario.replicates < 100) throw Error(ErrorCode::kInvalidArgument, "size studies need M >= 100");
  check_alpha(scenario.alpha);
  if (methods.empty()) methods = default_methods(scenario);
  for (Method m : methods) {
    if (m == Method::kBinaryIp && !scenario.binary) {
      throw Error(ErrorCode::kNonBinaryOutcome, "binary_ip needs a binary scenario");
    }
  }
  const GammaModel model(scenario.gamma);
  const std::size_t k = methods.size();
  std::vector<Cell> cells(scenario.replicates * k);

  parallel_for(scenario.replicates, [&](std::size_t m) {
    const PotentialOutcomes potential = generate(scenario, m);
    const double tau0 = potential.tau_bar();
    for (std::size_t idx = 0; idx < k; ++idx) {
      const Method method = methods[idx];
      const ConfounderTarget target = target_for(method, scenario);
      const ConfounderAssignment confounder = worst_case_confounder(potential, target, tau0, model);
      PhiloxEngine engine(scenario.seed, stream_id(static_cast<std::uint32_t>(m), 1 + static_cast<std::uint32_t>(target)));
      const std::vector<std::size_t> treated = draw_assignment(confounder.rho, engine);
      const MatchedDesign design = potential.observe(treated);

      Cell& cell = cells[m * k + idx];
      SensitivityResult result;
      switch (method) {
        case Method::kKtilde:
          result = test_ktilde(design, tau0, model, scenario.alpha);
          cell.excess = result.statistic;
          cell.bound = 0.0;
          break;
        case Method::kDbar:
          result = test_dbar(design, tau0, model, scenario.alpha);
          cell.excess = result.statistic;
          cell.bound = dbar_bias_bound(potential, confounder.rho, tau0, model);
          break;
        case Method::kPermT:
          result = perm_t_sensitivity(design, tau0, model, scenario.alpha);
          cell.excess = result.statistic - result.expectation_bound;
          cell.bound = perm_t_bias_bound(potential, confounder.rho, tau0, model).bound;
          break;
        case Method::kBinaryIp: {
          const auto start = std::chrono::steady_clock::now();
          result = test_binary(design, tau0, model, scenario.alpha);
          const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
          cell.excess = result.statistic - result.expectation_bound;
          cell.bound = elapsed.count();
          break;
        }
      }
      cell.deviate = result.deviate;
      cell.reject = result.reject;
    }
  });

  StudyResult out;
  out.scenario = scenario;
  for (std::size_t idx = 0; idx < k; ++idx) {
    std::vector<double> excess, bound, deviate;
    StudyRow row;
    row.method = methods[idx];
    row.bound_is_seconds = methods[idx] == Method::kBinaryIp;
    for (std::size_t m = 0; m < scenario.replicates; ++m) {
      const Cell& c = cells[m * k + idx];
      excess.push_back(c.excess);
      bound.push_back(c.bound);
      if (std::isfinite(c.deviate)) deviate.push_back(c.deviate);
      row.rejections += c.reject ? 1 : 0;
    }
    const double sd = sample_sd(excess);
    row.size = static_cast<double>(row.rejections) / static_cast<double>(scenario.replicates);
    row.bias = ratio(sample_mean(excess), sd);
    row.bound = row.bound_is_seconds ? sample_mean(bound) : ratio(sample_mean(bound), sd);
    row.mean_deviate = sample_mean(deviate);
    row.sd_deviate = sample_sd(deviate);
    out.rows.push_back(row);
  }
  return out;
}

DiagnosticRecord diagnostics(const PotentialOutcomes& potential, const ConfounderAssignment& u_true,
                             const ConfounderAssignment& u_star, double tau0, const GammaModel& model) {
  validate_probability_rows(potential, u_true.rho);
  validate_probability_rows(potential, u_star.rho);
  const std::size_t b = potential.num_strata();
  std::vector<double> drift(b), p_true(b), p_star(b), weight_star(b);
  for (std::size_t i = 0; i < b; ++i) {
    const double n = static_cast<double>(potential.stratum(i).size());
    const double tau_bar_i = potential.tau_bar(i);
    const std::vector<double> delta = potential.deltas(i);
    drift[i] = n * (tau_bar_i - tau0);
    double denom = 0.0;
    for (std::size_t j = 0; j < delta.size(); ++j) {
      const bool above = delta[j] >= tau_bar_i;
      if (above) {
        p_true[i] += u_true.rho[i][j];
        p_star[i] += u_star.rho[i][j];
      }
      denom += above ? model.gamma() : 1.0;
    }
    weight_star[i] = n / denom;
  }
  return DiagnosticRecord{sample_covariance(p_true, drift), sample_covariance(p_star, drift),
                          sample_covariance(weight_star, drift)};
}

double fitted_residual_covariance(const PotentialOutcomes& potential) {
  std::vector<double> fitted, residual;
  for (std::size_t i = 0; i < potential.num_strata(); ++i) {
    const double tau_bar_i = potential.tau_bar(i);
    for (double d : potential.deltas(i)) {
      fitted.push_back(tau_bar_i);
      residual.push_back(d - tau_bar_i);
    }
  }
  return sample_covariance(fitted, residual);
}

PotentialOutcomes theorem1_potential(double c) {
  std::vector<PotentialStratum> strata;
  strata.push_back(PotentialStratum{{2.0 * c, 0.0, 0.0}, {0.0, 0.0, 0.0}});
  strata.push_back(PotentialStratum{{-c, 0.0, 0.0}, {0.0, 0.0, 0.0}});
  strata.push_back(PotentialStratum{{-c, 0.0, 0.0}, {0.0, 0.0, 0.0}});
  return PotentialOutcomes(std::move(strata));
}

std::vector<std::vector<int>> theorem1_confounder() { return {{1, 0, 0}, {0, 1, 1}, {0, 1, 1}}; }

double theorem1_fixture(double gamma, double c) {
  if (!(c > 0.0)) throw Error(ErrorCode::kInvalidArgument, "c must be positive");
  const GammaModel model(gamma);
  const PotentialOutcomes potential = theorem1_potential(c);
  const ConfounderAssignment confounder = make_assignment(theorem1_confounder(), gamma);
  double total = 0.0;
  for (std::size_t i = 0; i < potential.num_strata(); ++i) {
    const std::vector<double> delta = potential.deltas(i);
    for (std::size_t k = 0; k < delta.size(); ++k) {
      const Stratum observed = potential.observe(i, k);
      const double mu = perm_t_offset(observed.outcomes, k, 1.0, 0.0, model);
      total += confounder.rho[i][k] * (delta[k] - mu);
    }
  }
  return total;
}

double limiting_variance_true(double sigma2_control, double sigma2_treated, double sigma2_effect, std::size_t n) {
  const double m = static_cast<double>(n);
  return sigma2_control / (m - 1.0) + sigma2_treated - sigma2_effect / m;
}

double limiting_variance_permutation(double sigma2_control, double sigma2_treated, std::size_t n) {
  const double m = static_cast<double>(n);
  return ((m - 1.0) * sigma2_control + sigma2_treated) / (m - 1.0);
}

}  // namespace senssolve
