#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "senssolve/design.hpp"

namespace senssolve {

struct PotentialStratum {
  std::vector<double> r_treated;
  std::vector<double> r_control;

  std::size_t size() const { return r_treated.size(); }
};

// Both potential outcomes for every unit. Only available in simulation.
class PotentialOutcomes {
 public:
  explicit PotentialOutcomes(std::vector<PotentialStratum> strata);

  const std::vector<PotentialStratum>& strata() const { return strata_; }
  const PotentialStratum& stratum(std::size_t i) const { return strata_[i]; }
  std::size_t num_strata() const { return strata_.size(); }
  std::size_t num_units() const { return num_units_; }
  double weight(std::size_t i) const;

  // tau_ij = r_T - r_C
  std::vector<double> effects(std::size_t i) const;
  // delta_ij = r_Tj - mean of r_C over the other units
  std::vector<double> deltas(std::size_t i) const;
  double tau_bar(std::size_t i) const;
  double tau_bar() const;

  // Observed responses when unit treated[i] of stratum i receives treatment.
  Stratum observe(std::size_t i, std::size_t treated_index) const;
  MatchedDesign observe(std::span<const std::size_t> treated) const;

 private:
  std::vector<PotentialStratum> strata_;
  std::size_t num_units_ = 0;
};

// Binary hidden covariate and the resulting within-stratum assignment
// probabilities rho_ij = exp(g u_ij) / sum_j' exp(g u_ij').
struct ConfounderAssignment {
  std::vector<std::vector<int>> u;
  std::vector<std::vector<double>> rho;
};

std::vector<double> assignment_probabilities(std::span<const int> u, double gamma);
ConfounderAssignment make_assignment(std::vector<std::vector<int>> u, double gamma);

}  // namespace senssolve
