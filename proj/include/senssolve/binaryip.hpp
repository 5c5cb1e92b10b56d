#pragma once

#include <cstddef>
#include <vector>

#include "senssolve/design.hpp"
#include "senssolve/result.hpp"
#include "senssolve/separable.hpp"

namespace senssolve {

// Strata sharing size, treated outcome and number of control ones.
struct ObservedTableGroup {
  std::size_t n = 0;
  int treated_outcome = 0;
  std::size_t control_ones = 0;
  std::size_t multiplicity = 0;
};

// One way to fill in the missing potential outcomes of a stratum. Units with
// the same (r_T, r_C) are exchangeable, so only counts are recorded.
struct CompletionCandidate {
  int treated_control_outcome = 0;    // r_C of the treated unit
  std::size_t ones_among_control_ones = 0;   // controls with r_C = 1 and r_T = 1
  std::size_t ones_among_control_zeros = 0;  // controls with r_C = 0 and r_T = 1
  // Counts of units by (r_T, r_C): index 2 r_T + r_C.
  std::size_t table[4] = {0, 0, 0, 0};
  int effect_sum = 0;
  double worst_case_mu = 0.0;
};

// Groups in first-appearance order. Throws NonBinaryOutcome.
std::vector<ObservedTableGroup> group_tables(const MatchedDesign& design);

// All 2 (c1 + 1)(c0 + 1) completions of a group, each with the worst-case
// expectation of weight * d_stat(delta - tau0, G) over binary confounders.
std::vector<CompletionCandidate> enumerate_completions(const ObservedTableGroup& group, double tau0,
                                                       const GammaModel& model, double weight);

// Largest total worst-case expectation of dbar over completions whose
// effects sum to N tau0. Throws NonBinaryOutcome, NonIntegerTarget or
// InfeasibleTau0.
double ip_bound(const MatchedDesign& design, double tau0, const GammaModel& model);

// dbar studentized against ip_bound instead of zero.
SensitivityResult test_binary(const MatchedDesign& design, double tau0, const GammaModel& model,
                              double alpha = 0.05);

}  // namespace senssolve
