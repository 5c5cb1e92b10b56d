#include "senssolve/potential.hpp"

#include <cmath>
#include <string>

#include "senssolve/error.hpp"

namespace senssolve {

PotentialOutcomes::PotentialOutcomes(std::vector<PotentialStratum> strata) : strata_(std::move(strata)) {
  if (strata_.empty()) throw Error(ErrorCode::kEmptyInput, "no strata");
  for (const PotentialStratum& s : strata_) {
    if (s.r_treated.size() != s.r_control.size()) {
      throw Error(ErrorCode::kInvalidArgument, "potential outcome vectors differ in length");
    }
    if (s.size() < 2) throw Error(ErrorCode::kStratumTooSmall, std::to_string(s.size()) + " unit(s)");
    num_units_ += s.size();
  }
}

double PotentialOutcomes::weight(std::size_t i) const {
  return static_cast<double>(strata_[i].size()) / static_cast<double>(num_units_);
}

std::vector<double> PotentialOutcomes::effects(std::size_t i) const {
  const PotentialStratum& s = strata_[i];
  std::vector<double> out(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) out[j] = s.r_treated[j] - s.r_control[j];
  return out;
}

std::vector<double> PotentialOutcomes::deltas(std::size_t i) const {
  const PotentialStratum& s = strata_[i];
  double control_total = 0.0;
  for (double r : s.r_control) control_total += r;
  const double others = static_cast<double>(s.size()) - 1.0;
  std::vector<double> out(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    out[j] = s.r_treated[j] - (control_total - s.r_control[j]) / others;
  }
  return out;
}

double PotentialOutcomes::tau_bar(std::size_t i) const {
  const PotentialStratum& s = strata_[i];
  double total = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) total += s.r_treated[j] - s.r_control[j];
  return total / static_cast<double>(s.size());
}

double PotentialOutcomes::tau_bar() const {
  double total = 0.0;
  for (const PotentialStratum& s : strata_) {
    for (std::size_t j = 0; j < s.size(); ++j) total += s.r_treated[j] - s.r_control[j];
  }
  return total / static_cast<double>(num_units_);
}

Stratum PotentialOutcomes::observe(std::size_t i, std::size_t treated_index) const {
  const PotentialStratum& s = strata_[i];
  Stratum out{std::to_string(i + 1), s.r_control, treated_index};
  out.outcomes[treated_index] = s.r_treated[treated_index];
  return out;
}

MatchedDesign PotentialOutcomes::observe(std::span<const std::size_t> treated) const {
  if (treated.size() != strata_.size()) {
    throw Error(ErrorCode::kInvalidArgument, "one treated index per stratum is required");
  }
  std::vector<Stratum> strata;
  strata.reserve(strata_.size());
  for (std::size_t i = 0; i < strata_.size(); ++i) strata.push_back(observe(i, treated[i]));
  return MatchedDesign(std::move(strata));
}

std::vector<double> assignment_probabilities(std::span<const int> u, double gamma) {
  double total = 0.0;
  for (int v : u) total += v != 0 ? gamma : 1.0;
  std::vector<double> rho(u.size());
  for (std::size_t j = 0; j < u.size(); ++j) rho[j] = (u[j] != 0 ? gamma : 1.0) / total;
  return rho;
}

ConfounderAssignment make_assignment(std::vector<std::vector<int>> u, double gamma) {
  ConfounderAssignment out;
  out.rho.reserve(u.size());
  for (const auto& row : u) out.rho.push_back(assignment_probabilities(row, gamma));
  out.u = std::move(u);
  return out;
}

}  // namespace senssolve
