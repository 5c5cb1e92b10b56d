#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace senssolve {

// One matched set: a single treated unit and n - 1 controls.
struct Stratum {
  std::string id;
  std::vector<double> outcomes;
  std::size_t treated_index = 0;

  std::size_t size() const { return outcomes.size(); }
  double treated_outcome() const { return outcomes[treated_index]; }
};

// Post-matching study. Immutable once constructed; the constructor enforces
// one treated unit per stratum, n_i >= 2, finite outcomes and B >= 1.
class MatchedDesign {
 public:
  explicit MatchedDesign(std::vector<Stratum> strata);

  const std::vector<Stratum>& strata() const { return strata_; }
  const Stratum& stratum(std::size_t i) const { return strata_[i]; }
  std::size_t num_strata() const { return strata_.size(); }
  std::size_t num_units() const { return num_units_; }
  // Every outcome is exactly 0 or 1.
  bool is_binary() const { return binary_; }
  bool all_pairs() const;

  // Same design with every outcome negated; used for less-than alternatives.
  MatchedDesign negated() const;

 private:
  std::vector<Stratum> strata_;
  std::size_t num_units_ = 0;
  bool binary_ = false;
};

struct StratumSummary {
  double tau_hat = 0.0;    // treated minus mean of controls
  double weight = 0.0;     // n_i / N
  double delta_obs = 0.0;  // observed delta for the treated unit; equals tau_hat
  std::size_t size = 0;
};

// Reads delimited text with header columns block_id, treated, outcome (extra
// columns ignored). The delimiter is detected from the header line: tab,
// then semicolon, then comma.
MatchedDesign load_design(std::istream& in);
MatchedDesign load_design_file(const std::string& path);

// Writes block_id,treated,outcome rows with round-trip precision.
void write_design_csv(const MatchedDesign& design, std::ostream& out);

nlohmann::json design_to_json(const MatchedDesign& design);
MatchedDesign design_from_json(const nlohmann::json& doc);

std::vector<StratumSummary> summarize(const MatchedDesign& design);

// Sharp-null imputed treated-minus-control differences for each possible
// treated unit, computed from adjusted responses R - Z tau0. The entry at
// treated_index is the observed delta minus tau0.
std::vector<double> adjusted_deltas(const Stratum& stratum, double tau0);

// Same computation on a raw response vector with a designated treated index.
std::vector<double> adjusted_deltas(std::span<const double> outcomes, std::size_t treated_index, double tau0);

}  // namespace senssolve
