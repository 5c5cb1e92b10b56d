#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "senssolve/design.hpp"
#include "senssolve/result.hpp"
#include "senssolve/separable.hpp"

namespace senssolve {

enum class Alternative { kGreater, kLess };

Alternative parse_alternative(std::string_view name);

// Studentized tests against a worst-case expectation of zero, using se_q with
// the default Q. Both require B >= 2.
SensitivityResult test_dbar(const MatchedDesign& design, double tau0, const GammaModel& model, double alpha = 0.05);
SensitivityResult test_ktilde(const MatchedDesign& design, double tau0, const GammaModel& model,
                              double alpha = 0.05);

// Dispatches on method. The less-than alternative runs the greater-than test
// on negated outcomes and negated tau0; the reported tau0 is the caller's.
SensitivityResult run_method(const MatchedDesign& design, Method method, double tau0, const GammaModel& model,
                             double alpha = 0.05, Alternative alternative = Alternative::kGreater);

struct ChangepointResult {
  // Smallest gamma with p >= alpha, to within 1e-4.
  double gamma = 1.0;
  // p >= alpha already at gamma = 1; gamma is then reported as 1.
  bool not_significant_at_one = false;
  // A 10-point grid over [1, gamma_max] found p decreasing somewhere.
  bool monotonicity_warning = false;
};

// Bisection on [1, gamma_max]. Throws NoCrossingBelowMax when p < alpha at
// gamma_max.
ChangepointResult changepoint(const MatchedDesign& design, double tau0, Method method, double alpha,
                              double gamma_max, Alternative alternative = Alternative::kGreater);

// Draws of the studentized dbar statistic under biased randomization with
// the worst-case confounder for constant effects at tau0.
struct ReferenceDistribution {
  std::vector<double> draws;  // in draw order
  std::uint64_t seed = 0;
  std::size_t count = 0;
  std::size_t discarded = 0;

  // Smallest draw whose empirical distribution function reaches level.
  double quantile(double level) const;
  // Fraction of draws <= k.
  double cdf(double k) const;

 private:
  friend ReferenceDistribution randomization_reference(const MatchedDesign&, double, const GammaModel&,
                                                       std::size_t, std::uint64_t);
  std::vector<double> sorted_;
};

// m_draws >= 1000. Draws whose standard error vanishes are replaced; more than
// 1% replacements throws DegenerateSE.
ReferenceDistribution randomization_reference(const MatchedDesign& design, double tau0, const GammaModel& model,
                                              std::size_t m_draws, std::uint64_t seed);

// test_dbar with the reference distribution in place of the normal: rejects
// when the studentized statistic reaches the 1 - alpha quantile; p is the
// fraction of draws at or above it.
SensitivityResult test_dbar_reference(const MatchedDesign& design, double tau0, const GammaModel& model,
                                      double alpha, const ReferenceDistribution& reference);

}  // namespace senssolve
