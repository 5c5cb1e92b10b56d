#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "senssolve/design.hpp"

namespace senssolve {

// B x p matrix fixed across treatment assignments; row-major.
struct DesignMatrixQ {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> entries;

  DesignMatrixQ() = default;
  DesignMatrixQ(std::size_t rows, std::size_t cols, std::vector<double> entries);

  double operator()(std::size_t i, std::size_t j) const { return entries[i * cols + j]; }
};

// Single column B n_i / N.
DesignMatrixQ default_q(const MatchedDesign& design);
DesignMatrixQ default_q(std::span<const std::size_t> sizes);

// Diagonal of the hat matrix Q (Q'Q)^-1 Q'. Throws RankDeficientQ or
// TooFewStrata.
std::vector<double> leverages(const DesignMatrixQ& q);

// sqrt(Y'(I - H)Y) / B with Y_i = B v_i / sqrt(1 - h_ii), where v holds the
// per-stratum terms of the statistic (they sum to the statistic).
// Throws RankDeficientQ, LeverageOne or TooFewStrata.
double se_q(std::span<const double> per_stratum_values, const DesignMatrixQ& q);

// True when se is zero up to round-off relative to the terms it was built from.
bool is_degenerate_se(double se, std::span<const double> per_stratum_values);

}  // namespace senssolve
