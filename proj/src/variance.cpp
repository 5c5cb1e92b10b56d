#include "senssolve/variance.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "senssolve/error.hpp"
#include "senssolve/kernels.hpp"

namespace senssolve {
namespace {

constexpr double kLeverageGuard = 1e-10;

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_shape(const DesignMatrixQ& q, std::size_t values) {
  if (q.rows != values) {
    throw Error(ErrorCode::kInvalidArgument, "Q has " + std::to_string(q.rows) + " rows for " +
                                                 std::to_string(values) + " strata");
  }
  if (q.cols == 0) throw Error(ErrorCode::kRankDeficientQ, "Q has no columns");
  if (q.rows <= q.cols) {
    throw Error(ErrorCode::kTooFewStrata,
                "need more strata than columns of Q (B=" + std::to_string(q.rows) + ", p=" + std::to_string(q.cols) + ")");
  }
}

void check_leverages(std::span<const double> h) {
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h[i] >= 1.0 - kLeverageGuard) {
      throw Error(ErrorCode::kLeverageOne, "stratum " + std::to_string(i) + " has leverage " + std::to_string(h[i]));
    }
  }
}

struct Factorization {
  Eigen::MatrixXd basis;  // orthonormal basis of the column space, B x rank
};

Factorization factor(const DesignMatrixQ& q) {
  const Eigen::Map<const RowMatrix> m(q.entries.data(), static_cast<Eigen::Index>(q.rows),
                                      static_cast<Eigen::Index>(q.cols));
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  if (qr.rank() < static_cast<Eigen::Index>(q.cols)) {
    throw Error(ErrorCode::kRankDeficientQ, "Q has rank " + std::to_string(qr.rank()) + " < " + std::to_string(q.cols));
  }
  Eigen::MatrixXd thin = Eigen::MatrixXd::Identity(m.rows(), m.cols());
  Factorization out;
  out.basis = qr.householderQ() * thin;
  return out;
}

}  // namespace

DesignMatrixQ::DesignMatrixQ(std::size_t rows_in, std::size_t cols_in, std::vector<double> entries_in)
    : rows(rows_in), cols(cols_in), entries(std::move(entries_in)) {
  if (entries.size() != rows * cols) throw Error(ErrorCode::kInvalidArgument, "Q entries do not match its shape");
}

DesignMatrixQ default_q(std::span<const std::size_t> sizes) {
  double total = 0.0;
  for (std::size_t n : sizes) total += static_cast<double>(n);
  const double b = static_cast<double>(sizes.size());
  std::vector<double> column(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) column[i] = b * static_cast<double>(sizes[i]) / total;
  return DesignMatrixQ(sizes.size(), 1, std::move(column));
}

DesignMatrixQ default_q(const MatchedDesign& design) {
  std::vector<std::size_t> sizes;
  sizes.reserve(design.num_strata());
  for (const Stratum& s : design.strata()) sizes.push_back(s.size());
  return default_q(sizes);
}

std::vector<double> leverages(const DesignMatrixQ& q) {
  check_shape(q, q.rows);
  std::vector<double> h(q.rows);
  if (q.cols == 1) {
    const double ss = kernels::dot(q.entries, q.entries);
    if (!(ss > 0.0)) throw Error(ErrorCode::kRankDeficientQ, "Q column is zero");
    for (std::size_t i = 0; i < q.rows; ++i) h[i] = q.entries[i] * q.entries[i] / ss;
    return h;
  }
  const Factorization f = factor(q);
  for (std::size_t i = 0; i < q.rows; ++i) h[i] = f.basis.row(static_cast<Eigen::Index>(i)).squaredNorm();
  return h;
}

double se_q(std::span<const double> per_stratum_values, const DesignMatrixQ& q) {
  check_shape(q, per_stratum_values.size());
  const std::size_t b = q.rows;
  const double scale = static_cast<double>(b);

  if (q.cols == 1) {
    const std::span<const double> col(q.entries);
    const double ss = kernels::dot(col, col);
    if (!(ss > 0.0)) throw Error(ErrorCode::kRankDeficientQ, "Q column is zero");
    std::vector<double> h(b);
    for (std::size_t i = 0; i < b; ++i) h[i] = col[i] * col[i] / ss;
    check_leverages(h);
    std::vector<double> y(b);
    kernels::leverage_scale(per_stratum_values, h, scale, y);
    const double beta = kernels::dot(col, y) / ss;
    return std::sqrt(std::max(kernels::residual_ss(y, col, beta), 0.0)) / scale;
  }

  const Factorization f = factor(q);
  std::vector<double> h(b);
  for (std::size_t i = 0; i < b; ++i) h[i] = f.basis.row(static_cast<Eigen::Index>(i)).squaredNorm();
  check_leverages(h);
  std::vector<double> y(b);
  kernels::leverage_scale(per_stratum_values, h, scale, y);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(b));
  const Eigen::VectorXd residual = yv - f.basis * (f.basis.transpose() * yv);
  return residual.norm() / scale;
}

bool is_degenerate_se(double se, std::span<const double> per_stratum_values) {
  const double norm = std::sqrt(kernels::dot(per_stratum_values, per_stratum_values));
  return !(se > 1e-12 * norm);
}

}  // namespace senssolve
