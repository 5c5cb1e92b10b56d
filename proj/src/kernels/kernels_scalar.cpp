#include <cmath>

#include "senssolve/kernels.hpp"

namespace senssolve::kernels::scalar {

double sum(const double* x, std::size_t n) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += x[i];
  return total;
}

double dot(const double* a, const double* b, std::size_t n) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += a[i] * b[i];
  return total;
}

void penalize(const double* x, double gamma, double* out, std::size_t n) {
  const double denom = 1.0 + gamma;
  const double up = 2.0;
  const double down = 2.0 * gamma;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (x[i] * (x[i] >= 0.0 ? up : down)) / denom;
  }
}

double residual_ss(const double* y, const double* q, double beta, std::size_t n) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - beta * q[i];
    total += r * r;
  }
  return total;
}

void leverage_scale(const double* y, const double* h, double scale, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = scale * y[i] / std::sqrt(1.0 - h[i]);
}

}  // namespace senssolve::kernels::scalar
