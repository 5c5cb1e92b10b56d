#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops shared by the statistics. Each kernel has a
// scalar reference implementation and, on x86-64, an AVX2 variant; the
// variant is chosen once at startup from CPUID and may be forced with
// SENSSOLVE_SIMD=scalar.
namespace senssolve::kernels {

enum class Backend { kScalar, kAvx2 };

std::string_view backend_name(Backend backend);
bool avx2_supported();
Backend active_backend();
// Test hook; throws if the requested backend is not available.
void force_backend(Backend backend);

double sum(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);

// out[i] = x[i] >= 0 ? 2 x[i] / (1 + g) : 2 g x[i] / (1 + g)
void penalize(std::span<const double> x, double gamma, std::span<double> out);

// Σ (y[i] - beta q[i])²
double residual_ss(std::span<const double> y, std::span<const double> q, double beta);

// out[i] = scale * y[i] / sqrt(1 - h[i])
void leverage_scale(std::span<const double> y, std::span<const double> h, double scale, std::span<double> out);

namespace scalar {
double sum(const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void penalize(const double* x, double gamma, double* out, std::size_t n);
double residual_ss(const double* y, const double* q, double beta, std::size_t n);
void leverage_scale(const double* y, const double* h, double scale, double* out, std::size_t n);
}  // namespace scalar

namespace avx2 {
double sum(const double* x, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
void penalize(const double* x, double gamma, double* out, std::size_t n);
double residual_ss(const double* y, const double* q, double beta, std::size_t n);
void leverage_scale(const double* y, const double* h, double scale, double* out, std::size_t n);
}  // namespace avx2

}  // namespace senssolve::kernels
