#include <atomic>
#include <cstdlib>
#include <string>

#include "senssolve/error.hpp"
#include "senssolve/kernels.hpp"

namespace senssolve::kernels {
namespace {

Backend detect() {
  if (const char* env = std::getenv("SENSSOLVE_SIMD"); env != nullptr && std::string(env) == "scalar") {
    return Backend::kScalar;
  }
  return avx2_supported() ? Backend::kAvx2 : Backend::kScalar;
}

std::atomic<Backend>& current() {
  static std::atomic<Backend> backend{detect()};
  return backend;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw Error(ErrorCode::kInvalidArgument, "kernel operands differ in length");
}

}  // namespace

std::string_view backend_name(Backend backend) {
  return backend == Backend::kAvx2 ? "avx2" : "scalar";
}

bool avx2_supported() {
#if defined(SENSSOLVE_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend active_backend() { return current().load(std::memory_order_relaxed); }

void force_backend(Backend backend) {
  if (backend == Backend::kAvx2 && !avx2_supported()) {
    throw Error(ErrorCode::kInvalidArgument, "AVX2 backend is not available on this machine");
  }
  current().store(backend, std::memory_order_relaxed);
}

#if defined(SENSSOLVE_HAVE_AVX2)
#define SENSSOLVE_DISPATCH(call_avx2, call_scalar) \
  return active_backend() == Backend::kAvx2 ? call_avx2 : call_scalar
#else
#define SENSSOLVE_DISPATCH(call_avx2, call_scalar) return call_scalar
#endif

double sum(std::span<const double> x) {
  SENSSOLVE_DISPATCH(avx2::sum(x.data(), x.size()), scalar::sum(x.data(), x.size()));
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  SENSSOLVE_DISPATCH(avx2::dot(a.data(), b.data(), a.size()), scalar::dot(a.data(), b.data(), a.size()));
}

void penalize(std::span<const double> x, double gamma, std::span<double> out) {
  check_sizes(x.size(), out.size());
  SENSSOLVE_DISPATCH(avx2::penalize(x.data(), gamma, out.data(), x.size()),
                     scalar::penalize(x.data(), gamma, out.data(), x.size()));
}

double residual_ss(std::span<const double> y, std::span<const double> q, double beta) {
  check_sizes(y.size(), q.size());
  SENSSOLVE_DISPATCH(avx2::residual_ss(y.data(), q.data(), beta, y.size()),
                     scalar::residual_ss(y.data(), q.data(), beta, y.size()));
}

void leverage_scale(std::span<const double> y, std::span<const double> h, double scale, std::span<double> out) {
  check_sizes(y.size(), h.size());
  check_sizes(y.size(), out.size());
  SENSSOLVE_DISPATCH(avx2::leverage_scale(y.data(), h.data(), scale, out.data(), y.size()),
                     scalar::leverage_scale(y.data(), h.data(), scale, out.data(), y.size()));
}

#undef SENSSOLVE_DISPATCH

}  // namespace senssolve::kernels
