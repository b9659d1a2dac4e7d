#include "dcca/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

#include "dcca/errors.hpp"

namespace dcca::kernels {

namespace detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scal_scalar(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void rot_scalar(double* x, double* y, double c, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double yi = y[i];
    x[i] = c * xi - s * yi;
    y[i] = s * xi + c * yi;
  }
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

}  // namespace detail

namespace {

struct Dispatch {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scal)(double, double*, std::size_t);
  void (*rot)(double*, double*, double, double, std::size_t);
  double (*sum)(const double*, std::size_t);
  Backend backend;
};

constexpr Dispatch kScalar{detail::dot_scalar, detail::axpy_scalar, detail::scal_scalar,
                           detail::rot_scalar, detail::sum_scalar, Backend::Scalar};

#if defined(DCCA_HAVE_AVX2)
constexpr Dispatch kAvx2{detail::dot_avx2, detail::axpy_avx2, detail::scal_avx2,
                         detail::rot_avx2, detail::sum_avx2, Backend::Avx2};
#endif

bool cpu_has_avx2() {
#if defined(DCCA_HAVE_AVX2) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Dispatch select_initial() {
  if (const char* env = std::getenv("DCCA_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return kScalar;
#if defined(DCCA_HAVE_AVX2)
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2()) return kAvx2;
#endif
  }
#if defined(DCCA_HAVE_AVX2)
  if (cpu_has_avx2()) return kAvx2;
#endif
  return kScalar;
}

Dispatch g_dispatch = select_initial();

}  // namespace

Backend active_backend() { return g_dispatch.backend; }

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "?";
}

void force_backend(Backend b) {
  if (b == Backend::Scalar) {
    g_dispatch = kScalar;
    return;
  }
#if defined(DCCA_HAVE_AVX2)
  if (b == Backend::Avx2 && cpu_has_avx2()) {
    g_dispatch = kAvx2;
    return;
  }
#endif
  throw ArgumentError(std::string("kernel backend unavailable: ") + backend_name(b));
}

double dot(const double* a, const double* b, std::size_t n) { return g_dispatch.dot(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { g_dispatch.axpy(alpha, x, y, n); }
void scal(double alpha, double* x, std::size_t n) { g_dispatch.scal(alpha, x, n); }
void rot(double* x, double* y, double c, double s, std::size_t n) { g_dispatch.rot(x, y, c, s, n); }
double sum(const double* x, std::size_t n) { return g_dispatch.sum(x, n); }

}  // namespace dcca::kernels
