#pragma once

#include <cstddef>

// Low-level dense kernels. Every arithmetic inner loop in the library funnels
// through these five primitives so that a single dispatch point decides between
// the scalar reference implementation and the AVX2 variant.
//
// Backend selection happens once, at first use: AVX2 is picked when the CPU
// reports avx2+fma, unless the environment variable DCCA_KERNELS=scalar|avx2
// forces a choice. The scalar and SIMD variants are equivalence-tested against
// each other; they may differ by reassociation rounding, never semantically.

namespace dcca::kernels {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
const char* backend_name(Backend b);

/// Force a backend (throws ArgumentError if unavailable on this CPU).
/// Intended for tests and benchmarking; not thread-safe against in-flight calls.
void force_backend(Backend b);

/// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);

/// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);

/// x[i] *= alpha
void scal(double alpha, double* x, std::size_t n);

/// Plane rotation: (x[i], y[i]) <- (c*x[i] - s*y[i], s*x[i] + c*y[i])
void rot(double* x, double* y, double c, double s, std::size_t n);

/// sum_i x[i]
double sum(const double* x, std::size_t n);

namespace detail {
// Scalar reference implementations, exposed for equivalence tests.
double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void scal_scalar(double alpha, double* x, std::size_t n);
void rot_scalar(double* x, double* y, double c, double s, std::size_t n);
double sum_scalar(const double* x, std::size_t n);

#if defined(DCCA_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void scal_avx2(double alpha, double* x, std::size_t n);
void rot_avx2(double* x, double* y, double c, double s, std::size_t n);
double sum_avx2(const double* x, std::size_t n);
#endif
}  // namespace detail

}  // namespace dcca::kernels
