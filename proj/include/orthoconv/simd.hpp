#pragma once

#include <cstddef>
#include <string>

// Vector kernels used by the dense linear algebra inner loops. Every kernel
// has a scalar reference implementation and an AVX2 variant; the active
// backend is chosen once at startup from CPUID and can be forced with the
// ORTHOCONV_SIMD environment variable ("scalar", "avx2", "auto").
//
// axpy/scale/rot are elementwise and produce bit-identical results on every
// backend. dot/nrm2_sq accumulate in lanes, so backends may differ in the
// last ulps; callers must not rely on their exact rounding.

namespace orthoconv::simd {

enum class Backend { scalar, avx2 };

/// Backend selected at startup (CPUID + ORTHOCONV_SIMD override).
Backend active_backend();
std::string backend_name(Backend b);
bool avx2_supported();

/// sum_i x[i]*y[i]
double dot(const double* x, const double* y, std::size_t n);
/// sum_i x[i]^2
double nrm2_sq(const double* x, std::size_t n);
/// y[i] += a*x[i]
void axpy(double a, const double* x, double* y, std::size_t n);
/// x[i] *= a
void scale(double a, double* x, std::size_t n);
/// plane rotation: (x[i], y[i]) <- (c*x[i] - s*y[i], s*x[i] + c*y[i])
void rot(double* x, double* y, std::size_t n, double c, double s);

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
double nrm2_sq(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
void rot(double* x, double* y, std::size_t n, double c, double s);
} // namespace scalar

namespace avx2 {
// Defined only when built for x86-64; guarded by avx2_supported() at runtime.
double dot(const double* x, const double* y, std::size_t n);
double nrm2_sq(const double* x, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
void rot(double* x, double* y, std::size_t n, double c, double s);
} // namespace avx2

} // namespace orthoconv::simd
