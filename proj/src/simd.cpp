#include "orthoconv/simd.hpp"

#include <cstdlib>
#include <cstring>

namespace orthoconv::simd {

namespace scalar {

double dot(const double* x, const double* y, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

double nrm2_sq(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
    return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void rot(double* x, double* y, std::size_t n, double c, double s) {
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = x[i];
        const double yi = y[i];
        x[i] = c * xi - s * yi;
        y[i] = s * xi + c * yi;
    }
}

} // namespace scalar

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") != 0;
#else
    return false;
#endif
}

namespace {

Backend detect_backend() {
    if (const char* env = std::getenv("ORTHOCONV_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::scalar;
        if (std::strcmp(env, "avx2") == 0 && avx2_supported()) return Backend::avx2;
        // "auto" or unrecognized value falls through to detection
    }
    return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

} // namespace

Backend active_backend() {
    static const Backend b = detect_backend();
    return b;
}

std::string backend_name(Backend b) {
    switch (b) {
        case Backend::avx2: return "avx2";
        case Backend::scalar: break;
    }
    return "scalar";
}

double dot(const double* x, const double* y, std::size_t n) {
    if (active_backend() == Backend::avx2) return avx2::dot(x, y, n);
    return scalar::dot(x, y, n);
}

double nrm2_sq(const double* x, std::size_t n) {
    if (active_backend() == Backend::avx2) return avx2::nrm2_sq(x, n);
    return scalar::nrm2_sq(x, n);
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    if (active_backend() == Backend::avx2) return avx2::axpy(a, x, y, n);
    scalar::axpy(a, x, y, n);
}

void scale(double a, double* x, std::size_t n) {
    if (active_backend() == Backend::avx2) return avx2::scale(a, x, n);
    scalar::scale(a, x, n);
}

void rot(double* x, double* y, std::size_t n, double c, double s) {
    if (active_backend() == Backend::avx2) return avx2::rot(x, y, n, c, s);
    scalar::rot(x, y, n, c, s);
}

#if !defined(__x86_64__) && !defined(_M_X64)
// Non-x86 builds still need the symbols; they are never reached because
// avx2_supported() is false.
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n) { return scalar::dot(x, y, n); }
double nrm2_sq(const double* x, std::size_t n) { return scalar::nrm2_sq(x, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { scalar::axpy(a, x, y, n); }
void scale(double a, double* x, std::size_t n) { scalar::scale(a, x, n); }
void rot(double* x, double* y, std::size_t n, double c, double s) { scalar::rot(x, y, n, c, s); }
} // namespace avx2
#endif

} // namespace orthoconv::simd
