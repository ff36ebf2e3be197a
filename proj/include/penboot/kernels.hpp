#pragma once

#include <cstddef>

// Low-level array kernels used by the hot loops (coordinate descent sweeps,
// residual updates, moment accumulation).  Each kernel has a portable scalar
// implementation and, on x86-64, an AVX2/FMA variant.  The variant is chosen
// once at startup from cpuid, so callers always go through the front-end
// functions below and never care which one runs.

namespace penboot::kernels {

// sum_i x[i] * y[i]
double dot(const double* x, const double* y, std::size_t n);

// sum_i x[i]
double sum(const double* x, std::size_t n);

// sum_i x[i]^2
double sum_sq(const double* x, std::size_t n);

// y[i] += a * x[i]
void axpy(double a, const double* x, double* y, std::size_t n);

// Name of the selected backend, "avx2" or "scalar".
const char* active_backend();

// The raw variants are exposed so the tests can compare them directly.
namespace detail {

double dot_scalar(const double* x, const double* y, std::size_t n);
double sum_scalar(const double* x, std::size_t n);
double sum_sq_scalar(const double* x, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);

#if defined(__x86_64__) || defined(_M_X64)
double dot_avx2(const double* x, const double* y, std::size_t n);
double sum_avx2(const double* x, std::size_t n);
double sum_sq_avx2(const double* x, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
#endif

bool have_avx2();

} // namespace detail

} // namespace penboot::kernels
