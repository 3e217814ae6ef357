#pragma once

// Dense vector kernels used in the solver inner loops (residual updates and
// gradient dot products). Each kernel has a portable scalar reference and,
// on x86-64 builds, an AVX2/FMA variant. The variant is picked once at
// startup from the CPU features; SPARSEVAR_SIMD=scalar forces the reference.
//
// The AVX2 variants reassociate sums, so results agree with the scalar
// kernels to rounding error, not bitwise. A given variant is deterministic.

#include <cstddef>
#include <span>
#include <string_view>

namespace sparsevar::kernels {

enum class Isa { scalar, avx2 };

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
double sum_abs_diff(const double* a, const double* b, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double sum_squares(const double* x, std::size_t n);
double sum_abs_diff(const double* a, const double* b, std::size_t n);
}  // namespace avx2

// True when the AVX2 variants were compiled in and the CPU supports them.
bool avx2_available();

Isa active_isa();
std::string_view isa_name(Isa isa);

// Switches the dispatch target (tests use this to compare variants).
// Requesting avx2 on a machine without it leaves the scalar kernels active.
void set_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double sum_squares(std::span<const double> x);
double sum_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace sparsevar::kernels
