#include <atomic>
#include <cstdlib>
#include <cstring>

#include "sparsevar/kernels.hpp"

namespace sparsevar::kernels {

#ifndef SPARSEVAR_HAVE_AVX2
// Unreachable stubs so the dispatch table links on builds without AVX2.
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n) { return scalar::dot(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { scalar::axpy(alpha, x, y, n); }
double sum_squares(const double* x, std::size_t n) { return scalar::sum_squares(x, n); }
double sum_abs_diff(const double* a, const double* b, std::size_t n) { return scalar::sum_abs_diff(a, b, n); }
}  // namespace avx2
#endif

namespace {

struct Table {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  double (*sum_squares)(const double*, std::size_t);
  double (*sum_abs_diff)(const double*, const double*, std::size_t);
};

constexpr Table kScalar{scalar::dot, scalar::axpy, scalar::sum_squares, scalar::sum_abs_diff};
constexpr Table kAvx2{avx2::dot, avx2::axpy, avx2::sum_squares, avx2::sum_abs_diff};

bool cpu_has_avx2() {
#if defined(SPARSEVAR_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("SPARSEVAR_SIMD"); env && std::strcmp(env, "scalar") == 0) return Isa::scalar;
  return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<const Table*>& active_table() {
  static std::atomic<const Table*> table{initial_isa() == Isa::avx2 ? &kAvx2 : &kScalar};
  return table;
}

}  // namespace

bool avx2_available() {
  static const bool available = cpu_has_avx2();
  return available;
}

Isa active_isa() { return active_table().load() == &kAvx2 ? Isa::avx2 : Isa::scalar; }

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

void set_isa(Isa isa) { active_table().store(isa == Isa::avx2 && avx2_available() ? &kAvx2 : &kScalar); }

double dot(std::span<const double> a, std::span<const double> b) {
  return active_table().load(std::memory_order_relaxed)->dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active_table().load(std::memory_order_relaxed)->axpy(alpha, x.data(), y.data(), x.size());
}

double sum_squares(std::span<const double> x) {
  return active_table().load(std::memory_order_relaxed)->sum_squares(x.data(), x.size());
}

double sum_abs_diff(std::span<const double> a, std::span<const double> b) {
  return active_table().load(std::memory_order_relaxed)->sum_abs_diff(a.data(), b.data(), a.size());
}

}  // namespace sparsevar::kernels
