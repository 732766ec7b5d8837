#pragma once

#include <cstddef>

// Data-parallel inner loops of the time-domain solver. Fields are arrays of
// interleaved complex doubles (re, im, re, im, ...). Every variant evaluates
// the same operations in the same order, so results are bit-identical
// across instruction sets.

namespace pmllab::kernels {

enum class Isa { scalar, avx2 };

struct KernelTable {
  // out[i] = a[i] + b[i] + c[i], n doubles
  void (*sum3)(const double* a, const double* b, const double* c, double* out, std::size_t n);
  // out[i] = sum_k w[k] * rows[k][i], accumulated left to right, n doubles
  void (*stencil5)(const double* const rows[5], const double w[5], double* out, std::size_t n);
  // (o0, o1) = -(sigma (u0, u1) + A_axis (d0, d1)) over n complex values;
  // sigma holds one real per complex value
  void (*pauli_decay)(int axis, const double* sigma, const double* u0, const double* u1, const double* d0,
                      const double* d1, double* o0, double* o1, std::size_t n);
  // y[i] += a * x[i], n doubles
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out[i] = x[i] + a * y[i], n doubles
  void (*lincomb)(const double* x, double a, const double* y, double* out, std::size_t n);
};

const KernelTable& scalar_table();
#ifdef PMLLAB_HAVE_AVX2
const KernelTable& avx2_table();
#endif

bool avx2_supported();
/// Table for the requested ISA; falls back to scalar when unavailable.
const KernelTable& table(Isa isa);
/// Best ISA on this machine unless forced (PMLLAB_FORCE_SCALAR or force_isa).
Isa active_isa();
void force_isa(Isa isa);
const KernelTable& active();
const char* isa_name(Isa isa);

}  // namespace pmllab::kernels
