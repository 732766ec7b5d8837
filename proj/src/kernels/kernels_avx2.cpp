#include <immintrin.h>

#include "pmllab/kernels/kernels.hpp"

namespace pmllab::kernels {

namespace {

void sum3(const double* a, const double* b, const double* c, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d s = _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(s, _mm256_loadu_pd(c + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i] + c[i];
}

void stencil5(const double* const rows[5], const double w[5], double* out, std::size_t n) {
  const __m256d w0 = _mm256_set1_pd(w[0]);
  const __m256d w1 = _mm256_set1_pd(w[1]);
  const __m256d w2 = _mm256_set1_pd(w[2]);
  const __m256d w3 = _mm256_set1_pd(w[3]);
  const __m256d w4 = _mm256_set1_pd(w[4]);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_mul_pd(w0, _mm256_loadu_pd(rows[0] + i));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(w1, _mm256_loadu_pd(rows[1] + i)));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(w2, _mm256_loadu_pd(rows[2] + i)));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(w3, _mm256_loadu_pd(rows[3] + i)));
    acc = _mm256_add_pd(acc, _mm256_mul_pd(w4, _mm256_loadu_pd(rows[4] + i)));
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < n; ++i) {
    double acc = w[0] * rows[0][i];
    acc = acc + w[1] * rows[1][i];
    acc = acc + w[2] * rows[2][i];
    acc = acc + w[3] * rows[3][i];
    acc = acc + w[4] * rows[4][i];
    out[i] = acc;
  }
}

void pauli_decay(int axis, const double* sigma, const double* u0, const double* u1, const double* d0,
                 const double* d1, double* o0, double* o1, std::size_t n) {
  const __m256d sign_neg = _mm256_set1_pd(-0.0);
  // multiplying by +-1 is exact, so the rotation by +-i matches the scalar code
  const __m256d rot_plus_i = _mm256_setr_pd(-1.0, 1.0, -1.0, 1.0);
  const __m256d rot_minus_i = _mm256_setr_pd(1.0, -1.0, 1.0, -1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m128d s2 = _mm_loadu_pd(sigma + i);
    const __m256d s = _mm256_permute4x64_pd(_mm256_castpd128_pd256(s2), 0x50);
    const __m256d vu0 = _mm256_loadu_pd(u0 + 2 * i);
    const __m256d vu1 = _mm256_loadu_pd(u1 + 2 * i);
    const __m256d vd0 = _mm256_loadu_pd(d0 + 2 * i);
    const __m256d vd1 = _mm256_loadu_pd(d1 + 2 * i);
    __m256d a0, a1;
    switch (axis) {
      case 0:
        a0 = vd0;
        a1 = _mm256_xor_pd(vd1, sign_neg);
        break;
      case 1:
        a0 = vd1;
        a1 = vd0;
        break;
      default:
        a0 = _mm256_mul_pd(_mm256_permute_pd(vd1, 0x5), rot_plus_i);
        a1 = _mm256_mul_pd(_mm256_permute_pd(vd0, 0x5), rot_minus_i);
        break;
    }
    const __m256d r0 = _mm256_add_pd(_mm256_mul_pd(s, vu0), a0);
    const __m256d r1 = _mm256_add_pd(_mm256_mul_pd(s, vu1), a1);
    _mm256_storeu_pd(o0 + 2 * i, _mm256_xor_pd(r0, sign_neg));
    _mm256_storeu_pd(o1 + 2 * i, _mm256_xor_pd(r1, sign_neg));
  }
  if (i < n) {
    scalar_table().pauli_decay(axis, sigma + i, u0 + 2 * i, u1 + 2 * i, d0 + 2 * i, d1 + 2 * i, o0 + 2 * i,
                               o1 + 2 * i, n - i);
  }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; ++i) y[i] = y[i] + a * x[i];
}

void lincomb(const double* x, double a, const double* y, double* out, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_add_pd(_mm256_loadu_pd(x + i), _mm256_mul_pd(va, _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(out + i, r);
  }
  for (; i < n; ++i) out[i] = x[i] + a * y[i];
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{sum3, stencil5, pauli_decay, axpy, lincomb};
  return t;
}

}  // namespace pmllab::kernels
