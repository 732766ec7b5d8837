#include "pmllab/kernels/kernels.hpp"

namespace pmllab::kernels {

namespace {

void sum3(const double* a, const double* b, const double* c, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i] + c[i];
}

void stencil5(const double* const rows[5], const double w[5], double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
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
  for (std::size_t i = 0; i < n; ++i) {
    const double s = sigma[i];
    const std::size_t r = 2 * i;
    const std::size_t m = r + 1;
    double a0r, a0i, a1r, a1i;  // A_axis (d0, d1)
    switch (axis) {
      case 0:
        a0r = d0[r];
        a0i = d0[m];
        a1r = -d1[r];
        a1i = -d1[m];
        break;
      case 1:
        a0r = d1[r];
        a0i = d1[m];
        a1r = d0[r];
        a1i = d0[m];
        break;
      default:  // (i d1, -i d0)
        a0r = -d1[m];
        a0i = d1[r];
        a1r = d0[m];
        a1i = -d0[r];
        break;
    }
    o0[r] = -(s * u0[r] + a0r);
    o0[m] = -(s * u0[m] + a0i);
    o1[r] = -(s * u1[r] + a1r);
    o1[m] = -(s * u1[m] + a1i);
  }
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = y[i] + a * x[i];
}

void lincomb(const double* x, double a, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * y[i];
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{sum3, stencil5, pauli_decay, axpy, lincomb};
  return t;
}

}  // namespace pmllab::kernels
