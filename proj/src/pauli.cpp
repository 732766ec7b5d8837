#include "pmllab/pauli.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pmllab/errors.hpp"

namespace pmllab {

namespace {

// Points this close (relatively) to |Im xi| = |Re xi| are rejected rather
// than evaluated with a near-singular square root.
constexpr double kHolomorphyMargin = 1e-8;

PauliMatrices make_pauli() {
  PauliMatrices p;
  p.a1 << 1.0, 0.0, 0.0, -1.0;
  p.a2 << 0.0, 1.0, 1.0, 0.0;
  p.a3 << 0.0, kI, -kI, 0.0;
  return p;
}

}  // namespace

const PauliMatrices& pauli_matrices() {
  static const PauliMatrices p = make_pauli();
  return p;
}

Matrix2C symbol(const Vec3C& xi) {
  Matrix2C m;
  m << xi(0), xi(1) + kI * xi(2), xi(1) - kI * xi(2), -xi(0);
  return m;
}

cplx det_L(cplx tau, const Vec3C& xi) {
  return tau * tau - bilinear_dot(xi, xi);
}

bool in_holomorphy_domain(const Vec3C& xi) {
  const double re = xi.real().norm();
  const double im = xi.imag().norm();
  return re > 0.0 && im < (1.0 - kHolomorphyMargin) * re;
}

cplx principal_root(const Vec3C& xi) {
  if (!in_holomorphy_domain(xi)) {
    throw DomainError("direction outside |Im xi| < |Re xi|: |Re xi| = " +
                      std::to_string(xi.real().norm()) +
                      ", |Im xi| = " + std::to_string(xi.imag().norm()));
  }
  return std::sqrt(bilinear_dot(xi, xi));
}

EigenPair eigenvalues(const Vec3C& xi) {
  const cplx root = principal_root(xi);
  return {root, -root};
}

Matrix2C projector(Sign sign, const Vec3C& xi) {
  const cplx root = principal_root(xi);
  const cplx s = sign == Sign::plus ? root : -root;
  return (symbol(xi) + s * Matrix2C::Identity()) / (2.0 * s);
}

Matrix2C partial_inverse(const Vec3C& xi) {
  const cplx root = principal_root(xi);
  return projector(Sign::minus, xi) / (-2.0 * root);
}

Matrix2C projector_derivative(const Vec3& xi, const Vec3& eta) {
  if (std::abs(xi.norm() - 1.0) > 1e-12) {
    throw DomainError("projector_derivative needs a real unit direction, |xi| = " +
                      std::to_string(xi.norm()));
  }
  const Vec3C z = xi.cast<cplx>();
  const Matrix2C pp = projector(Sign::plus, z);
  const Matrix2C q = partial_inverse(z);
  const Matrix2C da = symbol(eta);
  return -pp * da * q - q * da * pp;
}

double op_norm(const Matrix2C& m) {
  Eigen::JacobiSVD<Matrix2C> svd(m);
  return svd.singularValues()(0);
}

bool approx_equal(const Matrix2C& a, const Matrix2C& b, double rel_tol) {
  const double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
  return (a - b).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

}  // namespace pmllab
