#pragma once

#include <complex>

#include <Eigen/Dense>

namespace pmllab {

using cplx = std::complex<double>;
using Matrix2C = Eigen::Matrix2cd;
using Spinor = Eigen::Vector2cd;
using Vec3 = Eigen::Vector3d;
using Vec3C = Eigen::Vector3cd;

inline constexpr cplx kI{0.0, 1.0};

struct PauliMatrices {
  Matrix2C a1;
  Matrix2C a2;
  Matrix2C a3;
  const Matrix2C& operator[](int j) const { return j == 0 ? a1 : (j == 1 ? a2 : a3); }
};

enum class Sign { plus, minus };

/// A1 = diag(1,-1), A2 = [[0,1],[1,0]], A3 = [[0,i],[-i,0]].
const PauliMatrices& pauli_matrices();

/// A(xi) = A1 xi1 + A2 xi2 + A3 xi3. Defined for every complex xi.
Matrix2C symbol(const Vec3C& xi);
inline Matrix2C symbol(const Vec3& xi) { return symbol(Vec3C(xi.cast<cplx>())); }

/// Bilinear (not Hermitian) sum xi . eta = sum_j xi_j eta_j.
inline cplx bilinear_dot(const Vec3C& xi, const Vec3C& eta) {
  return xi(0) * eta(0) + xi(1) * eta(1) + xi(2) * eta(2);
}

cplx det_L(cplx tau, const Vec3C& xi);

/// True when |Im xi| < |Re xi|; the set where the eigenvalues and the
/// spectral projections continue holomorphically from real directions.
bool in_holomorphy_domain(const Vec3C& xi);

/// Principal square root of sum xi_j^2, with the holomorphy-domain check.
/// Throws DomainError outside the domain (this includes the null cone Z).
cplx principal_root(const Vec3C& xi);

struct EigenPair {
  cplx plus;
  cplx minus;
};
EigenPair eigenvalues(const Vec3C& xi);

Matrix2C projector(Sign sign, const Vec3C& xi);
inline Matrix2C projector(Sign sign, const Vec3& xi) { return projector(sign, Vec3C(xi.cast<cplx>())); }

/// Q(xi) = (-2 lambda+)^{-1} pi^-(xi): Q (A - lambda+) = I - pi^+, Q pi^+ = 0.
Matrix2C partial_inverse(const Vec3C& xi);

/// Derivative at s = 0 of s -> pi^+(xi + s eta) for a real unit xi:
/// -pi^+ A(eta) Q - Q A(eta) pi^+.
Matrix2C projector_derivative(const Vec3& xi, const Vec3& eta);

/// Spectral (operator 2-) norm of a 2x2 complex matrix.
double op_norm(const Matrix2C& m);

/// max |a_ij - b_ij| <= rel_tol * max(1, max|a_ij|, max|b_ij|).
bool approx_equal(const Matrix2C& a, const Matrix2C& b, double rel_tol = 1e-10);

}  // namespace pmllab
