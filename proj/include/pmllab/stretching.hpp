#pragma once

#include <array>
#include <vector>

#include "pmllab/geometry.hpp"
#include "pmllab/pauli.hpp"

namespace pmllab {

enum class ProfileKind { polynomial, smooth };

/// One-dimensional absorption sigma(s), symmetric in s, zero on [-a, a].
/// polynomial: sigma0 ((|s|-a)/(b-a))^m for |s| > a (continued past b).
/// smooth:     sigma0 S((|s|-a)/(b-a)) with a C-infinity step S, equal to
///             sigma0 for |s| >= b.
class AbsorptionProfile {
 public:
  AbsorptionProfile() = default;  // sigma == 0
  AbsorptionProfile(ProfileKind kind, double amplitude, double a, double b, int order = 3);

  static AbsorptionProfile none() { return {}; }

  double operator()(double s) const;
  double derivative(double s) const;
  /// Integral of sigma over [0, x] (adaptive Gauss-Kronrod, split at +-a).
  double integral(double x) const;

  ProfileKind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  double start() const { return a_; }
  double end() const { return b_; }
  int order() const { return order_; }
  bool is_zero() const { return amplitude_ == 0.0; }

 private:
  ProfileKind kind_ = ProfileKind::polynomial;
  double amplitude_ = 0.0;
  double a_ = 0.0;
  double b_ = 1.0;
  int order_ = 3;
};

using Profiles = std::array<AbsorptionProfile, 3>;

/// Profiles for a box with layers between l*L_j/2 and L_j/2 on every axis.
Profiles layer_profiles(const BoxDomain& box, ProfileKind kind, double amplitude, int order = 3);

struct PhiBeta {
  cplx phi;
  cplx beta;
};

/// Normal and mean curvature of the stretched surface X(tau, boundary of
/// the rounded box) at the image of a boundary point, continued in tau.
struct StretchedFrame {
  Vec3C normal;
  cplx mean_curvature;
  Eigen::Matrix2cd weingarten;
};

/// tau together with the three absorption profiles; every tau- and
/// sigma-dependent coefficient is evaluated here.
class StretchContext {
 public:
  StretchContext(cplx tau, Profiles profiles);

  cplx tau() const { return tau_; }
  const Profiles& profiles() const { return profiles_; }
  StretchContext with_tau(cplx tau) const { return {tau, profiles_}; }

  double sigma(int axis, double s) const { return profiles_[axis](s); }
  Vec3 sigma_at(const Vec3& x) const;

  /// X_j = x_j + (1/tau) int_0^{x_j} sigma_j.
  cplx stretch_map(int axis, double s) const;
  Vec3C stretch_point(const Vec3& x) const;

  /// tau / (tau + sigma_j(x_j)); the factor in front of d_j.
  Vec3C derivative_factors(const Vec3& x) const;
  Vec3C nu_tilde(const Vec3& x, const Vec3& nu) const;
  cplx Pi(const Vec3& x) const;
  /// c_j = (tau+sigma_{j+1})(tau+sigma_{j+2}) / (tau (tau+sigma_j)).
  Vec3C p_coefficients(const Vec3& x) const;

  /// Throws ContinuationError when nu_tilde leaves |Im| < |Re|.
  StretchedFrame stretched_frame(const RoundedBox& q, const BoundaryPoint& bp) const;
  PhiBeta phi_beta(const RoundedBox& q, const BoundaryPoint& bp) const;
  /// Coefficients of d_1, d_2, d_3 in V.
  Vec3C V_coefficients(const BoundaryPoint& bp) const;
  Matrix2C m_matrix(const BoundaryPoint& bp) const;

 private:
  cplx tau_;
  Profiles profiles_;
};

/// nu_tilde checked against the holomorphy domain; ContinuationError if not.
Vec3C checked_nu_tilde(const StretchContext& ctx, const Vec3& x, const Vec3& nu);

/// Smallest |tau| along the ray arg(tau) = angle beyond which the frame,
/// Phi and the projections of nu_tilde are defined at every sample point.
/// Bisection on [lo, hi]; returns hi when even hi fails.
double continuation_threshold(const Profiles& profiles, const RoundedBox& q,
                              const std::vector<BoundaryPoint>& samples, double angle,
                              double lo = 1e-3, double hi = 1e6);

}  // namespace pmllab
