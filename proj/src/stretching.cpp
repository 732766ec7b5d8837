#include "pmllab/stretching.hpp"

#include <cmath>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "pmllab/errors.hpp"

namespace pmllab {

namespace {

double bump_exp(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double f = bump_exp(t);
  const double g = bump_exp(1.0 - t);
  return f / (f + g);
}

double smooth_step_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double f = bump_exp(t);
  const double g = bump_exp(1.0 - t);
  const double df = f / (t * t);
  const double dg = -g / ((1.0 - t) * (1.0 - t));
  const double den = f + g;
  return (df * den - f * (df + dg)) / (den * den);
}

// d nu / d alpha_i for the real boundary: zero on flat directions, t_i / r
// on curved ones.
Eigen::Matrix<double, 3, 2> normal_derivatives(const SurfaceChart& chart, const RoundedBox& q,
                                               const Eigen::Matrix<double, 3, 2>& t) {
  Eigen::Matrix<double, 3, 2> dn = Eigen::Matrix<double, 3, 2>::Zero();
  const double k = 1.0 / q.radius();
  switch (chart.patch().kind) {
    case PatchKind::face:
      break;
    case PatchKind::edge:
      dn.col(1) = k * t.col(1);
      break;
    case PatchKind::corner:
      dn = k * t;
      break;
  }
  return dn;
}

}  // namespace

AbsorptionProfile::AbsorptionProfile(ProfileKind kind, double amplitude, double a, double b, int order)
    : kind_(kind), amplitude_(amplitude), a_(a), b_(b), order_(order) {
  if (!(amplitude >= 0.0)) throw DomainError("absorption amplitude must be >= 0");
  if (!(a >= 0.0 && b > a)) throw DomainError("absorption interval needs 0 <= a < b");
  if (kind == ProfileKind::polynomial && order < 1) throw DomainError("polynomial order must be >= 1");
}

double AbsorptionProfile::operator()(double s) const {
  if (amplitude_ == 0.0) return 0.0;
  const double t = (std::abs(s) - a_) / (b_ - a_);
  if (t <= 0.0) return 0.0;
  if (kind_ == ProfileKind::polynomial) return amplitude_ * std::pow(t, order_);
  return amplitude_ * smooth_step(t);
}

double AbsorptionProfile::derivative(double s) const {
  if (amplitude_ == 0.0) return 0.0;
  const double w = b_ - a_;
  const double t = (std::abs(s) - a_) / w;
  if (t <= 0.0) return 0.0;
  const double sign = s < 0.0 ? -1.0 : 1.0;
  if (kind_ == ProfileKind::polynomial) {
    return sign * amplitude_ * order_ * std::pow(t, order_ - 1) / w;
  }
  return sign * amplitude_ * smooth_step_derivative(t) / w;
}

double AbsorptionProfile::integral(double x) const {
  if (amplitude_ == 0.0 || std::abs(x) <= a_) return 0.0;
  auto f = [this](double s) { return (*this)(s); };
  using boost::math::quadrature::gauss_kronrod;
  const double top = std::abs(x);
  double value = 0.0;
  if (kind_ == ProfileKind::smooth && top > b_) {
    value = gauss_kronrod<double, 31>::integrate(f, a_, b_, 15, 1e-14) + amplitude_ * (top - b_);
  } else {
    value = gauss_kronrod<double, 31>::integrate(f, a_, top, 15, 1e-14);
  }
  return x < 0.0 ? -value : value;
}

Profiles layer_profiles(const BoxDomain& box, ProfileKind kind, double amplitude, int order) {
  Profiles p;
  for (int j = 0; j < 3; ++j) {
    p[j] = AbsorptionProfile(kind, amplitude, box.inner_half_length(j), box.half_length(j), order);
  }
  return p;
}

StretchContext::StretchContext(cplx tau, Profiles profiles) : tau_(tau), profiles_(std::move(profiles)) {
  if (!(tau.real() > 0.0)) {
    throw DomainError("stretching needs Re tau > 0, got " + std::to_string(tau.real()));
  }
}

Vec3 StretchContext::sigma_at(const Vec3& x) const {
  return {profiles_[0](x(0)), profiles_[1](x(1)), profiles_[2](x(2))};
}

cplx StretchContext::stretch_map(int axis, double s) const {
  return s + profiles_[axis].integral(s) / tau_;
}

Vec3C StretchContext::stretch_point(const Vec3& x) const {
  return {stretch_map(0, x(0)), stretch_map(1, x(1)), stretch_map(2, x(2))};
}

Vec3C StretchContext::derivative_factors(const Vec3& x) const {
  const Vec3 s = sigma_at(x);
  return {tau_ / (tau_ + s(0)), tau_ / (tau_ + s(1)), tau_ / (tau_ + s(2))};
}

Vec3C StretchContext::nu_tilde(const Vec3& x, const Vec3& nu) const {
  return derivative_factors(x).cwiseProduct(nu.cast<cplx>());
}

cplx StretchContext::Pi(const Vec3& x) const {
  const Vec3 s = sigma_at(x);
  return (tau_ + s(0)) * (tau_ + s(1)) * (tau_ + s(2)) / (tau_ * tau_ * tau_);
}

Vec3C StretchContext::p_coefficients(const Vec3& x) const {
  const Vec3 s = sigma_at(x);
  Vec3C c;
  for (int j = 0; j < 3; ++j) {
    c(j) = (tau_ + s((j + 1) % 3)) * (tau_ + s((j + 2) % 3)) / (tau_ * (tau_ + s(j)));
  }
  return c;
}

Vec3C checked_nu_tilde(const StretchContext& ctx, const Vec3& x, const Vec3& nu) {
  const Vec3C nt = ctx.nu_tilde(x, nu);
  if (!in_holomorphy_domain(nt)) {
    throw ContinuationError("stretched normal outside the holomorphy domain at tau = (" +
                            std::to_string(ctx.tau().real()) + ", " +
                            std::to_string(ctx.tau().imag()) + ")");
  }
  return nt;
}

StretchedFrame StretchContext::stretched_frame(const RoundedBox& q, const BoundaryPoint& bp) const {
  const Vec3C nt = checked_nu_tilde(*this, bp.x, bp.normal);
  const cplx s = std::sqrt(bilinear_dot(nt, nt));

  const SurfaceChart chart(q, bp.patch);
  const Eigen::Vector2d alpha = chart.coordinates(bp.x);
  const Eigen::Matrix<double, 3, 2> t = chart.tangents(alpha);
  const Eigen::Matrix<double, 3, 2> dn = normal_derivatives(chart, q, t);

  const Vec3 sig = sigma_at(bp.x);
  Eigen::Matrix<cplx, 3, 2> T;
  Eigen::Matrix<cplx, 3, 2> dnt;  // d nu_tilde / d alpha_i
  for (int j = 0; j < 3; ++j) {
    const cplx f = tau_ / (tau_ + sig(j));
    const cplx df = -tau_ * profiles_[j].derivative(bp.x(j)) / ((tau_ + sig(j)) * (tau_ + sig(j)));
    for (int i = 0; i < 2; ++i) {
      T(j, i) = t(j, i) / f;
      dnt(j, i) = f * dn(j, i) + df * t(j, i) * bp.normal(j);
    }
  }

  StretchedFrame out;
  out.normal = nt / s;
  Eigen::Matrix2cd g;
  Eigen::Matrix2cd b;
  for (int i = 0; i < 2; ++i) {
    const Vec3C dnu = dnt.col(i) / s - nt * (bilinear_dot(nt, dnt.col(i)) / (s * s * s));
    for (int k = 0; k < 2; ++k) {
      g(k, i) = bilinear_dot(T.col(k), T.col(i));
      b(k, i) = bilinear_dot(T.col(k), dnu);
    }
  }
  const cplx det = g.determinant();
  if (std::abs(det) <= 1e-14 * g.cwiseAbs().maxCoeff() * g.cwiseAbs().maxCoeff()) {
    throw ContinuationError("degenerate stretched metric");
  }
  out.weingarten = g.inverse() * b;
  out.mean_curvature = 0.5 * out.weingarten.trace();
  return out;
}

PhiBeta StretchContext::phi_beta(const RoundedBox& q, const BoundaryPoint& bp) const {
  const Vec3C nt = checked_nu_tilde(*this, bp.x, bp.normal);
  const StretchedFrame frame = stretched_frame(q, bp);
  return {Pi(bp.x) * std::sqrt(bilinear_dot(nt, nt)), tau_ + 2.0 * frame.mean_curvature};
}

Vec3C StretchContext::V_coefficients(const BoundaryPoint& bp) const {
  const Vec3C nt = checked_nu_tilde(*this, bp.x, bp.normal);
  const cplx s = std::sqrt(bilinear_dot(nt, nt));
  return nt.cwiseProduct(derivative_factors(bp.x)) / s;
}

Matrix2C StretchContext::m_matrix(const BoundaryPoint& bp) const {
  const Vec3C nt = checked_nu_tilde(*this, bp.x, bp.normal);
  const Matrix2C pp = projector(Sign::plus, nt);
  const Matrix2C pm = projector(Sign::minus, nt);
  return tau_ * pm.transpose() * (pp.conjugate() - pp.transpose());
}

double continuation_threshold(const Profiles& profiles, const RoundedBox& q,
                              const std::vector<BoundaryPoint>& samples, double angle,
                              double lo, double hi) {
  const cplx dir = std::polar(1.0, angle);
  auto ok = [&](double radius) {
    try {
      const StretchContext ctx(radius * dir, profiles);
      for (const BoundaryPoint& bp : samples) {
        const PhiBeta pb = ctx.phi_beta(q, bp);
        if (!std::isfinite(std::abs(pb.phi)) || !std::isfinite(std::abs(pb.beta))) return false;
        (void)ctx.m_matrix(bp);
      }
      return true;
    } catch (const ContinuationError&) {
      return false;
    } catch (const DomainError&) {
      return false;
    }
  };
  if (ok(lo)) return lo;
  if (!ok(hi)) return hi;
  for (int it = 0; it < 60; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (ok(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi / lo < 1.0 + 1e-6) break;
  }
  return hi;
}

}  // namespace pmllab
