#include "pmllab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/legendre.hpp>

#include "pmllab/errors.hpp"

namespace pmllab {

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 unit(int axis) {
  Vec3 e = Vec3::Zero();
  e(axis) = 1.0;
  return e;
}

int face_index(int axis, int sign) { return sign < 0 ? axis + 1 : axis + 4; }

int sgn(double v) { return v < 0.0 ? -1 : 1; }

}  // namespace

BoxDomain::BoxDomain(const Vec3& half_lengths, double inner_fraction)
    : half_(half_lengths), inner_fraction_(inner_fraction) {
  if (!(half_.minCoeff() > 0.0) || !half_.allFinite()) {
    throw GeometryError("box half-lengths must be positive");
  }
  if (!(inner_fraction > 0.0 && inner_fraction < 1.0)) {
    throw GeometryError("inner fraction must lie in (0,1), got " + std::to_string(inner_fraction));
  }
}

bool BoxDomain::contains(const Vec3& x) const {
  return (x.cwiseAbs().array() <= half_.array()).all();
}

bool BoxDomain::in_inner_box(const Vec3& x) const {
  return (x.cwiseAbs().array() <= inner_fraction_ * half_.array()).all();
}

double BoxDomain::surface_area() const {
  return 8.0 * (half_(0) * half_(1) + half_(1) * half_(2) + half_(2) * half_(0));
}

Vec3 face_normal(int k) {
  if (k < 1 || k > 6) throw std::out_of_range("face index must be 1..6, got " + std::to_string(k));
  return k <= 3 ? Vec3(-unit(k - 1)) : unit(k - 4);
}

int face_axis(int k) {
  if (k < 1 || k > 6) throw std::out_of_range("face index must be 1..6, got " + std::to_string(k));
  return (k - 1) % 3;
}

double singular_distance(const BoxDomain& box, const Vec3& x) {
  const Vec3& h = box.half_lengths();
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    const double along = std::max(std::abs(x(a)) - h(a), 0.0);
    for (int sb : {-1, 1}) {
      for (int sc : {-1, 1}) {
        const double db = x(b) - sb * h(b);
        const double dc = x(c) - sc * h(c);
        best = std::min(best, std::sqrt(db * db + dc * dc + along * along));
      }
    }
  }
  return best;
}

RoundedBox::RoundedBox(BoxDomain parent, double delta) : parent_(std::move(parent)), delta_(delta) {
  const double r = 0.5 * delta;
  if (!(delta > 0.0)) throw GeometryError("smoothing parameter must be positive");
  shrunk_ = parent_.half_lengths().array() - r;
  if (!(shrunk_.minCoeff() > 0.0)) {
    throw GeometryError("smoothing parameter " + std::to_string(delta) +
                        " too large for the box");
  }
}

double RoundedBox::signed_distance(const Vec3& x) const {
  const Vec3 q = x.cwiseAbs() - shrunk_;
  const double outside = q.cwiseMax(0.0).norm();
  const double inside = std::min(q.maxCoeff(), 0.0);
  return outside + inside - radius();
}

double RoundedBox::surface_area() const {
  const Vec3& s = shrunk_;
  const double r = radius();
  const double faces = 8.0 * (s(0) * s(1) + s(1) * s(2) + s(2) * s(0));
  const double edges = 4.0 * 2.0 * (s(0) + s(1) + s(2)) * (0.5 * kPi * r);
  const double corners = 4.0 * kPi * r * r;
  return faces + edges + corners;
}

Vec3 RoundedBox::extended_normal(const Vec3& x) const {
  const Vec3 y = x.cwiseMax(-shrunk_).cwiseMin(shrunk_);
  const Vec3 d = x - y;
  const double n = d.norm();
  if (n > 0.0) return d / n;
  int axis = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 3; ++j) {
    const double g = shrunk_(j) - std::abs(x(j));
    if (g < gap) {
      gap = g;
      axis = j;
    }
  }
  return sgn(x(axis)) * unit(axis);
}

BoundaryPoint rounded_box_point(const RoundedBox& q, const Vec3& x) {
  const double r = q.radius();
  const double sd = q.signed_distance(x);
  if (std::abs(sd) > 0.5 * r) {
    throw GeometryError("point at distance " + std::to_string(std::abs(sd)) +
                        " from the rounded boundary, limit " + std::to_string(0.5 * r));
  }
  const Vec3& s = q.shrunk_half_lengths();
  BoundaryPoint bp;
  bp.normal = q.extended_normal(x);
  const Vec3 y = x.cwiseMax(-s).cwiseMin(s);
  bp.x = y + r * bp.normal;

  int clamped = 0;
  for (int j = 0; j < 3; ++j) {
    if (std::abs(x(j)) > s(j)) ++clamped;
  }
  if (clamped <= 1) {
    int axis = 0;
    for (int j = 0; j < 3; ++j) {
      if (std::abs(bp.normal(j)) > 0.5) axis = j;
    }
    const int sign = sgn(bp.normal(axis));
    bp.normal = sign * unit(axis);
    bp.x = y;
    bp.x(axis) = sign * (s(axis) + r);
    bp.patch.kind = PatchKind::face;
    bp.patch.face = face_index(axis, sign);
    bp.dir1 = unit((axis + 1) % 3);
    bp.dir2 = unit((axis + 2) % 3);
  } else if (clamped == 2) {
    int axis = 0;
    for (int j = 0; j < 3; ++j) {
      if (std::abs(x(j)) <= s(j)) axis = j;
    }
    bp.patch.kind = PatchKind::edge;
    bp.patch.axis = axis;
    for (int j = 0; j < 3; ++j) bp.patch.signs[j] = j == axis ? 0 : sgn(x(j));
    bp.kappa1 = 1.0 / r;
    bp.dir1 = unit(axis).cross(bp.normal).normalized();
    bp.dir2 = unit(axis);
  } else {
    bp.patch.kind = PatchKind::corner;
    for (int j = 0; j < 3; ++j) bp.patch.signs[j] = sgn(x(j));
    bp.kappa1 = 1.0 / r;
    bp.kappa2 = 1.0 / r;
    const Vec3 seed = std::abs(bp.normal(0)) < 0.9 ? unit(0) : unit(1);
    bp.dir1 = (seed - seed.dot(bp.normal) * bp.normal).normalized();
    bp.dir2 = bp.normal.cross(bp.dir1);
  }
  bp.mean_curvature = 0.5 * (bp.kappa1 + bp.kappa2);
  return bp;
}

SurfaceChart::SurfaceChart(const RoundedBox& q, const Patch& patch)
    : patch_(patch), shrunk_(q.shrunk_half_lengths()), r_(q.radius()) {
  switch (patch.kind) {
    case PatchKind::face:
      a_ = face_axis(patch.face);
      break;
    case PatchKind::edge:
      if (patch.axis < 0 || patch.axis > 2) throw GeometryError("edge patch without axis");
      a_ = patch.axis;
      break;
    case PatchKind::corner:
      a_ = 0;
      break;
  }
  b_ = (a_ + 1) % 3;
  c_ = (a_ + 2) % 3;
}

Vec3 SurfaceChart::point(const Eigen::Vector2d& alpha) const {
  Vec3 x;
  switch (patch_.kind) {
    case PatchKind::face: {
      const double s = patch_.face <= 3 ? -1.0 : 1.0;
      x(a_) = s * (shrunk_(a_) + r_);
      x(b_) = alpha(0);
      x(c_) = alpha(1);
      break;
    }
    case PatchKind::edge:
      x(a_) = alpha(0);
      x(b_) = patch_.signs[b_] * (shrunk_(b_) + r_ * std::cos(alpha(1)));
      x(c_) = patch_.signs[c_] * (shrunk_(c_) + r_ * std::sin(alpha(1)));
      break;
    case PatchKind::corner: {
      const double phi = alpha(0);
      const double th = alpha(1);
      const Vec3 n(std::sin(phi) * std::cos(th), std::sin(phi) * std::sin(th), std::cos(phi));
      for (int j = 0; j < 3; ++j) x(j) = patch_.signs[j] * (shrunk_(j) + r_ * n(j));
      break;
    }
  }
  return x;
}

Eigen::Matrix<double, 3, 2> SurfaceChart::tangents(const Eigen::Vector2d& alpha) const {
  Eigen::Matrix<double, 3, 2> t = Eigen::Matrix<double, 3, 2>::Zero();
  switch (patch_.kind) {
    case PatchKind::face:
      t(b_, 0) = 1.0;
      t(c_, 1) = 1.0;
      break;
    case PatchKind::edge:
      t(a_, 0) = 1.0;
      t(b_, 1) = -patch_.signs[b_] * r_ * std::sin(alpha(1));
      t(c_, 1) = patch_.signs[c_] * r_ * std::cos(alpha(1));
      break;
    case PatchKind::corner: {
      const double phi = alpha(0);
      const double th = alpha(1);
      const Vec3 dphi(std::cos(phi) * std::cos(th), std::cos(phi) * std::sin(th), -std::sin(phi));
      const Vec3 dth(-std::sin(phi) * std::sin(th), std::sin(phi) * std::cos(th), 0.0);
      for (int j = 0; j < 3; ++j) {
        t(j, 0) = patch_.signs[j] * r_ * dphi(j);
        t(j, 1) = patch_.signs[j] * r_ * dth(j);
      }
      break;
    }
  }
  return t;
}

Eigen::Vector2d SurfaceChart::coordinates(const Vec3& x) const {
  switch (patch_.kind) {
    case PatchKind::face:
      return {x(b_), x(c_)};
    case PatchKind::edge: {
      const double cb = (patch_.signs[b_] * x(b_) - shrunk_(b_)) / r_;
      const double sc = (patch_.signs[c_] * x(c_) - shrunk_(c_)) / r_;
      return {x(a_), std::atan2(sc, cb)};
    }
    case PatchKind::corner: {
      Vec3 n;
      for (int j = 0; j < 3; ++j) n(j) = (patch_.signs[j] * x(j) - shrunk_(j)) / r_;
      return {std::acos(std::clamp(n(2) / n.norm(), -1.0, 1.0)), std::atan2(n(1), n(0))};
    }
  }
  return {0.0, 0.0};
}

Eigen::Vector2d SurfaceChart::length_scale() const {
  switch (patch_.kind) {
    case PatchKind::face:
      return {1.0, 1.0};
    case PatchKind::edge:
      return {1.0, r_};
    case PatchKind::corner:
      return {r_, r_};
  }
  return {1.0, 1.0};
}

GaussRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss rule needs at least one node");
  GaussRule rule;
  const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(n);
  // boost returns the non-negative zeros in ascending order
  for (double z : zeros) {
    const double dp = boost::math::legendre_p_prime(n, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    if (z == 0.0) {
      rule.nodes.push_back(0.0);
      rule.weights.push_back(w);
    } else {
      rule.nodes.push_back(-z);
      rule.weights.push_back(w);
      rule.nodes.push_back(z);
      rule.weights.push_back(w);
    }
  }
  std::vector<std::size_t> idx(rule.nodes.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return rule.nodes[i] < rule.nodes[j]; });
  GaussRule sorted;
  for (std::size_t i : idx) {
    sorted.nodes.push_back(rule.nodes[i]);
    sorted.weights.push_back(rule.weights[i]);
  }
  return sorted;
}

std::vector<WeightedBoundaryPoint> sample_boundary(const RoundedBox& q, double density) {
  if (!(density > 0.0)) throw std::invalid_argument("sampling density must be positive");
  const Vec3& s = q.shrunk_half_lengths();
  const double r = q.radius();
  const double per_length = std::sqrt(density);
  auto nodes_for = [&](double extent) {
    return std::max(2, static_cast<int>(std::ceil(extent * per_length)));
  };
  std::vector<WeightedBoundaryPoint> out;

  auto push = [&](const Vec3& x, double w) {
    // Nodes are interior to their patch, so classification is unambiguous.
    out.push_back({rounded_box_point(q, x), w});
  };

  for (int k = 1; k <= 6; ++k) {
    const int a = face_axis(k);
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    const double sign = k <= 3 ? -1.0 : 1.0;
    const GaussRule gb = gauss_legendre(nodes_for(2.0 * s(b)));
    const GaussRule gc = gauss_legendre(nodes_for(2.0 * s(c)));
    for (std::size_t i = 0; i < gb.nodes.size(); ++i) {
      for (std::size_t j = 0; j < gc.nodes.size(); ++j) {
        Vec3 x;
        x(a) = sign * (s(a) + r);
        x(b) = s(b) * gb.nodes[i];
        x(c) = s(c) * gc.nodes[j];
        push(x, s(b) * s(c) * gb.weights[i] * gc.weights[j]);
      }
    }
  }

  const double quarter = 0.5 * kPi;
  const GaussRule garc = gauss_legendre(std::max(4, nodes_for(quarter * r)));
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    const GaussRule gl = gauss_legendre(nodes_for(2.0 * s(a)));
    for (int sb : {-1, 1}) {
      for (int sc : {-1, 1}) {
        for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
          for (std::size_t j = 0; j < garc.nodes.size(); ++j) {
            const double th = 0.5 * quarter * (garc.nodes[j] + 1.0);
            Vec3 x;
            x(a) = s(a) * gl.nodes[i];
            x(b) = sb * (s(b) + r * std::cos(th));
            x(c) = sc * (s(c) + r * std::sin(th));
            push(x, s(a) * gl.weights[i] * r * 0.5 * quarter * garc.weights[j]);
          }
        }
      }
    }
  }

  const GaussRule gang = gauss_legendre(std::max(4, nodes_for(quarter * r)));
  for (int corner = 0; corner < 8; ++corner) {
    const int sx = (corner & 1) ? 1 : -1;
    const int sy = (corner & 2) ? 1 : -1;
    const int sz = (corner & 4) ? 1 : -1;
    for (std::size_t i = 0; i < gang.nodes.size(); ++i) {
      const double phi = 0.5 * quarter * (gang.nodes[i] + 1.0);
      for (std::size_t j = 0; j < gang.nodes.size(); ++j) {
        const double th = 0.5 * quarter * (gang.nodes[j] + 1.0);
        const Vec3 n(std::sin(phi) * std::cos(th), std::sin(phi) * std::sin(th), std::cos(phi));
        const Vec3 x(sx * (s(0) + r * n(0)), sy * (s(1) + r * n(1)), sz * (s(2) + r * n(2)));
        const double w = r * r * std::sin(phi) * (0.5 * quarter) * (0.5 * quarter) *
                          gang.weights[i] * gang.weights[j];
        push(x, w);
      }
    }
  }
  return out;
}

}  // namespace pmllab
