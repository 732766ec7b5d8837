#pragma once

#include <array>
#include <vector>

#include "pmllab/pauli.hpp"

namespace pmllab {

/// The box Q = {|x_j| < L_j/2} together with the inner fraction l of the
/// region l*Q where absorption vanishes and sources live.
class BoxDomain {
 public:
  BoxDomain(const Vec3& half_lengths, double inner_fraction);

  const Vec3& half_lengths() const { return half_; }
  double half_length(int axis) const { return half_(axis); }
  double inner_fraction() const { return inner_fraction_; }
  double inner_half_length(int axis) const { return inner_fraction_ * half_(axis); }

  bool contains(const Vec3& x) const;        // closed box
  bool in_inner_box(const Vec3& x) const;    // closed l*Q
  double surface_area() const;

 private:
  Vec3 half_;
  double inner_fraction_;
};

/// Outward unit normal of face G_k, k = 1..6: faces 1-3 carry -e_k, faces
/// 4-6 carry +e_{k-3}. Throws std::out_of_range otherwise.
Vec3 face_normal(int k);
/// Axis (0-based) normal to face k.
int face_axis(int k);

/// Euclidean distance from x to the singular set (edges and corners) of Q.
double singular_distance(const BoxDomain& box, const Vec3& x);

enum class PatchKind { face, edge, corner };

/// Which smooth piece of the rounded box a boundary point lies on.
///   face:   face index 1..6
///   edge:   `axis` is the edge direction, `signs` holds +-1 for the two
///           other axes (0 for the edge axis)
///   corner: `signs` holds +-1 per axis
struct Patch {
  PatchKind kind = PatchKind::face;
  int face = 0;
  int axis = -1;
  std::array<int, 3> signs{0, 0, 0};
};

struct BoundaryPoint {
  Vec3 x;
  Patch patch;
  Vec3 normal;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double mean_curvature = 0.0;
  // Unit principal directions matching kappa1, kappa2.
  Vec3 dir1;
  Vec3 dir2;
};

/// Minkowski rounding of Q: the box shrunk by r = delta/2 on every side,
/// dilated by a ball of radius r. Faces coincide with those of Q at
/// distance > delta/2 from the singular set.
class RoundedBox {
 public:
  RoundedBox(BoxDomain parent, double delta);

  const BoxDomain& parent() const { return parent_; }
  double delta() const { return delta_; }
  double radius() const { return 0.5 * delta_; }
  const Vec3& shrunk_half_lengths() const { return shrunk_; }

  /// Signed distance to the boundary (negative inside).
  double signed_distance(const Vec3& x) const;
  bool contains(const Vec3& x, double tol = 1e-12) const { return signed_distance(x) <= tol; }
  double surface_area() const;

  /// Outward normal extended to a neighbourhood so that it is constant on
  /// normal lines: the gradient of the distance to the shrunk box.
  Vec3 extended_normal(const Vec3& x) const;

 private:
  BoxDomain parent_;
  double delta_;
  Vec3 shrunk_;
};

/// Closest point on the rounded boundary with exact normal and curvatures.
/// x must lie within r/2 of the boundary, otherwise GeometryError.
BoundaryPoint rounded_box_point(const RoundedBox& q, const Vec3& x);

/// Smooth parametrisation alpha -> x(alpha) of one patch of the rounded box.
/// Face: alpha = the two tangential coordinates (cyclic order after the
/// normal axis). Edge: alpha = (coordinate along the edge, angle in
/// [0, pi/2]). Corner: alpha = (polar angle, azimuth) of the sphere octant.
/// The formulas continue analytically past the patch limits so finite
/// differences straddling a seam stay well defined.
class SurfaceChart {
 public:
  SurfaceChart(const RoundedBox& q, const Patch& patch);

  Vec3 point(const Eigen::Vector2d& alpha) const;
  /// Columns are dx/dalpha_1, dx/dalpha_2.
  Eigen::Matrix<double, 3, 2> tangents(const Eigen::Vector2d& alpha) const;
  Eigen::Vector2d coordinates(const Vec3& x) const;
  /// Length per unit of each coordinate (1 for lengths, r for angles);
  /// finite-difference steps in alpha are h divided by this.
  Eigen::Vector2d length_scale() const;
  const Patch& patch() const { return patch_; }

 private:
  Patch patch_;
  Vec3 shrunk_;
  double r_;
  int a_ = 0;  // normal axis (face) or edge axis
  int b_ = 1;
  int c_ = 2;
};

struct WeightedBoundaryPoint {
  BoundaryPoint point;
  double weight;
};

/// Per-patch tensor Gauss rules (faces, cylinder strips, sphere octants);
/// nodes never sit on seams. `density` is nodes per unit area.
std::vector<WeightedBoundaryPoint> sample_boundary(const RoundedBox& q, double density);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

}  // namespace pmllab
