#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "pmllab/errors.hpp"
#include "pmllab/geometry.hpp"

using namespace pmllab;

namespace {

constexpr double kPi = std::numbers::pi;

BoxDomain unit_cube() { return BoxDomain(Vec3(0.5, 0.5, 0.5), 0.5); }

// Area of the shrunk box dilated by a ball of radius r (Steiner formula).
double dilated_box_area(const Vec3& full, double r) {
  const Vec3 e = full.array() - 2.0 * r;
  return 2.0 * (e(0) * e(1) + e(1) * e(2) + e(2) * e(0)) + 2.0 * kPi * r * (e(0) + e(1) + e(2)) +
         4.0 * kPi * r * r;
}

}  // namespace

TEST(BoxDomain, RejectsBadParameters) {
  EXPECT_THROW(BoxDomain(Vec3(0.5, -1, 0.5), 0.5), GeometryError);
  EXPECT_THROW(BoxDomain(Vec3(0.5, 0.5, 0.5), 1.0), GeometryError);
  EXPECT_THROW(BoxDomain(Vec3(0.5, 0.5, 0.5), 0.0), GeometryError);
}

TEST(BoxDomain, InnerBox) {
  const BoxDomain b(Vec3(1, 2, 3), 0.5);
  EXPECT_TRUE(b.in_inner_box(Vec3(0.5, 1.0, 1.5)));
  EXPECT_FALSE(b.in_inner_box(Vec3(0.51, 0, 0)));
  EXPECT_TRUE(b.contains(Vec3(1, 2, 3)));
  EXPECT_FALSE(b.contains(Vec3(0, 0, 3.01)));
}

TEST(FaceNormal, Examples) {
  EXPECT_EQ(face_normal(1), Vec3(-1, 0, 0));
  EXPECT_EQ(face_normal(5), Vec3(0, 1, 0));
  Vec3 sum = Vec3::Zero();
  for (int k = 1; k <= 6; ++k) sum += face_normal(k);
  EXPECT_EQ(sum, Vec3::Zero());
  EXPECT_THROW(face_normal(0), std::out_of_range);
  EXPECT_THROW(face_normal(7), std::out_of_range);
}

TEST(SingularDistance, Examples) {
  const BoxDomain b(Vec3(1.0, 1.5, 2.0), 0.5);
  EXPECT_NEAR(singular_distance(b, Vec3(-1.0, 0, 0)), 1.5, 1e-15);
  EXPECT_NEAR(singular_distance(b, Vec3(0, 0, 2.0)), 1.0, 1e-15);
  EXPECT_NEAR(singular_distance(b, Vec3(1.0, -1.5, 2.0)), 0.0, 1e-15);
  EXPECT_NEAR(singular_distance(b, Vec3(1.0, 0.0, 2.0)), 0.0, 1e-15);
  EXPECT_NEAR(singular_distance(b, Vec3(0, 0, 0)), std::hypot(1.0, 1.5), 1e-15);
}

TEST(RoundedBox, CurvatureByPatch) {
  const double delta = 0.2;
  const RoundedBox q(unit_cube(), delta);
  const BoundaryPoint face = rounded_box_point(q, Vec3(0.1, -0.05, 0.5));
  EXPECT_EQ(face.patch.kind, PatchKind::face);
  EXPECT_EQ(face.patch.face, 6);
  EXPECT_EQ(face.mean_curvature, 0.0);

  const double r = delta / 2;
  const double c = 0.5 - r;
  const Vec3 edge_pt(0.0, c + r * std::cos(0.3), c + r * std::sin(0.3));
  const BoundaryPoint edge = rounded_box_point(q, edge_pt);
  EXPECT_EQ(edge.patch.kind, PatchKind::edge);
  EXPECT_EQ(edge.patch.axis, 0);
  EXPECT_NEAR(edge.mean_curvature, 1.0 / delta, 1e-12);
  EXPECT_LE((edge.x - edge_pt).norm(), 1e-14);

  const Vec3 corner_pt = Vec3(c, c, -c) + r * Vec3(1, 1, -1).normalized();
  const BoundaryPoint corner = rounded_box_point(q, corner_pt);
  EXPECT_EQ(corner.patch.kind, PatchKind::corner);
  EXPECT_NEAR(corner.mean_curvature, 2.0 / delta, 1e-12);
  EXPECT_LE((corner.normal - Vec3(1, 1, -1).normalized()).norm(), 1e-14);
}

TEST(RoundedBox, ProjectsNearbyPointsAndRejectsFarOnes) {
  const RoundedBox q(unit_cube(), 0.2);
  const BoundaryPoint p = rounded_box_point(q, Vec3(0.53, 0.1, 0.0));
  EXPECT_NEAR(p.x(0), 0.5, 1e-15);
  EXPECT_NEAR(q.signed_distance(p.x), 0.0, 1e-15);
  EXPECT_THROW(rounded_box_point(q, Vec3(0.0, 0.0, 0.0)), GeometryError);
  EXPECT_THROW(rounded_box_point(q, Vec3(0.8, 0.0, 0.0)), GeometryError);
}

TEST(RoundedBox, RejectsOversizedSmoothing) {
  EXPECT_THROW(RoundedBox(unit_cube(), 1.0), GeometryError);
  EXPECT_THROW(RoundedBox(unit_cube(), 0.0), GeometryError);
}

TEST(SampleBoundary, TotalWeightIsTheSurfaceArea) {
  const RoundedBox q(unit_cube(), 0.2);
  double total = 0.0;
  for (const auto& wp : sample_boundary(q, 400.0)) total += wp.weight;
  const double exact = dilated_box_area(Vec3(1, 1, 1), 0.1);
  EXPECT_NEAR(total, exact, 1e-3 * exact);
  EXPECT_NEAR(q.surface_area(), exact, 1e-12);
}

TEST(SampleBoundary, SmallSmoothingApproachesTheCube) {
  const RoundedBox q(unit_cube(), 1e-4);
  double total = 0.0;
  for (const auto& wp : sample_boundary(q, 100.0)) total += wp.weight;
  EXPECT_NEAR(total, 6.0, 1e-3);
}

TEST(SampleBoundary, CurvaturesTakeThreeValues) {
  const double delta = 0.3;
  const RoundedBox q(BoxDomain(Vec3(1.0, 0.75, 0.5), 0.5), delta);
  for (const auto& wp : sample_boundary(q, 200.0)) {
    const double h = wp.point.mean_curvature;
    const bool ok = h == 0.0 || std::abs(h - 1.0 / delta) < 1e-12 || std::abs(h - 2.0 / delta) < 1e-12;
    EXPECT_TRUE(ok) << h;
    EXPECT_NEAR(wp.point.normal.norm(), 1.0, 1e-14);
    EXPECT_NEAR(q.signed_distance(wp.point.x), 0.0, 1e-13);
  }
}

TEST(RoundedBox, Convexity) {
  const RoundedBox q(BoxDomain(Vec3(1.0, 0.75, 0.5), 0.5), 0.3);
  const auto pts = sample_boundary(q, 100.0);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
  for (int n = 0; n < 10000; ++n) {
    const Vec3 mid = 0.5 * (pts[pick(rng)].point.x + pts[pick(rng)].point.x);
    EXPECT_TRUE(q.contains(mid, 1e-12));
  }
}

TEST(RoundedBox, MonotoneNesting) {
  const BoxDomain b(Vec3(1.0, 0.75, 0.5), 0.5);
  const RoundedBox q1(b, 0.1);
  const RoundedBox q2(b, 0.4);
  for (const auto& wp : sample_boundary(q2, 200.0)) EXPECT_TRUE(q1.contains(wp.point.x, 1e-12));
}

TEST(SurfaceChart, TangentsAreOrthogonalToTheNormal) {
  const RoundedBox q(BoxDomain(Vec3(1.0, 0.75, 0.5), 0.5), 0.3);
  const double h = 1e-6;
  for (const auto& wp : sample_boundary(q, 50.0)) {
    const SurfaceChart chart(q, wp.point.patch);
    const Eigen::Vector2d a = chart.coordinates(wp.point.x);
    EXPECT_LE((chart.point(a) - wp.point.x).norm(), 1e-13);
    for (int i = 0; i < 2; ++i) {
      Eigen::Vector2d step = Eigen::Vector2d::Zero();
      step(i) = h / chart.length_scale()(i);
      const Vec3 fd = (chart.point(a + step) - chart.point(a - step)) / (2 * step(i));
      EXPECT_LE(std::abs(fd.dot(wp.point.normal)), 1e-8);
      EXPECT_LE((fd - chart.tangents(a).col(i)).norm(), 1e-7);
    }
  }
}

TEST(RoundedBox, WeingartenAlongPrincipalDirections) {
  const RoundedBox q(BoxDomain(Vec3(1.0, 0.75, 0.5), 0.5), 0.3);
  for (const auto& wp : sample_boundary(q, 50.0)) {
    const BoundaryPoint& bp = wp.point;
    for (double h : {1e-4}) {
      for (int d = 0; d < 2; ++d) {
        const Vec3 dir = d == 0 ? bp.dir1 : bp.dir2;
        const double kappa = d == 0 ? bp.kappa1 : bp.kappa2;
        const Vec3 np = q.extended_normal(bp.x + h * dir);
        const Vec3 nm = q.extended_normal(bp.x - h * dir);
        const Vec3 dn = (np - nm) / (2 * h);
        EXPECT_LE((dn - kappa * dir).norm(), 10 * h * (1.0 + kappa * kappa));
      }
    }
  }
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  const GaussRule g = gauss_legendre(5);
  double s0 = 0, s8 = 0, s9 = 0;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    s0 += g.weights[i];
    s8 += g.weights[i] * std::pow(g.nodes[i], 8);
    s9 += g.weights[i] * std::pow(g.nodes[i], 9);
  }
  EXPECT_NEAR(s0, 2.0, 1e-14);
  EXPECT_NEAR(s8, 2.0 / 9.0, 1e-14);
  EXPECT_NEAR(s9, 0.0, 1e-14);
}
