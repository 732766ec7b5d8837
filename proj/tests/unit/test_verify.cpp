#include <cmath>
#include <string>

#include <gtest/gtest.h>

#include "pmllab/errors.hpp"
#include "pmllab/verify.hpp"

using namespace pmllab;

namespace {

CheckReport sample_report() {
  CheckReport r("sample", CheckOptions{7, 2.0, 1});
  r.parameter("tau", cplx(2.0, -1.5));
  r.parameter("nodes", "24");
  r.measure("residual", 1.25e-9);
  r.constant("C", 3.0);
  r.order("scheme", 1.9999999999999998);
  r.require_small("residual_small", 1.25e-9, 1e-9);
  r.require_at_least("scheme_order", 1.9999999999999998, 1.8);
  r.note("free text: with a colon");
  Table& t = r.table("refinement");
  t.columns = {"h", "error"};
  t.rows = {{0.1, 1e-3}, {0.05, 2.5e-4}};
  return r;
}

void expect_all_pass(const CheckReport& r) {
  for (const Verdict& v : r.verdicts()) EXPECT_TRUE(v.pass) << r.name() << ": " << v.criterion << " = " << v.value;
  EXPECT_TRUE(r.passed());
}

}  // namespace

TEST(Report, TextRoundTripIsExact) {
  const CheckReport r = sample_report();
  const std::string text = r.to_text();
  const CheckReport back = CheckReport::from_text(text);
  EXPECT_EQ(back.to_text(), text);
  EXPECT_EQ(back.name(), "sample");
  EXPECT_DOUBLE_EQ(back.tolerance_scale(), 2.0);
  EXPECT_EQ(back.value("scheme"), 1.9999999999999998);
  EXPECT_EQ(back.tables().at("refinement").rows[1][1], 2.5e-4);
}

TEST(Report, ToleranceScaleWidensResidualBoundsOnly) {
  const CheckReport r = sample_report();
  ASSERT_EQ(r.verdicts().size(), 2u);
  EXPECT_DOUBLE_EQ(r.verdicts()[0].bound, 2e-9);
  EXPECT_TRUE(r.verdicts()[0].pass);
  EXPECT_DOUBLE_EQ(r.verdicts()[1].bound, 1.8);
}

TEST(Report, NonFiniteValueFails) {
  CheckReport r("x", {});
  EXPECT_FALSE(r.require_at_most("a", std::nan(""), 1.0));
  EXPECT_FALSE(r.require_at_least("b", std::nan(""), 0.0));
  EXPECT_FALSE(r.passed());
}

TEST(Report, EmptyReportDoesNotPass) { EXPECT_FALSE(CheckReport("x", {}).passed()); }

TEST(Report, MergePrefixesEverything) {
  CheckReport outer("outer", {});
  outer.merge(sample_report(), "inner_");
  EXPECT_EQ(outer.verdicts().front().criterion, "inner_residual_small");
  EXPECT_DOUBLE_EQ(outer.value("inner_C"), 3.0);
  EXPECT_EQ(outer.tables().count("inner_refinement"), 1u);
}

TEST(Report, RejectsBadKeys) {
  CheckReport r("x", {});
  EXPECT_THROW(r.parameter("a: b", "1"), std::invalid_argument);
  EXPECT_THROW(r.require_small("", 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(CheckReport("", {}), std::invalid_argument);
}

TEST(Report, ParseErrors) {
  EXPECT_THROW(CheckReport::from_text("status: pass\n"), ParseError);
  EXPECT_THROW(CheckReport::from_text("check: a\nmeasured x: abc\n"), ParseError);
  EXPECT_THROW(CheckReport::from_text("check: a\nverdict v: 1 <= 2 maybe\n"), ParseError);
  EXPECT_THROW(CheckReport::from_text("check: a\nverdict v: 1 <=\n"), ParseError);
  EXPECT_THROW(CheckReport::from_text("check: a\ntable t\nx,y\n1,2\n"), ParseError);
  EXPECT_THROW(CheckReport::from_text("check: a\ntable t\nx,y\n1,2,3\nend table\n"), ParseError);
  EXPECT_THROW(CheckReport::from_text("check: a\nsomething else\n"), ParseError);
  EXPECT_THROW(CheckReport::from_text("check: a\nmeasured novalue\n"), ParseError);
}

TEST(Report, ParsesNonFiniteNumbers) {
  const CheckReport r = CheckReport::from_text("check: a\nmeasured x: inf\nmeasured y: nan\n");
  EXPECT_TRUE(std::isinf(r.value("x")));
  EXPECT_TRUE(std::isnan(r.value("y")));
}

TEST(Threshold, ZeroWithoutAbsorption) {
  const DeskSetup d;
  EXPECT_EQ(holomorphy_threshold(d.profiles(0.0), d.box(), 12, 4.0), 0.0);
}

TEST(Threshold, PositiveAndGrowsWithAspect) {
  const DeskSetup d;
  const double m1 = holomorphy_threshold(d.profiles(), d.box(), 12, 1.0);
  const double m4 = holomorphy_threshold(d.profiles(), d.box(), 12, 4.0);
  EXPECT_GE(m1, 0.0);
  EXPECT_GT(m4, 0.0);
  EXPECT_GE(m4, m1);
}

TEST(Checks, Algebra) { expect_all_pass(check_algebra(300)); }

TEST(Checks, AlgebraFailsUnderTinyToleranceScale) {
  CheckOptions opts;
  opts.tolerance_scale = 1e-6;
  EXPECT_FALSE(check_algebra(300, opts).passed());
}

TEST(Checks, Perturbation) {
  const CheckReport r = check_perturbation(300);
  expect_all_pass(r);
}

TEST(Checks, HelmholtzIdentity) {
  const DeskSetup d;
  expect_all_pass(check_helmholtz_identity(StretchContext(cplx(3.0, 2.0), d.profiles()), d.box(), 60));
}

TEST(Checks, NeumannIdentitySphere) {
  const CheckReport r = check_neumann_identity(NeumannSurface{}, 100);
  expect_all_pass(r);
  EXPECT_LT(r.value("sphere_finest"), 1e-3);
  EXPECT_GT(r.value("sphere_doubled_curvature_finest"), 0.1);
}

TEST(Checks, NeumannIdentityRoundedBox) {
  NeumannSurface s;
  s.kind = NeumannSurface::rounded_box;
  const CheckReport r = check_neumann_identity(s, 200);
  expect_all_pass(r);
  EXPECT_LT(r.value("face_finest"), 1e-12);
  EXPECT_GT(r.value("edge_doubled_curvature_finest"), 0.1);
}

TEST(Checks, TransverseIdentity) {
  const CheckReport r = check_transverse_identity(DeskSetup{}, 0.3, {cplx(50.0, 0.0), cplx(50.0, 20.0)}, 200);
  expect_all_pass(r);
  EXPECT_GT(r.value("tau1_corner_doubled_curvature_finest"), 0.1);
}

TEST(Checks, MBounds) {
  expect_all_pass(check_m_bounds(DeskSetup{}, {0.4, 0.2}, {1e2, 1e3}, {0.0, 1.0, -1.0, 4.0}, 30));
}

TEST(Checks, SameSeedSameReport) {
  CheckOptions opts;
  opts.seed = 42;
  EXPECT_EQ(check_algebra(50, opts).to_text(), check_algebra(50, opts).to_text());
  CheckOptions other = opts;
  other.seed = 43;
  EXPECT_NE(check_algebra(50, opts).to_text(), check_algebra(50, other).to_text());
}

TEST(Checks, CoercivityRatioPositiveOnSmallGrids) {
  CoercivityConfig c;
  c.grids = {10, 12};
  c.n_fields = 6;
  const CheckReport r = check_coercivity(c);
  const Table& t = r.tables().at("min_ratio");
  ASSERT_FALSE(t.rows.empty());
  for (const auto& row : t.rows) {
    for (std::size_t k = 2; k < row.size(); ++k) EXPECT_GT(row[k], 0.0);
  }
}
