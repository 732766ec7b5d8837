#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "pmllab/errors.hpp"
#include "pmllab/kernels/kernels.hpp"
#include "pmllab/timedomain.hpp"

using namespace pmllab;

namespace {

constexpr double kPi = std::numbers::pi;

Profiles no_layers() { return {AbsorptionProfile::none(), AbsorptionProfile::none(), AbsorptionProfile::none()}; }

SourceSpec silent_source() {
  SourceSpec s;
  s.amplitude = 0.0;
  s.radius = 0.1;
  return s;
}

// Plane wave e^{i(omega t - k.x)} v with A(k) v = |k| v: d/dt u = -sum A_j d_j u
// holds with omega = |k|.
Spinor plane_wave_polarization(const Vec3& k) {
  const auto p = projector(Sign::plus, k);
  Spinor v = p.col(0);
  if (v.norm() < 1e-8) v = p.col(1);
  return v / v.norm();
}

SpinorField plane_wave(const Grid& g, const Vec3& k, const Spinor& v) {
  SpinorField f(g);
  for (std::size_t node = 0; node < g.size(); ++node) {
    f.set(node, std::exp(-kI * k.dot(g.point(node))) * v);
  }
  return f;
}

SpinorField random_field(const Grid& g, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  SpinorField f(g);
  for (cplx& v : f.data()) v = cplx(d(rng), d(rng));
  return f;
}

double max_diff(const SpinorField& a, const SpinorField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

SpinorField gaussian(const Grid& g, const Vec3& c, double width, const Spinor& v) {
  SpinorField f(g);
  for (std::size_t node = 0; node < g.size(); ++node) {
    f.set(node, std::exp(-(g.point(node) - c).squaredNorm() / (width * width)) * v);
  }
  return f;
}

}  // namespace

TEST(SourceSpec, WindowAndBump) {
  SourceSpec s;
  s.duration = 2.0;
  EXPECT_EQ(s.window(-0.1), 0.0);
  EXPECT_EQ(s.window(2.5), 0.0);
  EXPECT_NEAR(s.window(1.0), 1.0, 1e-15);
  EXPECT_NEAR(s.bump(s.center), 1.0, 1e-15);
  EXPECT_EQ(s.bump(s.center + Vec3(s.radius, 0, 0)), 0.0);
}

TEST(SourceSpec, WindowLaplaceMatchesQuadrature) {
  SourceSpec s;
  s.duration = 1.3;
  using boost::math::quadrature::gauss_kronrod;
  for (cplx tau : {cplx(0.5, 0.0), cplx(2.0, 3.0), cplx(1.0, -7.0), cplx(0.05, 0.2)}) {
    const double re = gauss_kronrod<double, 61>::integrate(
        [&](double t) { return (std::exp(-tau * t) * s.window(t)).real(); }, 0.0, s.duration, 10, 1e-15);
    const double im = gauss_kronrod<double, 61>::integrate(
        [&](double t) { return (std::exp(-tau * t) * s.window(t)).imag(); }, 0.0, s.duration, 10, 1e-15);
    EXPECT_LE(std::abs(s.window_laplace(tau) - cplx(re, im)), 1e-13) << tau;
  }
}

TEST(SourceSpec, SupportMustLieInTheInnerBox) {
  const BoxDomain box(Vec3(1, 1, 1), 0.5);
  SourceSpec s;
  s.radius = 0.4;
  EXPECT_NO_THROW(s.validate(box));
  s.center = Vec3(0.2, 0, 0);
  EXPECT_THROW(s.validate(box), DomainError);
}

TEST(SimConfig, Validation) {
  SimConfig c;
  EXPECT_NO_THROW(c.validate());
  c.cfl = 1.5;
  EXPECT_THROW(c.validate(), DomainError);
  c.cfl = 0.5;
  c.final_time = 0.0;
  EXPECT_THROW(c.validate(), DomainError);
  c.final_time = 1.0;
  c.n = {4, 10, 10};
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(GridDerivative, ExactOnQuartics) {
  const BoxDomain box(Vec3(1.0, 0.7, 1.3), 0.5);
  const Grid g = Grid::over_box(box, {9, 11, 7});
  for (int axis = 0; axis < 3; ++axis) {
    SpinorField f(g);
    SpinorField d(g);
    for (std::size_t node = 0; node < g.size(); ++node) {
      const double x = g.point(node)(axis);
      f.set(node, Spinor(cplx(std::pow(x, 4), x), cplx(x * x * x, -2.0)));
    }
    for (int c = 0; c < 2; ++c) grid_derivative(g, axis, f.raw(c), d.raw(c));
    double err = 0.0;
    for (std::size_t node = 0; node < g.size(); ++node) {
      const double x = g.point(node)(axis);
      const Spinor e(cplx(4 * x * x * x, 1.0), cplx(3 * x * x, 0.0));
      err = std::max(err, (d.at(node) - e).norm());
    }
    EXPECT_LE(err, 1e-12) << "axis " << axis;
  }
}

TEST(GridDerivative, ThreadCountDoesNotChangeBits) {
  const BoxDomain box(Vec3(1, 1, 1), 0.5);
  const Grid g = Grid::over_box(box, {13, 12, 11});
  std::mt19937_64 rng(5);
  const SpinorField f = random_field(g, rng);
  for (int axis = 0; axis < 3; ++axis) {
    SpinorField a(g), b(g);
    grid_derivative(g, axis, f.raw(0), a.raw(0), 1);
    grid_derivative(g, axis, f.raw(0), b.raw(0), 3);
    EXPECT_EQ(a.data(), b.data());
  }
}

TEST(SplitSolver, ZeroStateZeroSourceGivesZeroRate) {
  const BoxDomain box(Vec3(1, 1, 1), 0.5);
  const Grid g = Grid::over_box(box, {9, 9, 9});
  SplitSolver solver(box, g, layer_profiles(box, ProfileKind::polynomial, 10.0), silent_source());
  SplitState s(g), out(g);
  solver.rhs(s, 0.3, out);
  for (const auto& u : out.U) EXPECT_EQ(u.max_abs(), 0.0);
  solver.step(s, 0.05);
  for (const auto& u : s.U) EXPECT_EQ(u.max_abs(), 0.0);
}

TEST(SplitSolver, ConstantComponentDecaysAtSigma) {
  const BoxDomain box(Vec3(1, 1, 1), 0.5);
  const Grid g = Grid::over_box(box, {9, 9, 9});
  const Profiles p = layer_profiles(box, ProfileKind::polynomial, 10.0);
  SplitSolver solver(box, g, p, silent_source());
  SplitState s(g), out(g);
  const Spinor v(cplx(1.0, 2.0), cplx(-0.5, 0.0));
  for (std::size_t node = 0; node < g.size(); ++node) s.U[0].set(node, v);
  solver.rhs(s, 0.0, out);
  double err = 0.0;
  for (std::size_t node = 0; node < g.size(); ++node) {
    err = std::max(err, (out.U[0].at(node) + p[0](g.point(node)(0)) * v).norm());
    err = std::max(err, out.U[1].at(node).norm() + out.U[2].at(node).norm());
  }
  EXPECT_LE(err, 1e-12);
}

TEST(SplitSolver, PlaneWaveResidualIsFourthOrder) {
  const BoxDomain box(Vec3(1, 1, 1), 0.5);
  const Vec3 k(1.3, -0.7, 0.9);
  const Spinor v = plane_wave_polarization(k);
  const double omega = k.norm();
  std::vector<double> errs;
  for (int n : {11, 21, 41}) {
    const Grid g = Grid::over_box(box, {n, n, n});
    SplitSolver solver(box, g, no_layers(), silent_source());
    SplitState s(g), out(g);
    s.U[1] = plane_wave(g, k, v);
    solver.rhs(s, 0.0, out);
    const SpinorField rate = out.total();
    SpinorField exact = s.U[1];
    exact *= kI * omega;
    errs.push_back(max_diff(rate, exact));
  }
  for (std::size_t i = 1; i < errs.size(); ++i) {
    EXPECT_GE(std::log2(errs[i - 1] / errs[i]), 3.7) << errs[i - 1] << " " << errs[i];
  }
}

TEST(SplitSolver, BoundaryProjectionPostcondition) {
  const BoxDomain box(Vec3(1, 0.8, 1.2), 0.5);
  const Grid g = Grid::over_box(box, {9, 8, 10});
  SplitSolver solver(box, g, no_layers(), silent_source());
  std::mt19937_64 rng(11);
  SplitState s(g);
  for (auto& u : s.U) u = random_field(g, rng);
  const SplitState before = s;
  solver.apply_boundary(s);
  const SpinorField sum = s.total();
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto faces = node_faces(g, node);
    if (faces.empty()) {
      for (int j = 0; j < 3; ++j) EXPECT_EQ(s.U[j].at(node), before.U[j].at(node));
      continue;
    }
    const Vec3 nu = grid_boundary_normal(g, node);
    const Spinor u = sum.at(node);
    EXPECT_LE((projector(Sign::minus, nu) * u).norm(), 1e-12 * (1.0 + u.norm()));
    EXPECT_GE((u.adjoint() * symbol(nu) * u)(0, 0).real(), -1e-12);
    // Only the components of the adjacent face axes are corrected.
    for (int j = 0; j < 3; ++j) {
      const bool adjacent = std::any_of(faces.begin(), faces.end(), [&](int k) { return face_axis(k) == j; });
      if (!adjacent) EXPECT_EQ(s.U[j].at(node), before.U[j].at(node));
    }
  }
}

TEST(SplitSolver, BoundaryProjectionFixedPoints) {
  const BoxDomain box(Vec3(1, 1, 1), 0.5);
  const Grid g = Grid::over_box(box, {7, 7, 7});
  SplitSolver solver(box, g, no_layers(), silent_source());
  const std::size_t node = g.index(0, 3, 3);  // face 1
  const Vec3C nu = face_normal(1).cast<cplx>();
  const Spinor plus = projector(Sign::plus, nu) * Spinor(cplx(0.3, 1.0), cplx(2.0, -1.0));
  const Spinor minus = projector(Sign::minus, nu) * Spinor(cplx(0.3, 1.0), cplx(2.0, -1.0));

  SplitState s(g);
  s.U[1].set(node, plus);
  solver.apply_boundary(s);
  EXPECT_LE((s.U[1].at(node) - plus).norm(), 1e-15);
  EXPECT_LE(s.U[0].at(node).norm(), 1e-15);

  SplitState t(g);
  t.U[2].set(node, minus);
  solver.apply_boundary(t);
  EXPECT_LE(t.total().at(node).norm(), 1e-15);
}

TEST(SplitSolver, SigmaFreeMatchesUnsplitSolver) {
  const BoxDomain box(Vec3(1, 1, 1), 0.5);
  const Grid g = Grid::over_box(box, {13, 13, 13});
  SourceSpec src;
  src.radius = 0.4;
  src.duration = 0.5;
  src.polarization = Spinor(cplx(1.0, 0.0), cplx(0.0, 1.0));
  SplitSolver split(box, g, no_layers(), src);
  UnsplitSolver direct(box, g, src);
  std::mt19937_64 rng(2);
  SpinorField u = gaussian(g, Vec3(0.2, 0, -0.1), 0.4, Spinor(cplx(1, 0), cplx(0.5, 0.5)));
  SplitState s(g);
  s.U[0] = u;
  double t = 0.0;
  const double dt = 0.5 * g.h.minCoeff();
  for (int step = 0; step < 40; ++step) {
    split.step(s, dt);
    direct.step(u, t, dt);
    EXPECT_LE(max_diff(s.total(), u), 1e-10 * u.max_abs()) << "step " << step;
  }
}

TEST(SplitSolver, EnergyConservedBeforeBoundaryContact) {
  const BoxDomain box(Vec3(1.5, 1.5, 1.5), 0.5);
  const Grid g = Grid::over_box(box, {61, 61, 61});
  SplitSolver solver(box, g, no_layers(), silent_source());
  SplitState s(g);
  s.U[2] = gaussian(g, Vec3::Zero(), 0.2, Spinor(cplx(1, 0), cplx(0, 0)));
  const double e0 = s.total().l2_norm();
  const double dt = 0.125 * g.h.minCoeff();
  for (int step = 0; step < 100; ++step) solver.step(s, dt);
  // The pulse has moved 0.625; its tail at the faces is below e^{-19}.
  EXPECT_LE(std::abs(s.total().l2_norm() - e0) / e0, 1e-6);
}

TEST(SplitSolver, OverflowGuardThrows) {
  const BoxDomain box(Vec3(1, 1, 1), 0.5);
  const Grid g = Grid::over_box(box, {7, 7, 7});
  SplitSolver solver(box, g, no_layers(), silent_source());
  SplitState s(g);
  s.U[0].set(g.index(3, 3, 3), Spinor(cplx(1e160, 0), cplx(0, 0)));
  EXPECT_THROW(solver.step(s, 0.1), StabilityError);
}

// The explicit scheme reaches 16 nodes per step, so the discrete front runs a
// few cells ahead of the light cone; arrival is measured from the sampled
// support widened by four cells.
TEST(Run, CausalityOutsideTheLightCone) {
  const BoxDomain box(Vec3(1.5, 1.5, 1.5), 0.5);
  SimConfig c;
  c.n = {61, 61, 61};
  c.final_time = 1.5;
  c.probes = {Vec3(1.4, 0.0, 0.0)};
  SourceSpec src;
  src.radius = 0.7;
  src.duration = 2.0;
  const RunResult r = run(c, box, no_layers(), src);
  const Recording& rec = r.recording;
  const auto& series = rec.probe_series[0];
  const double reach = 4.0 * rec.grid.h.maxCoeff();
  const double arrival = (rec.grid.point(rec.probe_nodes[0]) - src.center).norm() - src.radius - reach;
  double peak = 0.0;
  for (const auto& v : series) peak = std::max(peak, v.norm());
  ASSERT_GT(peak, 0.0);
  for (std::size_t k = 0; k < series.size(); ++k) {
    if (rec.times[k] < arrival) EXPECT_LE(series[k].norm(), 1e-8 * peak) << rec.times[k];
  }
}

TEST(Run, LayerEnergyDecaysAfterSourceSwitchOff) {
  const BoxDomain box(Vec3(1, 1, 1), 0.5);
  SimConfig c;
  c.n = {37, 37, 37};
  c.final_time = 4.0;
  SourceSpec src;
  src.radius = 0.4;
  src.duration = 0.5;
  const RunResult r = run(c, box, layer_profiles(box, ProfileKind::polynomial, 20.0), src);
  const auto& rec = r.recording;
  for (std::size_t k = 1; k < rec.times.size(); ++k) {
    if (rec.times[k - 1] < src.duration) continue;
    EXPECT_LE(rec.l2[k] * rec.l2[k], rec.l2[k - 1] * rec.l2[k - 1] * (1.0 + 1e-8)) << rec.times[k];
  }
}

TEST(Run, NoGrowthOverTenTransits) {
  // Edge and corner nodes used to feed a growing mode through the split
  // components when the projections were applied face by face.
  const BoxDomain box(Vec3(1, 1, 1), 0.5);
  SimConfig c;
  c.n = {21, 21, 21};
  c.final_time = 20.0;
  SourceSpec src;
  src.radius = 0.45;
  const RunResult r = run(c, box, layer_profiles(box, ProfileKind::polynomial, 20.0), src);
  const auto& rec = r.recording;
  std::size_t off = 0;
  while (rec.times[off] < src.duration) ++off;
  for (std::size_t k = off; k < rec.times.size(); ++k) {
    EXPECT_LE(rec.max_abs[k], rec.max_abs[off] * (1.0 + 1e-3)) << rec.times[k];
  }
  EXPECT_LT(rec.l2.back(), 0.5 * rec.l2[off]);
}

TEST(Run, DeterministicAndIsaIndependent) {
  const BoxDomain box(Vec3(1, 1, 1), 0.5);
  SimConfig c;
  c.n = {13, 13, 13};
  c.final_time = 0.6;
  c.probes = {Vec3(0.3, 0.2, 0.1)};
  SourceSpec src;
  src.radius = 0.4;
  const Profiles p = layer_profiles(box, ProfileKind::smooth, 15.0);
  const auto before = kernels::active_isa();
  kernels::force_isa(kernels::Isa::scalar);
  const RunResult a = run(c, box, p, src);
  kernels::force_isa(kernels::avx2_supported() ? kernels::Isa::avx2 : kernels::Isa::scalar);
  const RunResult b = run(c, box, p, src);
  const RunResult b2 = run(c, box, p, src);
  kernels::force_isa(before);
  for (int j = 0; j < 3; ++j) {
    EXPECT_EQ(a.final_state.U[j].data(), b.final_state.U[j].data());
    EXPECT_EQ(b.final_state.U[j].data(), b2.final_state.U[j].data());
  }
  EXPECT_EQ(a.recording.l2, b.recording.l2);
}

TEST(WeightedNorms, ZeroRecordingGivesZero) {
  const BoxDomain box(Vec3(1, 1, 1), 0.5);
  SimConfig c;
  c.n = {7, 7, 7};
  c.final_time = 0.5;
  c.dual_stride = 2;
  SourceSpec src = silent_source();
  const RunResult r = run(c, box, no_layers(), src);
  const WeightedNorms w = weighted_norms(r.recording, 1.0);
  EXPECT_EQ(w.volume, 0.0);
  EXPECT_EQ(w.boundary, 0.0);
  EXPECT_EQ(w.dual, 0.0);
  EXPECT_EQ(w.source, 0.0);
}

TEST(WeightedNorms, TrapezoidOnAnExponential) {
  Recording rec;
  const int n = 2001;
  const double T = 10.0;
  for (int k = 0; k < n; ++k) {
    const double t = T * k / (n - 1);
    rec.times.push_back(t);
    rec.l2.push_back(std::exp(-t));
    rec.boundary_l2.push_back(1.0);
    rec.source_l2.push_back(0.0);
  }
  const double lambda = 0.5;
  // int_0^T e^{-2 lambda t} e^{-2t} dt and int_0^T e^{-2 lambda t} dt
  const double vol = std::sqrt((1 - std::exp(-3.0 * T)) / 3.0);
  const double bnd = std::sqrt((1 - std::exp(-T)) / 1.0);
  const WeightedNorms w = weighted_norms(rec, lambda);
  EXPECT_NEAR(w.volume, vol, 1e-5);
  EXPECT_NEAR(w.boundary, bnd, 1e-5);
}

TEST(LaplaceOfTrace, ScalarExponential) {
  const BoxDomain box(Vec3(1, 1, 1), 0.5);
  const Grid g = Grid::over_box(box, {5, 5, 5});
  std::mt19937_64 rng(8);
  const SpinorField w = random_field(g, rng);
  for (int m : {400, 401}) {  // even and odd interval counts
    Recording rec;
    rec.grid = g;
    const double T = 3.0;
    for (int k = 0; k <= m; ++k) {
      const double t = T * k / m;
      SpinorField u = w;
      u *= std::exp(-t);
      rec.snapshots.push_back({t, u, {}});
    }
    const LaplaceTrace lt = laplace_of_trace(rec, cplx(1.0, 0.0));
    SpinorField exact = w;
    exact *= (1.0 - std::exp(-2.0 * T)) / 2.0;
    EXPECT_LE(max_diff(lt.total, exact), 1e-9 * w.max_abs()) << m;
    EXPECT_NEAR(lt.tail_estimate, 2.0 * std::exp(-2.0 * T) / (1.0 - std::exp(-2.0 * T)), 1e-9);
    EXPECT_FALSE(lt.truncated);
  }
}

TEST(LaplaceOfTrace, CauchyRiemannOnARun) {
  const BoxDomain box(Vec3(1, 1, 1), 0.5);
  SimConfig c;
  c.n = {17, 17, 17};
  c.final_time = 6.0;
  c.snapshot_stride = 1;
  SourceSpec src;
  src.radius = 0.4;
  const RunResult r = run(c, box, layer_profiles(box, ProfileKind::polynomial, 20.0), src);
  const cplx tau(2.0, 1.0);
  const double h = 1e-4;
  auto at = [&](cplx t) { return laplace_of_trace(r.recording, t).total; };
  const SpinorField dx = [&] {
    SpinorField f = at(tau + h);
    f -= at(tau - h);
    f *= 1.0 / (2 * h);
    return f;
  }();
  SpinorField dy = at(tau + kI * h);
  dy -= at(tau - kI * h);
  dy *= 1.0 / (2 * h);
  // holomorphic: d/dy = i d/dx
  SpinorField idx = dx;
  idx *= kI;
  EXPECT_LE(max_diff(dy, idx), 1e-6 * dx.max_abs());
}

TEST(DualNorm, DiscreteEigenfunction) {
  const BoxDomain box(Vec3(1, 1, 1), 0.5);
  const Grid g = Grid::over_box(box, {9, 9, 9});
  const DualNorm dn(g);
  SpinorField w(g);
  const int m[3] = {1, 2, 3};
  double lam = 1.0;
  for (int a = 0; a < 3; ++a) {
    const double s = std::sin(kPi * m[a] * g.h(a) / (2 * 2.0));
    lam += 4.0 * s * s / (g.h(a) * g.h(a));
  }
  double norm2 = 0.0;
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto c = g.coords(node);
    double phi = 1.0;
    for (int a = 0; a < 3; ++a) phi *= std::sin(kPi * m[a] * c[a] / (g.n[a] - 1));
    w.set(node, Spinor(cplx(phi, 0.5 * phi), cplx(0.0, -phi)));
    norm2 += g.cell_volume() * w.at(node).squaredNorm();
  }
  EXPECT_NEAR(dn.squared(w), norm2 / lam, 1e-12 * norm2);
}

TEST(Snapshot, RoundTripAndProbeCsv) {
  const BoxDomain box(Vec3(1, 0.5, 0.75), 0.5);
  const Grid g = Grid::over_box(box, {6, 5, 7});
  std::mt19937_64 rng(4);
  const SpinorField f = random_field(g, rng);
  const auto dir = std::filesystem::temp_directory_path() / "pmllab_snapshot_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "u.bin").string();
  write_snapshot(path, f, 1.25);
  double t = 0.0;
  const SpinorField back = read_snapshot(path, &t);
  EXPECT_EQ(t, 1.25);
  EXPECT_TRUE(back.grid() == g);
  EXPECT_EQ(back.data(), f.data());
  EXPECT_EQ(std::filesystem::file_size(path), f.data().size() * 16);

  Recording rec;
  rec.times = {0.0, 0.5};
  rec.probe_series = {{Spinor(cplx(1, 2), cplx(3, 4)), Spinor(cplx(-1, 0), cplx(0, 0.5))}};
  const std::string csv = (dir / "probe.csv").string();
  rec.write_probe_csv(csv, 0);
  std::ifstream is(csv);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_EQ(header, "t,re_u1,im_u1,re_u2,im_u2");
  EXPECT_EQ(row, "0,1,2,3,4");
  std::filesystem::remove_all(dir);
}
