#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include <fmt/format.h>

#include "common.hpp"
#include "pmllab/errors.hpp"
#include "pmllab/field.hpp"
#include "pmllab/verify.hpp"

namespace pmllab {

using detail::max_abs;
using detail::observed_order;

Profiles DeskSetup::profiles() const { return profiles(sigma0); }

Profiles DeskSetup::profiles(double amplitude) const {
  if (amplitude == 0.0) return {AbsorptionProfile::none(), AbsorptionProfile::none(), AbsorptionProfile::none()};
  return layer_profiles(box(), profile, amplitude, order);
}

double holomorphy_threshold(const Profiles& profiles, const BoxDomain& box, int nodes, double aspect) {
  const Grid g = Grid::over_box(box, {nodes, nodes, nodes});
  std::vector<std::pair<Vec3, Vec3>> points;
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (!g.on_boundary(node)) continue;
    Vec3 n = Vec3::Zero();
    for (int k : node_faces(g, node)) n += face_normal(k);
    points.emplace_back(g.point(node), n.normalized());
  }
  auto ok = [&](double re) {
    for (double s : {aspect, -aspect}) {
      const StretchContext ctx(cplx(re, s * re), profiles);
      for (const auto& [x, nu] : points) {
        if (!in_holomorphy_domain(ctx.nu_tilde(x, nu))) return false;
      }
    }
    return true;
  };
  double lo = 1e-6;
  double hi = 1e6;
  if (ok(lo)) return 0.0;
  if (!ok(hi)) return hi;
  while (hi / lo > 1.0 + 1e-8) {
    const double mid = std::sqrt(lo * hi);
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

CheckReport check_algebra(int n_samples, const CheckOptions& opts) {
  CheckReport r("algebra", opts);
  r.parameter("samples", std::to_string(n_samples));
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> g;
  const auto& A = pauli_matrices();
  const Matrix2C I = Matrix2C::Identity();

  double anti = 0.0;
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) anti = std::max(anti, max_abs(A[j] * A[k] + A[k] * A[j] - 2.0 * (j == k) * I));
  }
  double anti2 = 0.0, det = 0.0, spectral = 0.0, piapi = 0.0, partial = 0.0;
  for (int n = 0; n < n_samples; ++n) {
    const Vec3C xi = detail::random_holomorphic(rng);
    const Vec3C eta = detail::random_holomorphic(rng);
    const Vec3C zeta = detail::random_complex(rng, 2.0);
    const cplx tau(g(rng), g(rng));

    const Matrix2C ax = symbol(xi);
    const Matrix2C az = symbol(zeta);
    anti2 = std::max(anti2, max_abs(az * ax + ax * az - 2.0 * bilinear_dot(zeta, xi) * I) /
                                std::max(1.0, xi.norm() * zeta.norm()));

    det = std::max(det, std::abs((tau * I + az).determinant() - det_L(tau, zeta)) /
                            std::max(1.0, std::norm(tau) + zeta.squaredNorm()));

    const EigenPair e = eigenvalues(xi);
    const Matrix2C pp = projector(Sign::plus, xi);
    const Matrix2C pm = projector(Sign::minus, xi);
    const double s = std::max(1.0, xi.norm());
    spectral = std::max({spectral, max_abs(pp * pp - pp), max_abs(pm * pm - pm), max_abs(pp * pm),
                         max_abs(pp + pm - I), max_abs(ax * pp - e.plus * pp) / s, max_abs(pp * ax - e.plus * pp) / s,
                         max_abs(ax * pm - e.minus * pm) / s, std::abs(e.plus + e.minus) / s});

    const cplx root = eigenvalues(eta).plus;
    for (Sign sg : {Sign::plus, Sign::minus}) {
      const Matrix2C p = projector(sg, eta);
      const Matrix2C rhs = (sg == Sign::plus ? 1.0 : -1.0) * bilinear_dot(zeta, eta) / root * p;
      piapi = std::max(piapi, max_abs(p * az * p - rhs) / std::max(1.0, zeta.norm()));
    }

    const Matrix2C q = partial_inverse(xi);
    partial = std::max({partial, max_abs(q * (ax - e.plus * I) + pp - I), max_abs(q * pp) * s});
  }
  const double tol = 1e-10;
  r.measure("anticommutation", anti);
  r.measure("anticommutation_complex", anti2);
  r.measure("det_identity", det);
  r.measure("spectral_calculus", spectral);
  r.measure("pi_a_pi", piapi);
  r.measure("partial_inverse", partial);
  r.require_small("anticommutation", anti, tol);
  r.require_small("anticommutation_complex", anti2, tol);
  r.require_small("det_identity", det, tol);
  r.require_small("spectral_calculus", spectral, tol);
  r.require_small("pi_a_pi", piapi, tol);
  r.require_small("partial_inverse", partial, tol);
  return r;
}

namespace {

using LMatrix = Eigen::Matrix<std::complex<long double>, 2, 2>;

// pi^+ of a real direction in extended precision.
LMatrix projector_ld(const Eigen::Matrix<long double, 3, 1>& z) {
  using lc = std::complex<long double>;
  const long double n = z.norm();
  LMatrix a;
  a << lc(z(0), 0), lc(z(1), z(2)), lc(z(1), -z(2)), lc(-z(0), 0);
  return (a + n * LMatrix::Identity()) / (2 * n);
}

}  // namespace

CheckReport check_perturbation(int n_samples, const CheckOptions& opts) {
  CheckReport r("perturbation", opts);
  r.parameter("samples", std::to_string(n_samples));
  r.note("central differences evaluated in extended precision so the smallest step is not roundoff limited");
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> g;
  const std::vector<double> steps{1e-3, 1e-4, 1e-5};
  std::vector<double> err(steps.size(), 0.0);
  std::vector<double> wrong(steps.size(), 0.0);
  for (int n = 0; n < n_samples; ++n) {
    const Vec3 xi = Vec3(g(rng), g(rng), g(rng)).normalized();
    const Vec3 eta(g(rng), g(rng), g(rng));
    const Matrix2C exact = projector_derivative(xi, eta);
    const Matrix2C pp = projector(Sign::plus, xi);
    const Matrix2C q = partial_inverse(Vec3C(xi.cast<cplx>()));
    const Matrix2C flipped = pp * symbol(eta) * q + q * symbol(eta) * pp;
    for (std::size_t s = 0; s < steps.size(); ++s) {
      const long double h = steps[s];
      const Eigen::Matrix<long double, 3, 1> x = xi.cast<long double>();
      const Eigen::Matrix<long double, 3, 1> e = eta.cast<long double>();
      const LMatrix d = (projector_ld(x + h * e) - projector_ld(x - h * e)) / (2 * h);
      Matrix2C fd;
      for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) fd(i, j) = cplx(static_cast<double>(d(i, j).real()), static_cast<double>(d(i, j).imag()));
      }
      err[s] = std::max(err[s], max_abs(fd - exact) / eta.norm());
      wrong[s] = std::max(wrong[s], max_abs(fd - flipped) / eta.norm());
    }
  }
  Table& t = r.table("refinement");
  t.columns = {"h", "error", "negative_control"};
  for (std::size_t s = 0; s < steps.size(); ++s) t.rows.push_back({steps[s], err[s], wrong[s]});
  double worst = INFINITY;
  for (std::size_t s = 0; s + 1 < steps.size(); ++s) {
    const double o = observed_order(err[s], err[s + 1], steps[s], steps[s + 1]);
    r.order(fmt::format("h{}_to_h{}", s, s + 1), o);
    worst = std::min(worst, o);
  }
  r.require_at_least("min_observed_order", worst, 1.9);
  r.require_at_least("negative_control_error", wrong.back(), 1e-2);
  return r;
}

namespace {

// Fourth-order central first derivative of a spinor function along axis j.
template <class F>
Spinor d4(const F& f, const Vec3& x, int j, double h) {
  Vec3 e = Vec3::Zero();
  e(j) = h;
  return (f(Vec3(x - 2 * e)) - 8.0 * f(Vec3(x - e)) + 8.0 * f(Vec3(x + e)) - f(Vec3(x + 2 * e))) / (12.0 * h);
}

struct HelmholtzSample {
  double discrepancy;  // max |lhs - rhs|
  double scale;        // max |rhs|
  double wrong;        // max |lhs - rhs_with_flipped_tau2|
};

HelmholtzSample helmholtz_discrepancy(const StretchContext& ctx, const detail::TrigField& w,
                                      const std::vector<Vec3>& points, double h) {
  const auto& A = pauli_matrices();
  const cplx tau = ctx.tau();
  auto wf = [&](const Vec3& y) { return w.value(y); };
  auto L = [&](const Vec3& y) {
    const Vec3C f = ctx.derivative_factors(y);
    Spinor v = tau * w.value(y);
    for (int j = 0; j < 3; ++j) v += f(j) * (A[j] * d4(wf, y, j, h));
    return v;
  };
  HelmholtzSample out{0.0, 0.0, 0.0};
  for (const Vec3& x : points) {
    const Vec3C f = ctx.derivative_factors(x);
    const cplx pi = ctx.Pi(x);
    Spinor lhs = -tau * L(x);
    for (int j = 0; j < 3; ++j) lhs += f(j) * (A[j] * d4(L, x, j, h));
    lhs *= pi;

    const Vec3C c = ctx.p_coefficients(x);
    const Spinor wx = w.value(x);
    Spinor pw = Spinor::Zero();
    for (int j = 0; j < 3; ++j) {
      const double sj = ctx.sigma(j, x(j));
      const cplx dfj = -tau * ctx.profiles()[j].derivative(x(j)) / ((tau + sj) * (tau + sj));
      const cplx dc = c(j) / f(j) * dfj;
      pw += c(j) * w.second(x, j) + dc * w.derivative(x, j);
    }
    const Spinor rhs = pw - tau * tau * pi * wx;
    const Spinor flipped = pw + tau * tau * pi * wx;
    out.discrepancy = std::max(out.discrepancy, (lhs - rhs).norm());
    out.scale = std::max(out.scale, rhs.norm());
    out.wrong = std::max(out.wrong, (lhs - flipped).norm());
  }
  return out;
}

}  // namespace

CheckReport check_helmholtz_identity(const StretchContext& ctx, const BoxDomain& box, int n_samples,
                                     const CheckOptions& opts) {
  CheckReport r("helmholtz_identity", opts);
  r.parameter("tau", ctx.tau());
  r.parameter("samples", std::to_string(n_samples));
  std::mt19937_64 rng(opts.seed);
  const std::vector<double> steps{0.04, 0.02, 0.01};
  const double guard = 5.0 * steps.front();

  // Sample points stay clear of the profile onsets, where the polynomial
  // profile is only finitely differentiable.
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> points;
  while (static_cast<int>(points.size()) < n_samples) {
    Vec3 x;
    bool ok = true;
    for (int j = 0; j < 3; ++j) {
      x(j) = u(rng) * (box.half_length(j) - guard);
      const auto& p = ctx.profiles()[j];
      if (!p.is_zero() && std::abs(std::abs(x(j)) - p.start()) < guard) ok = false;
    }
    if (ok) points.push_back(x);
  }
  const detail::TrigField w = detail::random_trig(rng, 4, 3.0);

  const Profiles none{AbsorptionProfile::none(), AbsorptionProfile::none(), AbsorptionProfile::none()};
  const std::vector<std::pair<std::string, StretchContext>> cases{{"stretched", ctx},
                                                                   {"unstretched", StretchContext(ctx.tau(), none)}};
  for (const auto& [label, c] : cases) {
    Table& t = r.table(label);
    t.columns = {"h", "relative_discrepancy", "negative_control"};
    std::vector<double> rel;
    for (double h : steps) {
      const HelmholtzSample s = helmholtz_discrepancy(c, w, points, h);
      rel.push_back(s.discrepancy / s.scale);
      t.rows.push_back({h, rel.back(), s.wrong / s.scale});
    }
    const double o = observed_order(rel[rel.size() - 2], rel.back(), steps[steps.size() - 2], steps.back());
    r.order(label, o);
    r.measure(label + "_finest", rel.back());
    r.require_at_least(label + "_order", o, 3.5);
    r.require_small(label + "_finest", rel.back(), 1e-4);
    r.require_at_least(label + "_negative_control", t.rows.back()[2], 0.1);
  }

  // Constant field: every difference vanishes and both sides are -tau^2 Pi w.
  detail::TrigField constant;
  constant.k.push_back(Vec3::Zero());
  constant.c.push_back(Spinor(cplx(0.3, -1.0), cplx(2.0, 0.5)));
  const HelmholtzSample s = helmholtz_discrepancy(ctx, constant, points, steps.back());
  r.measure("constant_field", s.discrepancy / s.scale);
  r.require_small("constant_field", s.discrepancy / s.scale, 1e-13);
  return r;
}

namespace {

bool same_patch(const Patch& a, const Patch& b) {
  return a.kind == b.kind && a.face == b.face && a.axis == b.axis && a.signs == b.signs;
}

const char* patch_name(PatchKind k) {
  switch (k) {
    case PatchKind::face:
      return "face";
    case PatchKind::edge:
      return "edge";
    case PatchKind::corner:
      return "corner";
  }
  return "?";
}

// Boundary points of the rounded box whose difference stencils of radius
// `reach` stay on one smooth patch.
std::vector<BoundaryPoint> interior_patch_points(const RoundedBox& q, int n_points, double reach) {
  const double density = n_points / q.surface_area();
  std::vector<BoundaryPoint> out;
  for (const auto& wp : sample_boundary(q, density)) {
    const BoundaryPoint& bp = wp.point;
    bool ok = true;
    for (int j = 0; j < 4 && ok; ++j) {
      const Vec3 e = j < 3 ? Vec3(Vec3::Unit(j)) : bp.normal;
      for (double s : {-reach, reach}) {
        const BoundaryPoint other = rounded_box_point(q, bp.x + s * e);
        if (!same_patch(other.patch, bp.patch)) ok = false;
      }
    }
    if (ok) out.push_back(bp);
  }
  return out;
}

// Second-order central difference along direction e.
template <class F>
Spinor d2(const F& f, const Vec3& x, const Vec3& e, double h) {
  return (f(Vec3(x + h * e)) - f(Vec3(x - h * e))) / (2.0 * h);
}

struct IdentityStats {
  std::map<std::string, std::vector<double>> discrepancy;  // per patch kind, per step
  std::map<std::string, std::vector<double>> wrong;
  std::map<std::string, std::vector<double>> doubled;  // curvature term taken twice
  std::map<std::string, double> scale;

  void resize(const std::string& kind, std::size_t n) {
    discrepancy[kind].resize(n, 0.0);
    wrong[kind].resize(n, 0.0);
    doubled[kind].resize(n, 0.0);
  }
  void add(const std::string& kind, std::size_t s, const Spinor& lhs, const Spinor& rhs, const Spinor& flat,
           const Spinor& curv) {
    discrepancy[kind][s] = std::max(discrepancy[kind][s], (lhs - rhs).norm());
    wrong[kind][s] = std::max(wrong[kind][s], (lhs - flat).norm());
    doubled[kind][s] = std::max(doubled[kind][s], (lhs - rhs - curv).norm());
    scale[kind] = std::max(scale[kind], rhs.norm());
  }
};

void report_identity(CheckReport& r, const std::string& label, const IdentityStats& st,
                     const std::vector<double>& steps, double curved_tol) {
  for (const auto& [kind, disc] : st.discrepancy) {
    const double scale = st.scale.at(kind);
    Table& t = r.table(label + kind);
    t.columns = {"h", "relative_discrepancy", "negative_control", "doubled_curvature"};
    std::vector<double> rel;
    for (std::size_t s = 0; s < steps.size(); ++s) {
      rel.push_back(disc[s] / scale);
      t.rows.push_back({steps[s], rel.back(), st.wrong.at(kind)[s] / scale, st.doubled.at(kind)[s] / scale});
    }
    r.measure(label + kind + "_finest", rel.back());
    if (kind == "face") {
      r.require_small(label + kind + "_exact", *std::max_element(rel.begin(), rel.end()), 1e-10);
      continue;
    }
    const double o = observed_order(rel[rel.size() - 2], rel.back(), steps[steps.size() - 2], steps.back());
    r.order(label + kind, o);
    r.require_at_least(label + kind + "_order", o, 1.8);
    r.require_small(label + kind + "_finest", rel.back(), curved_tol);
    r.require_at_least(label + kind + "_negative_control", t.rows.back()[2], 1e-2);
    r.measure(label + kind + "_doubled_curvature_finest", t.rows.back()[3]);
  }
}

}  // namespace

CheckReport check_neumann_identity(const NeumannSurface& surface, int n_points, const CheckOptions& opts) {
  CheckReport r("neumann_identity", opts);
  std::mt19937_64 rng(opts.seed);
  const std::vector<double> steps{0.02, 0.01, 0.005};
  const detail::TrigField w = detail::random_trig(rng, 3, 2.0);
  const auto& A = pauli_matrices();

  struct Point {
    Vec3 x;
    Vec3 normal;
    double H;
    std::string kind;
  };
  std::vector<Point> points;
  std::function<Vec3(const Vec3&)> extended;
  std::unique_ptr<RoundedBox> q;
  if (surface.kind == NeumannSurface::sphere) {
    r.parameter("surface", "sphere");
    r.parameter("radius", surface.radius);
    std::normal_distribution<double> g;
    for (int n = 0; n < n_points; ++n) {
      const Vec3 d = Vec3(g(rng), g(rng), g(rng)).normalized();
      points.push_back({surface.radius * d, d, 1.0 / surface.radius, "sphere"});
    }
    extended = [](const Vec3& x) { return Vec3(x.normalized()); };
  } else {
    r.parameter("surface", "rounded_box");
    r.parameter("delta", surface.delta);
    q = std::make_unique<RoundedBox>(surface.box.box(), surface.delta);
    for (const BoundaryPoint& bp : interior_patch_points(*q, n_points, 2.0 * steps.front())) {
      points.push_back({bp.x, bp.normal, bp.mean_curvature, patch_name(bp.patch.kind)});
    }
    const RoundedBox* qp = q.get();
    extended = [qp](const Vec3& x) { return qp->extended_normal(x); };
  }
  r.measure("points", static_cast<double>(points.size()));
  r.note("curvature term is (kappa1 + kappa2) / 2 = H; the doubled_curvature column shows the 2H form does not converge");

  auto u = [&](const Vec3& y) { return Spinor(projector(Sign::plus, extended(y)) * w.value(y)); };
  IdentityStats st;
  for (const Point& p : points) {
    st.resize(p.kind, steps.size());
    const Matrix2C pp = projector(Sign::plus, p.normal);
    for (std::size_t s = 0; s < steps.size(); ++s) {
      const double h = steps[s];
      Spinor lhs = Spinor::Zero();
      for (int j = 0; j < 3; ++j) lhs += A[j] * d2(u, p.x, Vec3::Unit(j), h);
      lhs = pp * lhs;
      const Spinor dn = d2(u, p.x, p.normal, h);
      const Spinor curv = pp * (p.H * u(p.x));
      st.add(p.kind, s, lhs, Spinor(pp * dn + curv), Spinor(pp * dn), curv);
    }
  }
  report_identity(r, "", st, steps, 5e-3);
  return r;
}

CheckReport check_transverse_identity(const DeskSetup& setup, double delta, const std::vector<cplx>& taus,
                                      int n_points, const CheckOptions& opts) {
  CheckReport r("transverse_identity", opts);
  r.parameter("delta", delta);
  r.parameter("sigma0", setup.sigma0);
  std::mt19937_64 rng(opts.seed);
  const std::vector<double> steps{0.02, 0.01, 0.005};
  const detail::TrigField w = detail::random_trig(rng, 3, 2.0);
  const auto& A = pauli_matrices();
  const RoundedBox q(setup.box(), delta);
  const std::vector<BoundaryPoint> points = interior_patch_points(q, n_points, 2.0 * steps.front());
  r.measure("points", static_cast<double>(points.size()));
  r.note("curvature term is H(X), half the trace of the stretched Weingarten map");

  std::vector<std::pair<std::string, StretchContext>> cases;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    r.parameter(fmt::format("tau{}", i), taus[i]);
    cases.emplace_back(fmt::format("tau{}_", i), StretchContext(taus[i], setup.profiles()));
  }
  cases.emplace_back("unstretched_", StretchContext(taus.front().real(), setup.profiles(0.0)));

  for (const auto& [label, ctx] : cases) {
    auto nu_tilde = [&](const Vec3& y) { return checked_nu_tilde(ctx, y, q.extended_normal(y)); };
    auto u = [&](const Vec3& y) { return Spinor(projector(Sign::plus, nu_tilde(y)) * w.value(y)); };
    IdentityStats st;
    for (const BoundaryPoint& bp : points) {
      const std::string kind = patch_name(bp.patch.kind);
      st.resize(kind, steps.size());
      const Matrix2C pp = projector(Sign::plus, nu_tilde(bp.x));
      const Vec3C f = ctx.derivative_factors(bp.x);
      const Vec3C v = ctx.V_coefficients(bp);
      const cplx H = ctx.stretched_frame(q, bp).mean_curvature;
      for (std::size_t s = 0; s < steps.size(); ++s) {
        const double h = steps[s];
        Spinor lhs = Spinor::Zero();
        Spinor vu = Spinor::Zero();
        for (int j = 0; j < 3; ++j) {
          const Spinor dj = d2(u, bp.x, Vec3::Unit(j), h);
          lhs += f(j) * (A[j] * dj);
          vu += v(j) * dj;
        }
        lhs = pp * lhs;
        const Spinor curv = pp * (H * u(bp.x));
        st.add(kind, s, lhs, Spinor(pp * vu + curv), Spinor(pp * vu), curv);
      }
    }
    report_identity(r, label, st, steps, 5e-3);
  }
  return r;
}

CheckReport check_m_bounds(const DeskSetup& setup, const std::vector<double>& deltas,
                           const std::vector<double>& re_taus, const std::vector<double>& aspects, double density,
                           const CheckOptions& opts) {
  CheckReport r("m_bounds", opts);
  r.parameter("sigma0", setup.sigma0);
  r.parameter("density", density);
  r.note("C(Re tau) is the sup of |m| over the Im tau ladder; m vanishes for real tau");
  r.note("Bounds in fractional Sobolev norms are not checked: no discrete H^{1/2} norm on the smoothed boundary");
  const BoxDomain box = setup.box();
  const Profiles profiles = setup.profiles();
  Table& t = r.table("constants");
  t.columns = {"delta", "re_tau", "far_face_max", "sup_norm", "gradient_over_beta"};
  std::vector<double> c3_by_delta;
  double real_axis = 0.0;
  for (double delta : deltas) {
    const RoundedBox q(box, delta);
    const auto samples = sample_boundary(q, density);
    std::vector<double> c2;
    double c3 = 0.0;
    for (double re : re_taus) {
      double far = 0.0, sup = 0.0, grad = 0.0;
      for (double aspect : aspects) {
        const StretchContext ctx(cplx(re, aspect * re), profiles);
        for (const auto& wp : samples) {
          const BoundaryPoint& bp = wp.point;
          const double norm = op_norm(ctx.m_matrix(bp));
          sup = std::max(sup, norm);
          if (aspect == 0.0) real_axis = std::max(real_axis, norm);
          if (singular_distance(box, bp.x) > delta) far = std::max(far, norm);
          const SurfaceChart chart(q, bp.patch);
          const Eigen::Vector2d alpha = chart.coordinates(bp.x);
          const Eigen::Matrix<double, 3, 2> tan = chart.tangents(alpha);
          double g2 = 0.0;
          for (int i = 0; i < 2; ++i) {
            const double step = 1e-4 / chart.length_scale()(i);
            Eigen::Vector2d da = Eigen::Vector2d::Zero();
            da(i) = step;
            const Matrix2C mp = ctx.m_matrix(rounded_box_point(q, chart.point(alpha + da)));
            const Matrix2C mm = ctx.m_matrix(rounded_box_point(q, chart.point(alpha - da)));
            g2 += ((mp - mm) / (2.0 * step * tan.col(i).norm())).squaredNorm();
          }
          grad = std::max(grad, std::sqrt(g2) / std::abs(ctx.phi_beta(q, bp).beta));
        }
      }
      t.rows.push_back({delta, re, far, sup, grad});
      r.require_small(fmt::format("far_face_zero_delta{}_re{}", delta, re), far, 1e-12);
      c2.push_back(sup);
      c3 = std::max(c3, grad);
    }
    const double lo = *std::min_element(c2.begin(), c2.end());
    const double hi = *std::max_element(c2.begin(), c2.end());
    r.constant(fmt::format("sup_norm_delta{}", delta), hi);
    r.constant(fmt::format("gradient_over_beta_delta{}", delta), c3);
    r.require_at_most(fmt::format("sup_norm_variation_delta{}", delta), 1.0 - lo / hi, 0.1);
    c3_by_delta.push_back(c3);
  }
  r.measure("real_axis_sup_norm", real_axis);
  const double lo = *std::min_element(c3_by_delta.begin(), c3_by_delta.end());
  const double hi = *std::max_element(c3_by_delta.begin(), c3_by_delta.end());
  r.constant("gradient_over_beta", hi);
  r.require_below("gradient_over_beta_finite", hi, INFINITY);
  r.require_at_most("gradient_over_beta_delta_spread", hi / lo, 2.0);
  return r;
}

}  // namespace pmllab
