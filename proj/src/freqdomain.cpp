#include "pmllab/freqdomain.hpp"

#include <array>
#include <cmath>
#include <fstream>

#include <Eigen/SparseLU>
#include <fmt/format.h>
#include <spdlog/spdlog.h>
#include <unsupported/Eigen/IterativeSolvers>
#ifdef PMLLAB_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif

#include "pmllab/errors.hpp"

namespace pmllab {

namespace {

struct Tap {
  int offset;  // along the axis, relative to the node
  double weight;
};

// Second-order first derivative taps at index i of n (one-sided at the ends).
std::array<Tap, 3> second_order_taps(int i, int n, double h, int& count) {
  const double s = 1.0 / (2.0 * h);
  if (i == 0) {
    count = 3;
    return {Tap{0, -3.0 * s}, Tap{1, 4.0 * s}, Tap{2, -1.0 * s}};
  }
  if (i == n - 1) {
    count = 3;
    return {Tap{0, 3.0 * s}, Tap{-1, -4.0 * s}, Tap{-2, 1.0 * s}};
  }
  count = 2;
  return {Tap{1, s}, Tap{-1, -s}, Tap{0, 0.0}};
}

// Fourth-order one-sided first derivative at an end node; dir = +1 looks
// into increasing indices.
std::array<Tap, 5> one_sided_fourth(int dir, double h) {
  const double s = dir / (12.0 * h);
  return {Tap{0, -25.0 * s}, Tap{dir, 48.0 * s}, Tap{2 * dir, -36.0 * s}, Tap{3 * dir, 16.0 * s},
          Tap{4 * dir, -3.0 * s}};
}

Eigen::RowVector2cd dominant_row(const Matrix2C& p) {
  return p.row(0).norm() >= p.row(1).norm() ? p.row(0) : p.row(1);
}

Spinor dominant_col(const Matrix2C& p) { return p.col(0).norm() >= p.col(1).norm() ? p.col(0) : p.col(1); }

void check_grid(const Grid& g, const SpinorField& F) {
  if (!(F.grid() == g)) throw AssemblyError("source field lives on a different grid");
  for (int a = 0; a < 3; ++a) {
    if (g.n[a] < 5) throw AssemblyError("grid needs at least 5 nodes per axis");
  }
}

double relative_residual(const SparseC& a, const Eigen::VectorXcd& x, const Eigen::VectorXcd& b) {
  const double nb = b.norm();
  const double nr = (a * x - b).norm();
  return nb > 0.0 ? nr / nb : nr;
}

// Node-major 2N matrix acting as `scalar` on each spinor component.
SparseC componentwise(const SparseC& scalar) {
  std::vector<Eigen::Triplet<cplx>> t;
  t.reserve(2 * scalar.nonZeros());
  for (int k = 0; k < scalar.outerSize(); ++k) {
    for (SparseC::InnerIterator it(scalar, k); it; ++it) {
      for (int c = 0; c < 2; ++c) {
        t.emplace_back(static_cast<int>(dof(it.row(), c)), static_cast<int>(dof(it.col(), c)), it.value());
      }
    }
  }
  SparseC out(2 * scalar.rows(), 2 * scalar.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

double hermitian_form(const SparseR& m, const Eigen::VectorXcd& u) {
  const Eigen::Index n = m.rows();
  double s = 0.0;
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXcd uc(n);
    for (Eigen::Index i = 0; i < n; ++i) uc(i) = u(dof(i, c));
    s += uc.dot(m.cast<cplx>() * uc).real();
  }
  return s;
}

constexpr double kGauss[2] = {0.5 - 0.5 / 1.7320508075688772, 0.5 + 0.5 / 1.7320508075688772};

}  // namespace

Eigen::VectorXcd to_vector(const SpinorField& f) {
  Eigen::VectorXcd x(2 * f.nodes());
  for (std::size_t node = 0; node < f.nodes(); ++node) {
    x(dof(node, 0)) = f.component(0)[node];
    x(dof(node, 1)) = f.component(1)[node];
  }
  return x;
}

SpinorField to_field(const Grid& g, const Eigen::VectorXcd& x) {
  SpinorField f(g);
  for (std::size_t node = 0; node < g.size(); ++node) f.set(node, Spinor(x(dof(node, 0)), x(dof(node, 1))));
  return f;
}

SparseC SparseComplexOperator::matrix() const {
  SparseC a(static_cast<Eigen::Index>(dimension), static_cast<Eigen::Index>(dimension));
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

SolveResult solve(const SparseC& a, const Eigen::VectorXcd& b, const SolveOptions& opts) {
  if (a.rows() != a.cols() || a.rows() != b.size()) throw AssemblyError("operator is not square or rhs size differs");
  SolveResult r;
  if (static_cast<std::size_t>(a.rows()) <= opts.direct_limit) {
#ifdef PMLLAB_HAVE_UMFPACK
    Eigen::UmfPackLU<SparseC> lu;
    lu.umfpackControl()(UMFPACK_ORDERING) = UMFPACK_ORDERING_METIS;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw SingularOperatorError("sparse LU failed (UMFPACK)");
#else
    Eigen::SparseLU<SparseC, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) throw SingularOperatorError("sparse LU failed: " + lu.lastErrorMessage());
#endif
    r.x = lu.solve(b);
  } else {
    Eigen::GMRES<SparseC, Eigen::IncompleteLUT<cplx>> gmres;
    gmres.set_restart(opts.restart);
    gmres.setMaxIterations(opts.max_iterations);
    gmres.setTolerance(opts.tolerance);
    gmres.compute(a);
    if (gmres.info() != Eigen::Success) throw SingularOperatorError("incomplete LU preconditioner failed");
    r.x = gmres.solve(b);
    r.iterative = true;
    r.iterations = static_cast<int>(gmres.iterations());
    if (gmres.info() != Eigen::Success) {
      throw NonConvergenceError(fmt::format("GMRES stopped after {} iterations at residual {:.3g}",
                                            gmres.iterations(), gmres.error()));
    }
  }
  r.residual = relative_residual(a, r.x, b);
  if (!(r.residual <= opts.accept)) {
    throw SingularOperatorError(fmt::format("solve residual {:.3g} above {:.1g}", r.residual, opts.accept));
  }
  return r;
}

SolveResult solve(const SparseComplexOperator& op, const SolveOptions& opts) { return solve(op.matrix(), op.rhs, opts); }

SparseComplexOperator assemble_stretched(const StretchContext& ctx, const Grid& g, const SpinorField& F) {
  check_grid(g, F);
  const auto& A = pauli_matrices();
  const cplx tau = ctx.tau();
  SparseComplexOperator op;
  op.grid = g;
  op.dimension = 2 * g.size();
  op.rhs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(op.dimension));
  op.triplets.reserve(g.size() * 40);

  std::vector<std::pair<std::size_t, Matrix2C>> blocks;
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto c = g.coords(node);
    const Vec3 x = g.point(node);
    const Vec3C fac = ctx.derivative_factors(x);
    blocks.clear();
    blocks.emplace_back(node, tau * Matrix2C::Identity());
    for (int a = 0; a < 3; ++a) {
      int count = 0;
      const auto taps = second_order_taps(c[a], g.n[a], g.h(a), count);
      for (int m = 0; m < count; ++m) {
        const std::size_t nb = static_cast<std::size_t>(static_cast<long>(node) + taps[m].offset *
                                                                                     static_cast<long>(g.stride(a)));
        blocks.emplace_back(nb, fac(a) * taps[m].weight * A[a]);
      }
    }
    const Spinor f = F.at(node);
    const int r0 = static_cast<int>(dof(node, 0));
    if (!g.on_boundary(node)) {
      for (const auto& [col, m] : blocks) {
        for (int i = 0; i < 2; ++i) {
          for (int j = 0; j < 2; ++j) {
            if (m(i, j) != cplx(0.0)) op.triplets.emplace_back(r0 + i, static_cast<int>(dof(col, j)), m(i, j));
          }
        }
      }
      op.rhs(r0) = f(0);
      op.rhs(r0 + 1) = f(1);
      continue;
    }
    const Vec3 nu = grid_boundary_normal(g, node);
    op.constraints.push_back({node, nu});
    const Eigen::RowVector2cd lm = dominant_row(projector(Sign::minus, nu));
    const Eigen::RowVector2cd lp = dominant_row(projector(Sign::plus, nu));
    for (int j = 0; j < 2; ++j) op.triplets.emplace_back(r0, static_cast<int>(dof(node, j)), lm(j));
    for (const auto& [col, m] : blocks) {
      const Eigen::RowVector2cd row = lp * m;
      for (int j = 0; j < 2; ++j) {
        if (row(j) != cplx(0.0)) op.triplets.emplace_back(r0 + 1, static_cast<int>(dof(col, j)), row(j));
      }
    }
    op.rhs(r0 + 1) = lp * f;
  }
  return op;
}

SpinorField solve_stretched(const StretchContext& ctx, const Grid& g, const SpinorField& F, const SolveOptions& opts,
                            SolveResult* info) {
  const SparseComplexOperator op = assemble_stretched(ctx, g, F);
  SolveResult r = solve(op, opts);
  SpinorField u = to_field(g, r.x);
  if (info != nullptr) *info = std::move(r);
  return u;
}

cplx HelmholtzAssembly::bilinear(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const {
  const Eigen::Index n = form.rows();
  cplx s = 0.0;
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXcd uc(n), vc(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      uc(i) = u(dof(i, c));
      vc(i) = v(dof(i, c));
    }
    const Eigen::VectorXcd ku = form * uc;
    s += (vc.array() * ku.array()).sum();
  }
  return s;
}

SparseC HelmholtzAssembly::reduced() const {
  const SparseC k = componentwise(form);
  SparseC r = SparseC(test.transpose()) * k * trial;
  r.makeCompressed();
  return r;
}

Eigen::VectorXcd HelmholtzAssembly::reduced_load() const { return test.transpose() * load; }

double HelmholtzAssembly::l2_squared(const Eigen::VectorXcd& u) const { return hermitian_form(mass, u); }
double HelmholtzAssembly::gradient_squared(const Eigen::VectorXcd& u) const { return hermitian_form(stiffness, u); }
double HelmholtzAssembly::boundary_squared(const Eigen::VectorXcd& u) const {
  return hermitian_form(boundary_mass, u);
}

SpinorField scheme_derivative(const SpinorField& f, int axis) {
  const Grid& g = f.grid();
  SpinorField out(g);
  for (std::size_t node = 0; node < g.size(); ++node) {
    int count = 0;
    const auto taps = second_order_taps(g.coords(node)[axis], g.n[axis], g.h(axis), count);
    Spinor d = Spinor::Zero();
    for (int m = 0; m < count; ++m) {
      d += taps[m].weight *
           f.at(static_cast<std::size_t>(static_cast<long>(node) + taps[m].offset * static_cast<long>(g.stride(axis))));
    }
    out.set(node, d);
  }
  return out;
}

HelmholtzAssembly assemble_helmholtz(const StretchContext& ctx, const Grid& g, const SpinorField& F,
                                     TestSpace test_space) {
  check_grid(g, F);
  const auto& A = pauli_matrices();
  const cplx tau = ctx.tau();
  const cplx tau2 = tau * tau;
  HelmholtzAssembly h;
  h.grid = g;
  h.tau = tau;
  h.test_space = test_space;
  h.load = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(2 * g.size()));

  std::vector<Eigen::Triplet<cplx>> tk;
  std::vector<Eigen::Triplet<double>> tm, ts, tb;
  const std::size_t cells = static_cast<std::size_t>(g.n[0] - 1) * (g.n[1] - 1) * (g.n[2] - 1);
  tk.reserve(cells * 64);
  tm.reserve(cells * 64);
  ts.reserve(cells * 64);

  const double vol = g.cell_volume();
  for (int k = 0; k + 1 < g.n[2]; ++k) {
    for (int j = 0; j + 1 < g.n[1]; ++j) {
      for (int i = 0; i + 1 < g.n[0]; ++i) {
        std::array<std::size_t, 8> nodes{};
        for (int b = 0; b < 8; ++b) nodes[b] = g.index(i + (b & 1), j + ((b >> 1) & 1), k + ((b >> 2) & 1));
        Eigen::Matrix<cplx, 8, 8> ke = Eigen::Matrix<cplx, 8, 8>::Zero();
        Eigen::Matrix<double, 8, 8> me = Eigen::Matrix<double, 8, 8>::Zero();
        Eigen::Matrix<double, 8, 8> se = Eigen::Matrix<double, 8, 8>::Zero();
        for (int q = 0; q < 8; ++q) {
          const double xi[3] = {kGauss[q & 1], kGauss[(q >> 1) & 1], kGauss[(q >> 2) & 1]};
          const Vec3 x = g.point(i, j, k) + Vec3(xi[0] * g.h(0), xi[1] * g.h(1), xi[2] * g.h(2));
          const double w = vol / 8.0;
          double phi[8];
          double dphi[3][8];
          for (int b = 0; b < 8; ++b) {
            double p1[3];
            double d1[3];
            for (int d = 0; d < 3; ++d) {
              const bool hi = (b >> d) & 1;
              p1[d] = hi ? xi[d] : 1.0 - xi[d];
              d1[d] = (hi ? 1.0 : -1.0) / g.h(d);
            }
            phi[b] = p1[0] * p1[1] * p1[2];
            dphi[0][b] = d1[0] * p1[1] * p1[2];
            dphi[1][b] = p1[0] * d1[1] * p1[2];
            dphi[2][b] = p1[0] * p1[1] * d1[2];
          }
          const Vec3C c = ctx.p_coefficients(x);
          const cplx pi = ctx.Pi(x);
          const Vec3C fac = ctx.derivative_factors(x);
          for (int a = 0; a < 8; ++a) {
            for (int b = 0; b < 8; ++b) {
              double grad = 0.0;
              cplx stiff = 0.0;
              for (int d = 0; d < 3; ++d) {
                grad += dphi[d][a] * dphi[d][b];
                stiff += c(d) * dphi[d][a] * dphi[d][b];
              }
              ke(a, b) += w * (stiff + tau2 * pi * phi[a] * phi[b]);
              me(a, b) += w * phi[a] * phi[b];
              se(a, b) += w * grad;
            }
          }
          Spinor fq = Spinor::Zero();
          std::array<Spinor, 3> dfq{Spinor::Zero(), Spinor::Zero(), Spinor::Zero()};
          for (int b = 0; b < 8; ++b) {
            const Spinor fb = F.at(nodes[b]);
            fq += phi[b] * fb;
            for (int d = 0; d < 3; ++d) dfq[d] += dphi[d][b] * fb;
          }
          Spinor f = tau * fq;
          for (int d = 0; d < 3; ++d) f -= fac(d) * (A[d] * dfq[d]);
          f *= pi;
          for (int a = 0; a < 8; ++a) {
            h.load(dof(nodes[a], 0)) += w * phi[a] * f(0);
            h.load(dof(nodes[a], 1)) += w * phi[a] * f(1);
          }
        }
        for (int a = 0; a < 8; ++a) {
          for (int b = 0; b < 8; ++b) {
            const int r = static_cast<int>(nodes[a]);
            const int col = static_cast<int>(nodes[b]);
            tk.emplace_back(r, col, ke(a, b));
            tm.emplace_back(r, col, me(a, b));
            ts.emplace_back(r, col, se(a, b));
          }
        }
      }
    }
  }

  // Faces: beta = tau (zero mean curvature), Phi = Pi tau / (tau + sigma_a).
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3;
    const int c = (a + 2) % 3;
    const double area = g.h(b) * g.h(c);
    for (int side : {0, g.n[a] - 1}) {
      for (int p = 0; p + 1 < g.n[b]; ++p) {
        for (int q = 0; q + 1 < g.n[c]; ++q) {
          std::array<std::size_t, 4> nodes{};
          for (int m = 0; m < 4; ++m) {
            std::array<int, 3> ix{};
            ix[a] = side;
            ix[b] = p + (m & 1);
            ix[c] = q + ((m >> 1) & 1);
            nodes[m] = g.index(ix[0], ix[1], ix[2]);
          }
          Eigen::Matrix4cd be = Eigen::Matrix4cd::Zero();
          Eigen::Matrix4d bm = Eigen::Matrix4d::Zero();
          for (int qq = 0; qq < 4; ++qq) {
            const double s = kGauss[qq & 1];
            const double t = kGauss[(qq >> 1) & 1];
            Vec3 x = g.point(nodes[0]);
            x(b) += s * g.h(b);
            x(c) += t * g.h(c);
            const cplx phi_face = ctx.Pi(x) * tau / (tau + ctx.sigma(a, x(a)));
            const double w = area / 4.0;
            const double psi[4] = {(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
            for (int m = 0; m < 4; ++m) {
              for (int l = 0; l < 4; ++l) {
                be(m, l) += w * phi_face * tau * psi[m] * psi[l];
                bm(m, l) += w * psi[m] * psi[l];
              }
            }
          }
          for (int m = 0; m < 4; ++m) {
            for (int l = 0; l < 4; ++l) {
              tk.emplace_back(static_cast<int>(nodes[m]), static_cast<int>(nodes[l]), be(m, l));
              tb.emplace_back(static_cast<int>(nodes[m]), static_cast<int>(nodes[l]), bm(m, l));
            }
          }
        }
      }
    }
  }

  const auto n = static_cast<Eigen::Index>(g.size());
  h.form.resize(n, n);
  h.form.setFromTriplets(tk.begin(), tk.end());
  h.mass.resize(n, n);
  h.mass.setFromTriplets(tm.begin(), tm.end());
  h.stiffness.resize(n, n);
  h.stiffness.setFromTriplets(ts.begin(), ts.end());
  h.boundary_mass.resize(n, n);
  h.boundary_mass.setFromTriplets(tb.begin(), tb.end());

  std::vector<Eigen::Triplet<cplx>> ttrial, ttest;
  int col = 0;
  for (std::size_t node = 0; node < g.size(); ++node) {
    const int r0 = static_cast<int>(dof(node, 0));
    if (!g.on_boundary(node)) {
      for (int c = 0; c < 2; ++c) {
        ttrial.emplace_back(r0 + c, col, 1.0);
        ttest.emplace_back(r0 + c, col, 1.0);
        ++col;
      }
      continue;
    }
    const Vec3 x = g.point(node);
    const Vec3C nt = checked_nu_tilde(ctx, x, grid_boundary_normal(g, node));
    const Matrix2C pp = projector(Sign::plus, nt);
    const Spinor e = dominant_col(pp);
    const Spinor s = test_space == TestSpace::minus_transpose ? Spinor(dominant_row(pp).transpose())
                                                              : Spinor(dominant_row(projector(Sign::minus, nt)).transpose());
    for (int c = 0; c < 2; ++c) {
      ttrial.emplace_back(r0 + c, col, e(c));
      ttest.emplace_back(r0 + c, col, s(c));
    }
    ++col;
  }
  h.trial.resize(2 * n, col);
  h.trial.setFromTriplets(ttrial.begin(), ttrial.end());
  h.test.resize(2 * n, col);
  h.test.setFromTriplets(ttest.begin(), ttest.end());
  return h;
}

SpinorField solve_helmholtz(const HelmholtzAssembly& h, const SolveOptions& opts, SolveResult* info) {
  SolveResult r = solve(h.reduced(), h.reduced_load(), opts);
  SpinorField u = to_field(h.grid, h.trial * r.x);
  if (info != nullptr) *info = std::move(r);
  return u;
}

NodeResidual second_bc_residual(const SpinorField& u, const StretchContext& ctx) {
  const Grid& g = u.grid();
  const cplx tau = ctx.tau();
  NodeResidual out;
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto faces = node_faces(g, node);
    if (faces.size() != 1) continue;
    const int k = faces.front();
    const int a = face_axis(k);
    const Vec3 nu = face_normal(k);
    const int dir = k <= 3 ? 1 : -1;  // into the box
    const Vec3 x = g.point(node);
    Spinor du = Spinor::Zero();
    for (const Tap& t : one_sided_fourth(dir, g.h(a))) {
      du += t.weight * u.at(static_cast<std::size_t>(static_cast<long>(node) + t.offset *
                                                                                static_cast<long>(g.stride(a))));
    }
    const cplx fa = tau / (tau + ctx.sigma(a, x(a)));
    const Spinor r = projector(Sign::plus, nu) * (fa * nu(a) * du + tau * u.at(node));
    out.nodes.push_back(node);
    out.values.push_back(r.norm());
    out.max = std::max(out.max, r.norm());
  }
  return out;
}

NodeResidual helmholtz_vs_stretched(const SpinorField& u, const StretchContext& ctx, const SpinorField& F) {
  const Grid& g = u.grid();
  if (!(F.grid() == g)) throw AssemblyError("source field lives on a different grid");
  const auto& A = pauli_matrices();
  const cplx tau = ctx.tau();
  auto central = [&](const SpinorField& f, std::size_t node, int a) {
    return Spinor((f.at(node + g.stride(a)) - f.at(node - g.stride(a))) / (2.0 * g.h(a)));
  };
  NodeResidual out;
  for (std::size_t node = 0; node < g.size(); ++node) {
    const auto c = g.coords(node);
    bool deep = true;
    for (int a = 0; a < 3; ++a) deep = deep && c[a] >= 2 && c[a] <= g.n[a] - 3;
    if (!deep) continue;
    const Vec3 x = g.point(node);
    const cplx pi = ctx.Pi(x);
    const Vec3C fac = ctx.derivative_factors(x);
    Spinor pu = Spinor::Zero();
    Spinor dF = Spinor::Zero();
    for (int a = 0; a < 3; ++a) {
      const std::size_t up = node + g.stride(a);
      const std::size_t dn = node - g.stride(a);
      const cplx cp = ctx.p_coefficients(g.point(up))(a);
      const cplx cm = ctx.p_coefficients(g.point(dn))(a);
      pu += (cp * central(u, up, a) - cm * central(u, dn, a)) / (2.0 * g.h(a));
      dF += fac(a) * (A[a] * central(F, node, a));
    }
    const Spinor r = pu - tau * tau * pi * u.at(node) - pi * (dF - tau * F.at(node));
    out.nodes.push_back(node);
    out.values.push_back(r.norm());
    out.max = std::max(out.max, r.norm());
  }
  return out;
}

void write_matrix_coo(const std::string& path, const SparseC& a) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << fmt::format("% {} {} {}\n", a.rows(), a.cols(), a.nonZeros());
  for (int k = 0; k < a.outerSize(); ++k) {
    for (SparseC::InnerIterator it(a, k); it; ++it) {
      os << fmt::format("{} {} {:.17g} {:.17g}\n", it.row(), it.col(), it.value().real(), it.value().imag());
    }
  }
}

}  // namespace pmllab
