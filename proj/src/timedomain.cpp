#include "pmllab/timedomain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include <Eigen/SparseCholesky>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "pmllab/errors.hpp"
#include "pmllab/kernels/kernels.hpp"

namespace pmllab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOverflowGuard = 1e150;

// One-sided fourth-order first-derivative weights (times 1/(12 h)) on five
// consecutive nodes starting at the boundary.
constexpr double kLeft0[5] = {-25.0, 48.0, -36.0, 16.0, -3.0};
constexpr double kLeft1[5] = {-3.0, -10.0, 18.0, -6.0, 1.0};
constexpr double kCentral[5] = {1.0, -8.0, 0.0, 8.0, -1.0};
constexpr double kRight1[5] = {-1.0, 6.0, -18.0, 10.0, 3.0};
constexpr double kRight0[5] = {3.0, -16.0, 36.0, -48.0, 25.0};

void scaled(const double* w, double s, double out[5]) {
  for (int m = 0; m < 5; ++m) out[m] = w[m] * s;
}

// Weights and first node of the five-point stencil used at index i of n.
const double* stencil_for(int i, int n, int& first) {
  if (i == 0) {
    first = 0;
    return kLeft0;
  }
  if (i == 1) {
    first = 0;
    return kLeft1;
  }
  if (i == n - 2) {
    first = n - 5;
    return kRight1;
  }
  if (i == n - 1) {
    first = n - 5;
    return kRight0;
  }
  first = i - 2;
  return kCentral;
}

std::vector<BoundaryNode> collect_boundary(const Grid& g) {
  std::vector<BoundaryNode> out;
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (!g.on_boundary(node)) continue;
    BoundaryNode b{node, projector(Sign::minus, grid_boundary_normal(g, node)), {}};
    for (int k : node_faces(g, node)) b.axes.push_back(face_axis(k));
    out.push_back(std::move(b));
  }
  return out;
}

void check_finite(const SpinorField& f, const char* what, double t) {
  for (const cplx& v : f.data()) {
    if (!(std::abs(v.real()) < kOverflowGuard && std::abs(v.imag()) < kOverflowGuard)) {
      throw StabilityError(fmt::format("{} exceeded the overflow guard at t = {:.6g}", what, t));
    }
  }
}

}  // namespace

double SourceSpec::window(double t) const {
  if (t <= 0.0 || t >= duration) return 0.0;
  const double s = std::sin(kPi * t / duration);
  return s * s * s * s;
}

double SourceSpec::bump(const Vec3& x) const {
  const double rho2 = (x - center).squaredNorm() / (radius * radius);
  if (rho2 >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - rho2));
}

cplx SourceSpec::window_laplace(cplx tau) const {
  const double w = kPi / duration;
  const cplx edge = 1.0 - std::exp(-tau * duration);
  return edge * (3.0 / (8.0 * tau) - tau / (2.0 * (tau * tau + 4.0 * w * w)) + tau / (8.0 * (tau * tau + 16.0 * w * w)));
}

void SourceSpec::validate(const BoxDomain& box) const {
  if (!(radius > 0.0)) throw DomainError("source radius must be positive");
  if (!(duration > 0.0)) throw DomainError("source duration must be positive");
  for (int a = 0; a < 3; ++a) {
    if (std::abs(center(a)) + radius > box.inner_half_length(a) + 1e-12) {
      throw DomainError(fmt::format("source support leaves the inner box along axis {}", a + 1));
    }
  }
}

SpinorField SourceSpec::spatial(const Grid& g) const {
  SpinorField f(g);
  for (std::size_t node = 0; node < g.size(); ++node) {
    const double b = bump(g.point(node));
    if (b != 0.0) f.set(node, amplitude * b * polarization);
  }
  return f;
}

void SimConfig::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (n[a] < 5) throw DomainError("grid needs at least 5 nodes per axis");
  }
  if (!(cfl > 0.0 && cfl <= 1.0)) throw DomainError(fmt::format("cfl = {} outside (0, 1]", cfl));
  if (!(final_time > 0.0)) throw DomainError("final time must be positive");
  if (snapshot_stride < 0 || dual_stride < 0) throw DomainError("strides must be >= 0");
  if (threads < 1) throw DomainError("threads must be >= 1");
}

SpinorField SplitState::total() const {
  SpinorField s = U[0];
  s += U[1];
  s += U[2];
  return s;
}

void grid_derivative(const Grid& g, int axis, const double* in, double* out, int threads) {
  const auto& kt = kernels::active();
  const int n = g.n[axis];
  const double inv = 1.0 / (12.0 * g.h(axis));
  double w[5];
  const double* rows[5];
  if (axis == 0) {
    const long lines = static_cast<long>(g.n[1]) * g.n[2];
#pragma omp parallel for num_threads(threads) if (threads > 1) private(w, rows)
    for (long line = 0; line < lines; ++line) {
      const std::size_t base = line * n;
      for (int i : {0, 1, n - 2, n - 1}) {
        int first = 0;
        scaled(stencil_for(i, n, first), inv, w);
        for (int m = 0; m < 5; ++m) rows[m] = in + 2 * (base + first + m);
        kt.stencil5(rows, w, out + 2 * (base + i), 2);
      }
      scaled(kCentral, inv, w);
      for (int m = 0; m < 5; ++m) rows[m] = in + 2 * (base + m);
      kt.stencil5(rows, w, out + 2 * (base + 2), 2 * static_cast<std::size_t>(n - 4));
    }
    return;
  }
  const std::size_t run = axis == 1 ? static_cast<std::size_t>(g.n[0]) : static_cast<std::size_t>(g.n[0]) * g.n[1];
  const std::size_t stride = g.stride(axis);
  const int outer = axis == 1 ? g.n[2] : 1;
  const std::size_t outer_stride = static_cast<std::size_t>(g.n[0]) * g.n[1];
#pragma omp parallel for collapse(2) num_threads(threads) if (threads > 1) private(w, rows)
  for (int k = 0; k < outer; ++k) {
    for (int i = 0; i < n; ++i) {
      const std::size_t base = k * outer_stride;
      int first = 0;
      scaled(stencil_for(i, n, first), inv, w);
      for (int m = 0; m < 5; ++m) rows[m] = in + 2 * (base + (first + m) * stride);
      kt.stencil5(rows, w, out + 2 * (base + i * stride), 2 * run);
    }
  }
}

SplitSolver::SplitSolver(const BoxDomain& box, const Grid& grid, Profiles profiles, SourceSpec source, int threads)
    : box_(box),
      grid_(grid),
      profiles_(std::move(profiles)),
      source_(std::move(source)),
      threads_(threads),
      k1_(grid),
      k2_(grid),
      k3_(grid),
      k4_(grid),
      stage_(grid),
      total_(grid),
      d0_(grid),
      d1_(grid) {
  source_.validate(box_);
  source_shape_ = source_.spatial(grid_);
  for (int a = 0; a < 3; ++a) {
    sigma_[a].resize(grid_.size());
    for (std::size_t node = 0; node < grid_.size(); ++node) {
      sigma_[a][node] = profiles_[a](grid_.point(node)(a));
    }
  }
  boundary_ = collect_boundary(grid_);
}

double SplitSolver::max_sigma() const {
  double m = 0.0;
  for (const auto& s : sigma_) m = std::max(m, *std::max_element(s.begin(), s.end()));
  return m;
}

SpinorField SplitSolver::source_at(double t) const {
  SpinorField f = source_shape_;
  f *= source_.window(t);
  return f;
}

void SplitSolver::rhs(const SplitState& s, double t, SplitState& out) const {
  const auto& kt = kernels::active();
  const std::size_t nd = 2 * grid_.size();
  for (int c = 0; c < 2; ++c) {
    kt.sum3(s.U[0].raw(c), s.U[1].raw(c), s.U[2].raw(c), total_.raw(c), nd);
  }
  const double fw = source_.window(t) / 3.0;
  for (int a = 0; a < 3; ++a) {
    grid_derivative(grid_, a, total_.raw(0), d0_.raw(0), threads_);
    grid_derivative(grid_, a, total_.raw(1), d1_.raw(0), threads_);
    SpinorField& o = out.U[a];
    kt.pauli_decay(a, sigma_[a].data(), s.U[a].raw(0), s.U[a].raw(1), d0_.raw(0), d1_.raw(0), o.raw(0), o.raw(1),
                   grid_.size());
    if (fw != 0.0) {
      kt.axpy(fw, source_shape_.raw(0), o.raw(0), nd);
      kt.axpy(fw, source_shape_.raw(1), o.raw(1), nd);
    }
  }
  out.t = t;
}

void SplitSolver::apply_boundary(SplitState& s) const {
  for (const BoundaryNode& b : boundary_) {
    const Spinor sum = s.U[0].at(b.node) + s.U[1].at(b.node) + s.U[2].at(b.node);
    const Spinor c = (b.minus * sum) / static_cast<double>(b.axes.size());
    for (int a : b.axes) s.U[a].set(b.node, s.U[a].at(b.node) - c);
  }
}

void SplitSolver::step(SplitState& s, double dt) {
  const auto& kt = kernels::active();
  const std::size_t nd = 4 * grid_.size();
  auto combine = [&](const SplitState& base, double a, const SplitState& k, SplitState& out) {
    for (int j = 0; j < 3; ++j) kt.lincomb(base.U[j].raw(0), a, k.U[j].raw(0), out.U[j].raw(0), nd);
  };
  const double t = s.t;
  rhs(s, t, k1_);
  combine(s, 0.5 * dt, k1_, stage_);
  apply_boundary(stage_);
  rhs(stage_, t + 0.5 * dt, k2_);
  combine(s, 0.5 * dt, k2_, stage_);
  apply_boundary(stage_);
  rhs(stage_, t + 0.5 * dt, k3_);
  combine(s, dt, k3_, stage_);
  apply_boundary(stage_);
  rhs(stage_, t + dt, k4_);
  for (int j = 0; j < 3; ++j) {
    double* u = s.U[j].raw(0);
    kt.axpy(dt / 6.0, k1_.U[j].raw(0), u, nd);
    kt.axpy(dt / 3.0, k2_.U[j].raw(0), u, nd);
    kt.axpy(dt / 3.0, k3_.U[j].raw(0), u, nd);
    kt.axpy(dt / 6.0, k4_.U[j].raw(0), u, nd);
  }
  apply_boundary(s);
  s.t = t + dt;
  for (int j = 0; j < 3; ++j) check_finite(s.U[j], "split field", s.t);
}

UnsplitSolver::UnsplitSolver(const BoxDomain& box, const Grid& grid, SourceSpec source)
    : grid_(grid),
      source_(std::move(source)),
      k1_(grid),
      k2_(grid),
      k3_(grid),
      k4_(grid),
      stage_(grid),
      d0_(grid),
      d1_(grid) {
  source_.validate(box);
  source_shape_ = source_.spatial(grid_);
  boundary_ = collect_boundary(grid_);
}

void UnsplitSolver::rhs(const SpinorField& u, double t, SpinorField& out) const {
  const auto& kt = kernels::active();
  const std::size_t nd = 2 * grid_.size();
  out.fill_zero();
  std::vector<double> zero_sigma(grid_.size(), 0.0);
  SpinorField part(grid_);
  for (int a = 0; a < 3; ++a) {
    grid_derivative(grid_, a, u.raw(0), d0_.raw(0));
    grid_derivative(grid_, a, u.raw(1), d1_.raw(0));
    kt.pauli_decay(a, zero_sigma.data(), u.raw(0), u.raw(1), d0_.raw(0), d1_.raw(0), part.raw(0), part.raw(1),
                   grid_.size());
    kt.axpy(1.0, part.raw(0), out.raw(0), 2 * nd);
  }
  const double fw = source_.window(t);
  if (fw != 0.0) kt.axpy(fw, source_shape_.raw(0), out.raw(0), 2 * nd);
}

void UnsplitSolver::apply_boundary(SpinorField& u) const {
  for (const BoundaryNode& b : boundary_) u.set(b.node, u.at(b.node) - b.minus * u.at(b.node));
}

void UnsplitSolver::step(SpinorField& u, double& t, double dt) {
  const auto& kt = kernels::active();
  const std::size_t nd = 4 * grid_.size();
  rhs(u, t, k1_);
  kt.lincomb(u.raw(0), 0.5 * dt, k1_.raw(0), stage_.raw(0), nd);
  apply_boundary(stage_);
  rhs(stage_, t + 0.5 * dt, k2_);
  kt.lincomb(u.raw(0), 0.5 * dt, k2_.raw(0), stage_.raw(0), nd);
  apply_boundary(stage_);
  rhs(stage_, t + 0.5 * dt, k3_);
  kt.lincomb(u.raw(0), dt, k3_.raw(0), stage_.raw(0), nd);
  apply_boundary(stage_);
  rhs(stage_, t + dt, k4_);
  kt.axpy(dt / 6.0, k1_.raw(0), u.raw(0), nd);
  kt.axpy(dt / 3.0, k2_.raw(0), u.raw(0), nd);
  kt.axpy(dt / 3.0, k3_.raw(0), u.raw(0), nd);
  kt.axpy(dt / 6.0, k4_.raw(0), u.raw(0), nd);
  apply_boundary(u);
  t += dt;
  check_finite(u, "field", t);
}

void Recording::write_probe_csv(const std::string& path, std::size_t probe) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "t,re_u1,im_u1,re_u2,im_u2\n";
  const auto& series = probe_series.at(probe);
  for (std::size_t k = 0; k < times.size(); ++k) {
    os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", times[k], series[k](0).real(),
                      series[k](0).imag(), series[k](1).real(), series[k](1).imag());
  }
}

struct DualNorm::Impl {
  Grid grid;
  std::vector<int> interior;  // node -> interior index or -1
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  int count = 0;
};

DualNorm::DualNorm(const Grid& g) : impl_(std::make_unique<Impl>()) {
  impl_->grid = g;
  impl_->interior.assign(g.size(), -1);
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (!g.on_boundary(node)) impl_->interior[node] = impl_->count++;
  }
  std::vector<Eigen::Triplet<double>> trip;
  for (std::size_t node = 0; node < g.size(); ++node) {
    const int row = impl_->interior[node];
    if (row < 0) continue;
    double diag = 1.0;
    for (int a = 0; a < 3; ++a) {
      const double w = 1.0 / (g.h(a) * g.h(a));
      diag += 2.0 * w;
      for (int sgn : {-1, 1}) {
        const std::size_t nb = sgn < 0 ? node - g.stride(a) : node + g.stride(a);
        const int col = impl_->interior[nb];
        if (col >= 0) trip.emplace_back(row, col, -w);
      }
    }
    trip.emplace_back(row, row, diag);
  }
  Eigen::SparseMatrix<double> m(impl_->count, impl_->count);
  m.setFromTriplets(trip.begin(), trip.end());
  impl_->ldlt.compute(m);
  if (impl_->ldlt.info() != Eigen::Success) throw SingularOperatorError("I - Laplacian factorisation failed");
}

DualNorm::~DualNorm() = default;

double DualNorm::squared(const SpinorField& w) const {
  const Grid& g = impl_->grid;
  double total = 0.0;
  for (int c = 0; c < 2; ++c) {
    for (int part = 0; part < 2; ++part) {
      Eigen::VectorXd b(impl_->count);
      for (std::size_t node = 0; node < g.size(); ++node) {
        const int row = impl_->interior[node];
        if (row < 0) continue;
        const cplx v = w.component(c)[node];
        b(row) = part == 0 ? v.real() : v.imag();
      }
      const Eigen::VectorXd x = impl_->ldlt.solve(b);
      total += g.cell_volume() * b.dot(x);
    }
  }
  return total;
}

RunResult run(const SimConfig& config, const BoxDomain& box, const Profiles& profiles, const SourceSpec& source) {
  config.validate();
  const Grid grid = Grid::over_box(box, config.n);
  SplitSolver solver(box, grid, profiles, source, config.threads);
  const double dt_max = config.cfl * grid.h.minCoeff();
  const int steps = std::max(1, static_cast<int>(std::ceil(config.final_time / dt_max - 1e-12)));
  const double dt = config.final_time / steps;
  if (solver.max_sigma() * dt > 1.0) {
    spdlog::warn("sigma_max * dt = {:.3g} > 1; absorption is under-resolved in time", solver.max_sigma() * dt);
  }

  RunResult out{Recording{}, SplitState(grid)};
  Recording& rec = out.recording;
  rec.grid = grid;
  rec.dt = dt;
  rec.source_off = source.duration;
  rec.snapshot_stride = config.snapshot_stride;
  rec.probe_points = config.probes;
  for (const Vec3& p : config.probes) rec.probe_nodes.push_back(grid.nearest(p));
  rec.probe_series.resize(config.probes.size());

  std::unique_ptr<DualNorm> dual;
  if (config.dual_stride > 0) dual = std::make_unique<DualNorm>(grid);
  SplitState& state = out.final_state;
  SplitState deriv(grid);

  auto record = [&](int step) {
    const SpinorField total = state.total();
    rec.times.push_back(state.t);
    for (std::size_t p = 0; p < rec.probe_nodes.size(); ++p) rec.probe_series[p].push_back(total.at(rec.probe_nodes[p]));
    rec.l2.push_back(total.l2_norm());
    rec.boundary_l2.push_back(total.boundary_l2_norm());
    rec.source_l2.push_back(solver.source_at(state.t).l2_norm());
    rec.max_abs.push_back(total.max_abs());
    double e = 0.0;
    for (const auto& u : state.U) e += std::pow(u.l2_norm(), 2);
    rec.energy.push_back(e);
    if (config.snapshot_stride > 0 && step % config.snapshot_stride == 0) {
      Snapshot snap{state.t, total, {}};
      if (config.snapshot_split) snap.split.assign(state.U.begin(), state.U.end());
      rec.snapshots.push_back(std::move(snap));
    }
    if (dual && step % config.dual_stride == 0) {
      solver.rhs(state, state.t, deriv);
      double du = 0.0;
      double dd = 0.0;
      for (int j = 0; j < 3; ++j) {
        du += dual->squared(state.U[j]);
        dd += dual->squared(deriv.U[j]);
      }
      rec.dual_times.push_back(state.t);
      rec.dual_u.push_back(du);
      rec.dual_dt.push_back(dd);
    }
  };

  record(0);
  for (int step = 1; step <= steps; ++step) {
    solver.step(state, dt);
    state.t = step * dt;
    record(step);
  }
  spdlog::debug("time-domain run: {} steps of {:.4g} on {}x{}x{} ({})", steps, dt, grid.n[0], grid.n[1], grid.n[2],
                kernels::isa_name(kernels::active_isa()));
  return out;
}

WeightedNorms weighted_norms(const Recording& rec, double lambda) {
  auto integrate = [&](const std::vector<double>& t, auto&& value) {
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < t.size(); ++k) {
      s += 0.5 * (t[k + 1] - t[k]) * (value(k) + value(k + 1));
    }
    return s;
  };
  auto w = [&](double t) { return std::exp(-2.0 * lambda * t); };
  WeightedNorms n{};
  n.volume = std::sqrt(integrate(rec.times, [&](std::size_t k) { return w(rec.times[k]) * rec.l2[k] * rec.l2[k]; }));
  n.boundary = std::sqrt(integrate(
      rec.times, [&](std::size_t k) { return w(rec.times[k]) * rec.boundary_l2[k] * rec.boundary_l2[k]; }));
  n.source = std::sqrt(
      integrate(rec.times, [&](std::size_t k) { return w(rec.times[k]) * rec.source_l2[k] * rec.source_l2[k]; }));
  n.dual = std::sqrt(integrate(rec.dual_times, [&](std::size_t k) {
    return w(rec.dual_times[k]) * (lambda * lambda * rec.dual_u[k] + rec.dual_dt[k]);
  }));
  return n;
}

LaplaceTrace laplace_of_trace(const Recording& rec, cplx tau) {
  const auto& snaps = rec.snapshots;
  if (snaps.size() < 2) throw std::invalid_argument("Laplace transform needs at least two snapshots");
  const std::size_t m = snaps.size() - 1;  // intervals
  const double dt = snaps[1].t - snaps[0].t;
  std::vector<double> w(snaps.size(), 0.0);
  auto simpson = [&](std::size_t from, std::size_t intervals) {
    for (std::size_t i = 0; i < intervals; i += 2) {
      w[from + i] += dt / 3.0;
      w[from + i + 1] += 4.0 * dt / 3.0;
      w[from + i + 2] += dt / 3.0;
    }
  };
  if (m == 1) {
    w[0] = w[1] = 0.5 * dt;
  } else if (m % 2 == 0) {
    simpson(0, m);
  } else {
    simpson(0, m - 3);
    const double c = 3.0 * dt / 8.0;
    w[m - 3] += c;
    w[m - 2] += 3.0 * c;
    w[m - 1] += 3.0 * c;
    w[m] += c;
  }
  LaplaceTrace out;
  out.total = SpinorField(rec.grid);
  const bool split = !snaps.front().split.empty();
  if (split) out.split.assign(3, SpinorField(rec.grid));
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    const cplx f = w[k] * std::exp(-tau * snaps[k].t);
    auto& d = out.total.data();
    const auto& s = snaps[k].total.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += f * s[i];
    if (split) {
      for (int j = 0; j < 3; ++j) {
        auto& dj = out.split[j].data();
        const auto& sj = snaps[k].split[j].data();
        for (std::size_t i = 0; i < dj.size(); ++i) dj[i] += f * sj[i];
      }
    }
  }
  const double T = snaps.back().t;
  const double tail = std::exp(-tau.real() * T) * snaps.back().total.l2_norm() / tau.real();
  const double norm = out.total.l2_norm();
  out.tail_estimate = norm > 0.0 ? tail / norm : 0.0;
  out.truncated = out.tail_estimate > 0.01;
  if (out.truncated) {
    spdlog::warn("Laplace trace at tau = ({:.4g}, {:.4g}): tail estimate {:.2g} of the transform", tau.real(),
                 tau.imag(), out.tail_estimate);
  }
  return out;
}

}  // namespace pmllab
