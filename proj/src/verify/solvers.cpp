#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "common.hpp"
#include "pmllab/errors.hpp"
#include "pmllab/freqdomain.hpp"
#include "pmllab/timedomain.hpp"
#include "pmllab/verify.hpp"

namespace pmllab {

using detail::fitted_order;

namespace {

Spinor random_polarization(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  const Spinor p(cplx(g(rng), g(rng)), cplx(g(rng), g(rng)));
  return p / p.norm();
}

Grid cube_grid(const BoxDomain& box, int n) { return Grid::over_box(box, {n, n, n}); }

double gradient_norm(const SpinorField& u) {
  double s = 0.0;
  for (int a = 0; a < 3; ++a) s += std::pow(scheme_derivative(u, a).l2_norm(), 2);
  return std::sqrt(s);
}

// Distance from x to the boundary of the box.
double boundary_distance(const BoxDomain& box, const Vec3& x) {
  return (box.half_lengths() - x.cwiseAbs()).minCoeff();
}

}  // namespace

CheckReport check_coercivity(const CoercivityConfig& config, const CheckOptions& opts) {
  CheckReport r("coercivity", opts);
  const BoxDomain box = config.setup.box();
  const Profiles profiles = config.setup.profiles();
  r.parameter("sigma0", config.setup.sigma0);
  r.parameter("fields", std::to_string(config.n_fields));
  double max_aspect = 0.0;
  for (double a : config.aspects) max_aspect = std::max(max_aspect, std::abs(a));
  double M = 0.0;
  for (int n : config.grids) M = std::max(M, holomorphy_threshold(profiles, box, n, max_aspect));
  r.constant("threshold_M", M);

  // Fields are continuous functions so the same u is sampled on every grid:
  // even indices smooth trigonometric, odd ones concentrated within 0.3 of
  // the boundary.
  std::mt19937_64 rng(opts.seed);
  std::vector<detail::TrigField> fields;
  for (int k = 0; k < config.n_fields; ++k) fields.push_back(detail::random_trig(rng, 4, 4.0));
  const double eps = 0.3;

  std::vector<cplx> taus;
  for (double f : config.re_factors) {
    for (double a : config.aspects) taus.emplace_back(f * M, a * f * M);
  }
  Table& t = r.table("min_ratio");
  t.columns = {"re_tau", "im_tau"};
  for (int n : config.grids) t.columns.push_back(fmt::format("grid{}", n));
  bool small_aspect = false, large_aspect = false;
  for (const cplx& tau : taus) {
    (std::abs(tau.imag()) < 0.5 * tau.real() ? small_aspect : large_aspect) = true;
    const StretchContext ctx(tau, profiles);
    std::vector<double> row{tau.real(), tau.imag()};
    for (int n : config.grids) {
      const Grid g = cube_grid(box, n);
      const HelmholtzAssembly h = assemble_helmholtz(ctx, g, SpinorField(g));
      double worst = std::numeric_limits<double>::infinity();
      for (int k = 0; k < config.n_fields; ++k) {
        Eigen::VectorXcd u(2 * g.size());
        for (std::size_t node = 0; node < g.size(); ++node) {
          const Vec3 x = g.point(node);
          Spinor v = fields[k].value(x);
          if (k % 2 == 1) v *= std::exp(-boundary_distance(box, x) / eps);
          if (g.on_boundary(node)) {
            v = projector(Sign::plus, checked_nu_tilde(ctx, x, grid_boundary_normal(g, node))) * v;
          }
          u(dof(node, 0)) = v(0);
          u(dof(node, 1)) = v(1);
        }
        const double at = std::abs(tau);
        const double bundle = at * tau.real() * h.l2_squared(u) +
                              tau.real() / at * (at * h.boundary_squared(u) + h.gradient_squared(u));
        worst = std::min(worst, std::abs(h.bilinear(u, u.conjugate())) / bundle);
      }
      row.push_back(worst);
    }
    t.rows.push_back(row);
    const std::string key = fmt::format("tau_{:g}{:+g}i", tau.real(), tau.imag());
    for (std::size_t gi = 0; gi < config.grids.size(); ++gi) {
      r.require_positive(fmt::format("{}_grid{}_min_ratio", key, config.grids[gi]), row[2 + gi]);
    }
    const double coarse = row[2];
    const double fine = row.back();
    r.require_at_most(key + "_grid_change", std::abs(coarse - fine) / fine, config.stability);
  }
  r.require_at_least("covers_small_im_regime", small_aspect ? 1.0 : 0.0, 1.0);
  r.require_at_least("covers_large_im_regime", large_aspect ? 1.0 : 0.0, 1.0);
  return r;
}

namespace {

struct EstimateTerms {
  double volume;    // Re tau ||u||
  double boundary;  // (Re tau)^{1/2} ||u||_bdry
  double gradient;  // Re tau / |tau| ||grad u||
  double total() const { return volume + boundary + gradient; }
};

EstimateTerms estimate_terms(const StretchContext& ctx, const Grid& g, const SpinorField& F) {
  const SpinorField u = solve_stretched(ctx, g, F);
  const double re = ctx.tau().real();
  const double f = F.l2_norm();
  return {re * u.l2_norm() / f, std::sqrt(re) * u.boundary_l2_norm() / f,
          re / std::abs(ctx.tau()) * gradient_norm(u) / f};
}

SpinorField bump_source(const Grid& g, double radius, const Spinor& polarization) {
  SourceSpec s;
  s.radius = radius;
  s.polarization = polarization;
  return s.spatial(g);
}

}  // namespace

CheckReport check_estimates(const EstimateConfig& config, const CheckOptions& opts) {
  CheckReport r("estimates", opts);
  const BoxDomain box = config.setup.box();
  const Profiles profiles = config.setup.profiles();
  std::mt19937_64 rng(opts.seed);
  const Spinor pol = random_polarization(rng);
  r.parameter("sigma0", config.setup.sigma0);
  r.parameter("source_radius", config.source_radius);

  // M: the holomorphy threshold for the widest aspect of the tau grid, then
  // doubled on a coarse grid until the constant stops growing.
  double aspect = 0.0;
  for (double m : config.im_factors) aspect = std::max(aspect, std::abs(m));
  aspect /= *std::min_element(config.re_factors.begin(), config.re_factors.end());
  double M = holomorphy_threshold(profiles, box, config.threshold_grid, aspect);
  r.constant("holomorphy_threshold", M);
  {
    const Grid g = cube_grid(box, config.threshold_grid);
    const SpinorField F = bump_source(g, config.source_radius, pol);
    Table& ladder = r.table("threshold_ladder");
    ladder.columns = {"re_tau", "constant"};
    double previous = estimate_terms(StretchContext(M, profiles), g, F).total();
    ladder.rows.push_back({M, previous});
    for (int k = 0; k < 12; ++k) {
      const double next = estimate_terms(StretchContext(2.0 * M, profiles), g, F).total();
      ladder.rows.push_back({2.0 * M, next});
      if (next <= previous) break;
      M *= 2.0;
      previous = next;
    }
  }
  r.constant("M", M);

  Table& t = r.table("constants");
  t.columns = {"re_tau", "im_tau"};
  for (int n : config.grids) {
    for (const char* c : {"volume", "boundary", "gradient", "total"}) t.columns.push_back(fmt::format("{}_{}", c, n));
  }
  std::vector<cplx> taus;
  for (double a : config.re_factors) {
    for (double b : config.im_factors) taus.emplace_back(a * M, b * M);
  }
  for (const cplx& tau : taus) t.rows.push_back({tau.real(), tau.imag()});
  std::vector<double> fitted;
  for (int n : config.grids) {
    const Grid g = cube_grid(box, n);
    const SpinorField F = bump_source(g, config.source_radius, pol);
    EstimateTerms worst{0.0, 0.0, 0.0};
    double total = 0.0;
    for (std::size_t i = 0; i < taus.size(); ++i) {
      const EstimateTerms e = estimate_terms(StretchContext(taus[i], profiles), g, F);
      worst.volume = std::max(worst.volume, e.volume);
      worst.boundary = std::max(worst.boundary, e.boundary);
      worst.gradient = std::max(worst.gradient, e.gradient);
      total = std::max(total, e.total());
      t.rows[i].insert(t.rows[i].end(), {e.volume, e.boundary, e.gradient, e.total()});
    }
    r.constant(fmt::format("C_volume_grid{}", n), worst.volume);
    r.constant(fmt::format("C_boundary_grid{}", n), worst.boundary);
    r.constant(fmt::format("C_gradient_grid{}", n), worst.gradient);
    r.constant(fmt::format("C_grid{}", n), total);
    fitted.push_back(total);
  }
  const double change = std::abs(fitted.front() - fitted.back()) / fitted.back();
  r.measure("C_grid_change", change);
  r.require_below("C_finite", fitted.back(), std::numeric_limits<double>::infinity());
  r.require_at_most("C_grid_change", change, config.stability);
  return r;
}

CheckReport check_second_bc(const SecondBcConfig& config, const CheckOptions& opts) {
  CheckReport r("second_bc", opts);
  const BoxDomain box = config.setup.box();
  const StretchContext ctx(config.tau, config.setup.profiles());
  std::mt19937_64 rng(opts.seed);
  const Spinor pol = random_polarization(rng);
  r.parameter("tau", config.tau);
  r.parameter("sigma0", config.setup.sigma0);
  Table& t = r.table("refinement");
  t.columns = {"nodes", "h", "max_residual", "relative_residual"};
  std::vector<double> hs, res;
  for (int n : config.grids) {
    const Grid g = cube_grid(box, n);
    const SpinorField u = solve_stretched(ctx, g, bump_source(g, config.source_radius, pol));
    const NodeResidual nr = second_bc_residual(u, ctx);
    hs.push_back(g.h(0));
    res.push_back(nr.max / u.max_abs());
    t.rows.push_back({static_cast<double>(n), g.h(0), nr.max, res.back()});
  }
  const double order = fitted_order(hs, res);
  r.order("second_bc", order);
  r.require_at_least("second_bc_order", order, config.min_order);
  for (std::size_t i = 0; i + 1 < res.size(); ++i) {
    r.require_below(fmt::format("decreases_{}_to_{}", config.grids[i], config.grids[i + 1]), res[i + 1], res[i]);
  }
  return r;
}

CheckReport laplace_consistency(const LaplaceConfig& config, const CheckOptions& opts) {
  CheckReport r("laplace_consistency", opts);
  const BoxDomain box = config.setup.box();
  const Profiles profiles = config.setup.profiles();
  std::mt19937_64 rng(opts.seed);
  SourceSpec src;
  src.radius = config.source_radius;
  src.duration = config.source_duration;
  src.polarization = random_polarization(rng);
  r.parameter("nodes", std::to_string(config.nodes));
  r.parameter("lambda", config.lambda);
  r.parameter("final_time", config.final_time);

  SimConfig sim;
  sim.n = {config.nodes, config.nodes, config.nodes};
  sim.cfl = config.cfl;
  sim.final_time = config.final_time;
  sim.snapshot_stride = 1;
  sim.snapshot_split = true;
  sim.threads = opts.threads;
  const RunResult run_result = run(sim, box, profiles, src);
  const Recording& rec = run_result.recording;
  const Grid& g = rec.grid;
  const SpinorField shape = src.spatial(g);
  const auto& A = pauli_matrices();

  Table& t = r.table("per_tau");
  t.columns = {"re_tau", "im_tau", "relative_difference", "split_relative_difference", "split_sum_residual",
               "tail"};
  for (double im : config.im_parts) {
    const cplx tau(2.0 * config.lambda, im);
    const LaplaceTrace lt = laplace_of_trace(rec, tau);
    const StretchContext ctx(tau, profiles);
    const cplx wl = src.window_laplace(tau);
    SpinorField F(g);
    for (std::size_t node = 0; node < g.size(); ++node) {
      const Vec3C f = ctx.derivative_factors(g.point(node));
      F.set(node, (f(0) + f(1) + f(2)) / 3.0 * wl * shape.at(node));
    }
    const SpinorField v = solve_stretched(ctx, g, F, SolveOptions{});
    SpinorField d = v;
    d -= lt.total;
    const double rel = d.l2_norm() / lt.total.l2_norm();

    // V^j = (f^_j - A_j d_j v) / (tau + sigma_j) against the split transforms.
    std::array<SpinorField, 3> V{SpinorField(g), SpinorField(g), SpinorField(g)};
    for (int j = 0; j < 3; ++j) {
      const SpinorField dv = scheme_derivative(v, j);
      for (std::size_t node = 0; node < g.size(); ++node) {
        const double s = ctx.sigma(j, g.point(node)(j));
        V[j].set(node, (wl * shape.at(node) / 3.0 - A[j] * dv.at(node)) / (tau + s));
      }
    }
    double sum_res = 0.0, split_num = 0.0, split_den = 0.0;
    for (std::size_t node = 0; node < g.size(); ++node) {
      if (!g.on_boundary(node)) {
        sum_res = std::max(sum_res, (V[0].at(node) + V[1].at(node) + V[2].at(node) - v.at(node)).norm());
      }
    }
    sum_res /= v.max_abs();
    for (int j = 0; j < 3; ++j) {
      SpinorField dj = V[j];
      dj -= lt.split[j];
      split_num += std::pow(dj.l2_norm(), 2);
      split_den += std::pow(lt.split[j].l2_norm(), 2);
    }
    const double split_rel = std::sqrt(split_num / split_den);
    t.rows.push_back({tau.real(), tau.imag(), rel, split_rel, sum_res, lt.tail_estimate});
    const std::string key = fmt::format("tau_{:g}{:+g}i", tau.real(), tau.imag());
    r.require_at_most(key + "_relative_difference", rel, config.tolerance);
    r.require_small(key + "_split_sum", sum_res, 1e-10);
    r.require_at_most(key + "_split_relative_difference", split_rel, config.tolerance);
  }
  return r;
}

CheckReport check_stability(const StabilityConfig& config, const CheckOptions& opts) {
  CheckReport r("stability", opts);
  const BoxDomain box = config.setup.box();
  std::mt19937_64 rng(opts.seed);
  SourceSpec src;
  src.radius = config.source_radius;
  src.duration = config.source_duration;
  src.polarization = random_polarization(rng);
  SimConfig sim;
  sim.n = {config.nodes, config.nodes, config.nodes};
  sim.cfl = config.cfl;
  sim.final_time = config.transits * 2.0 * box.half_lengths().maxCoeff();
  sim.threads = opts.threads;
  r.parameter("final_time", sim.final_time);
  const Recording rec = run(sim, box, config.setup.profiles(), src).recording;

  auto ratio = [&](double lambda) {
    const WeightedNorms w = weighted_norms(rec, lambda);
    return lambda * w.volume / w.source;
  };
  // lambda T >= 10 keeps the truncated tail of the weight below e^{-10}.
  const double lambda0 = 10.0 / sim.final_time;
  Table& t = r.table("ladder");
  t.columns = {"lambda", "ratio"};
  std::vector<double> lam, rat;
  for (int k = 0; k < config.ladder; ++k) {
    lam.push_back(lambda0 * std::pow(2.0, k));
    rat.push_back(ratio(lam.back()));
    t.rows.push_back({lam.back(), rat.back()});
  }
  // Empirical M: the smallest ladder value from which the ratio no longer
  // increases, with at least three ladder values at or above it.
  int start = -1;
  for (int k = config.ladder - 3; k >= 0; --k) {
    bool monotone = true;
    for (int j = k; j + 1 < config.ladder; ++j) monotone = monotone && rat[j + 1] <= rat[j];
    if (!monotone) break;
    start = k;
  }
  const double bounded = *std::max_element(rat.begin(), rat.end());
  r.constant("sup_ratio", bounded);
  r.require_below("ratio_bounded", bounded, 10.0);
  r.require_at_least("ladder_has_nonincreasing_tail", start >= 0 ? 1.0 : 0.0, 1.0);
  if (start >= 0) {
    const double M = lam[start];
    r.constant("M", M);
    Table& fine = r.table("fine_ladder");
    fine.columns = {"lambda", "ratio"};
    double worst_rise = 0.0;
    double previous = ratio(M);
    fine.rows.push_back({M, previous});
    for (double l = M * std::pow(2.0, 0.25); l <= lam.back() * (1 + 1e-12); l *= std::pow(2.0, 0.25)) {
      const double q = ratio(l);
      worst_rise = std::max(worst_rise, q / previous - 1.0);
      fine.rows.push_back({l, q});
      previous = q;
    }
    r.require_at_most("fine_ladder_max_relative_rise", worst_rise, 0.0);
  }

  std::size_t off = 0;
  while (off + 1 < rec.times.size() && rec.times[off] < rec.source_off) ++off;
  double after = 0.0;
  for (std::size_t k = off; k < rec.times.size(); ++k) after = std::max(after, rec.max_abs[k]);
  r.measure("max_abs_at_switch_off", rec.max_abs[off]);
  r.measure("max_abs_after_switch_off", after);
  r.measure("final_l2_over_switch_off", rec.l2.back() / rec.l2[off]);
  r.require_at_most("no_growth_after_switch_off", after / rec.max_abs[off], 1.0 + 1e-3);
  return r;
}

namespace {

// A split run on a cube of half-length `half` whose central block of
// 2 * inner / h + 1 nodes per axis is compared against the reference.
struct ReflectionRun {
  std::string label;
  BoxDomain box;
  Grid grid;
  std::unique_ptr<SplitSolver> solver;
  std::unique_ptr<SplitState> state;
  int offset;

  ReflectionRun(std::string name, double half, double inner_half, double h, const Profiles& profiles,
                const SourceSpec& src, int threads)
      : label(std::move(name)),
        box(Vec3::Constant(half), std::min(inner_half / half, std::nextafter(1.0, 0.0))),
        grid(cube_grid(box, static_cast<int>(std::lround(2.0 * half / h)) + 1)) {
    offset = static_cast<int>(std::lround((half - inner_half) / h));
    solver = std::make_unique<SplitSolver>(box, grid, profiles, src, threads);
    state = std::make_unique<SplitState>(grid);
  }

  SpinorField inner(const Grid& inner_grid) const {
    const SpinorField total = state->total();
    SpinorField out(inner_grid);
    for (int k = 0; k < inner_grid.n[2]; ++k) {
      for (int j = 0; j < inner_grid.n[1]; ++j) {
        for (int i = 0; i < inner_grid.n[0]; ++i) {
          out.set(inner_grid.index(i, j, k), total.at(grid.index(i + offset, j + offset, k + offset)));
        }
      }
    }
    return out;
  }
};

}  // namespace

CheckReport reflection_experiment(const ReflectionConfig& config, const CheckOptions& opts) {
  CheckReport r("reflection", opts);
  r.parameter("inner_half", config.inner_half);
  r.parameter("sigma0", config.sigma0);
  r.parameter("h", config.h);
  r.parameter("final_time", config.final_time);
  const double h = config.h;
  auto on_grid = [&](double x) {
    if (std::abs(x / h - std::round(x / h)) > 1e-9) {
      throw ValidationError(fmt::format("length {} is not a multiple of h = {}", x, h));
    }
  };
  on_grid(config.inner_half);
  for (double w : config.widths) on_grid(w);
  std::mt19937_64 rng(opts.seed);
  SourceSpec src;
  src.radius = config.source_radius;
  src.duration = config.source_duration;
  src.polarization = random_polarization(rng);

  // The central scheme leaks ahead of the light cone like J_n(t / h) over n
  // cells. A wall round trip of 2 T keeps n >= 2 t / h, where J_n < (e / 4)^n.
  const double ref_half =
      h * std::ceil((2.0 * config.final_time + config.source_radius + config.inner_half) / (2.0 * h));
  r.parameter("reference_half", ref_half);
  const Profiles none{AbsorptionProfile::none(), AbsorptionProfile::none(), AbsorptionProfile::none()};

  std::vector<std::unique_ptr<ReflectionRun>> runs;
  runs.push_back(std::make_unique<ReflectionRun>("reference", ref_half, config.inner_half, h, none, src, opts.threads));
  runs.push_back(
      std::make_unique<ReflectionRun>("bare", config.inner_half, config.inner_half, h, none, src, opts.threads));
  for (double w : config.widths) {
    const double half = config.inner_half + w;
    const BoxDomain box(Vec3::Constant(half), config.inner_half / half);
    runs.push_back(std::make_unique<ReflectionRun>(fmt::format("width_{:g}", w), half, config.inner_half, h,
                                                   layer_profiles(box, config.profile, config.sigma0, config.order),
                                                   src, opts.threads));
  }
  const int m = static_cast<int>(std::lround(2.0 * config.inner_half / h)) + 1;
  const Grid inner_grid = Grid::over_box(BoxDomain(Vec3::Constant(config.inner_half), 0.5), {m, m, m});

  const int steps = static_cast<int>(std::ceil(config.final_time / (config.cfl * h) - 1e-12));
  const double dt = config.final_time / steps;
  std::vector<double> worst(runs.size(), 0.0);
  double peak = 0.0;
  for (int step = 1; step <= steps; ++step) {
    for (auto& run : runs) {
      run->solver->step(*run->state, dt);
      run->state->t = step * dt;
    }
    const SpinorField ref = runs[0]->inner(inner_grid);
    peak = std::max(peak, ref.l2_norm());
    for (std::size_t i = 1; i < runs.size(); ++i) {
      SpinorField d = runs[i]->inner(inner_grid);
      d -= ref;
      worst[i] = std::max(worst[i], d.l2_norm());
    }
  }
  Table& t = r.table("metrics");
  t.columns = {"width", "metric"};
  t.rows.push_back({0.0, worst[1] / peak});
  r.measure("bare", worst[1] / peak);
  double pml_default = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> metric;
  for (std::size_t i = 0; i < config.widths.size(); ++i) {
    metric.push_back(worst[i + 2] / peak);
    t.rows.push_back({config.widths[i], metric.back()});
    r.measure(runs[i + 2]->label, metric.back());
    if (std::abs(config.widths[i] - config.default_width) < 1e-12) pml_default = metric.back();
  }
  r.require_below("default_width_below_bare", pml_default, worst[1] / peak);
  for (std::size_t i = 0; i + 1 < metric.size(); ++i) {
    r.require_below(fmt::format("width_{:g}_below_width_{:g}", config.widths[i + 1], config.widths[i]), metric[i + 1],
                    metric[i]);
  }
  return r;
}

}  // namespace pmllab
