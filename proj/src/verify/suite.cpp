#include "pmllab/suite.hpp"

#include <fmt/format.h>

#include "pmllab/errors.hpp"

namespace pmllab {

namespace {

CheckReport neumann_both(const CheckOptions& opts) {
  CheckReport r("neumann_identity", opts);
  NeumannSurface sphere;
  r.merge(check_neumann_identity(sphere, 200, opts), "");
  NeumannSurface box;
  box.kind = NeumannSurface::rounded_box;
  r.merge(check_neumann_identity(box, 400, opts), "rounded_box_");
  return r;
}

ReflectionConfig reflection_config(const DeskSetup& d) {
  ReflectionConfig c;
  c.inner_half = d.half_lengths(0) * d.inner_fraction;
  c.default_width = d.half_lengths(0) - c.inner_half;
  c.sigma0 = d.sigma0;
  c.profile = d.profile;
  c.order = d.order;
  return c;
}

std::vector<SuiteEntry> make_entries() {
  std::vector<SuiteEntry> e;
  e.push_back({1, "algebra", "Pauli algebra identities over 1000 samples", 5.0,
               [](const DeskSetup&, const CheckOptions& o) { return check_algebra(1000, o); }});
  e.push_back({2, "perturbation", "projector derivative against finite differences", 5.0,
               [](const DeskSetup&, const CheckOptions& o) { return check_perturbation(1000, o); }});
  e.push_back({3, "helmholtz_identity", "stretched Helmholtz identity, tau = 10+5i", 30.0,
               [](const DeskSetup& d, const CheckOptions& o) {
                 return check_helmholtz_identity(StretchContext(cplx(10.0, 5.0), d.profiles()), d.box(), 200, o);
               }});
  e.push_back({4, "neumann_identity", "Neumann identity on the unit sphere and rounded box", 60.0,
               [](const DeskSetup&, const CheckOptions& o) { return neumann_both(o); }});
  e.push_back({5, "transverse_identity", "transverse identities, tau = 50 and 50+20i", 60.0,
               [](const DeskSetup& d, const CheckOptions& o) {
                 return check_transverse_identity(d, 0.3, {cplx(50.0, 0.0), cplx(50.0, 20.0)}, 400, o);
               }});
  e.push_back({6, "m_bounds", "m matrix support, sup-norm and gradient bounds", 30.0,
               [](const DeskSetup& d, const CheckOptions& o) {
                 return check_m_bounds(d, {0.4, 0.2, 0.1}, {1e2, 3e2, 1e3, 3e3, 1e4},
                                       {0.0, 0.25, -0.25, 0.5, -0.5, 1.0, -1.0, 2.0, -2.0, 4.0, -4.0, 8.0, -8.0}, 100,
                                       o);
               }});
  e.push_back({7, "coercivity", "coercivity ratio over 100 fields per tau, grids 16 and 24", 600.0,
               [](const DeskSetup& d, const CheckOptions& o) {
                 CoercivityConfig c;
                 c.setup = d;
                 return check_coercivity(c, o);
               }});
  e.push_back({8, "estimates", "stretched-system estimate constants, grids 16 and 24", 1200.0,
               [](const DeskSetup& d, const CheckOptions& o) {
                 EstimateConfig c;
                 c.setup = d;
                 return check_estimates(c, o);
               }});
  e.push_back({9, "second_bc", "second boundary condition residual order, grids 25/33/41", 1200.0,
               [](const DeskSetup& d, const CheckOptions& o) {
                 SecondBcConfig c;
                 c.setup = d;
                 return check_second_bc(c, o);
               }});
  e.push_back({10, "laplace_consistency", "Laplace trace against frequency-domain solve at 24^3", 1800.0,
               [](const DeskSetup& d, const CheckOptions& o) {
                 LaplaceConfig c;
                 c.setup = d;
                 return laplace_consistency(c, o);
               }});
  e.push_back({11, "stability", "weighted-norm ratio over a lambda ladder, 10 transits", 1800.0,
               [](const DeskSetup& d, const CheckOptions& o) {
                 StabilityConfig c;
                 c.setup = d;
                 return check_stability(c, o);
               }});
  e.push_back({12, "reflection", "PML against bare boundary, widths 0.25/0.5/1", 2700.0,
               [](const DeskSetup& d, const CheckOptions& o) { return reflection_experiment(reflection_config(d), o); }});
  return e;
}

}  // namespace

const std::vector<SuiteEntry>& standard_checks() {
  static const std::vector<SuiteEntry> entries = make_entries();
  return entries;
}

std::vector<const SuiteEntry*> suite(const std::string& name) {
  int lo = 0;
  int hi = 0;
  if (name == "identities") {
    lo = 1;
    hi = 6;
  } else if (name == "solvers") {
    lo = 7;
    hi = 12;
  } else if (name == "all") {
    lo = 1;
    hi = 12;
  } else {
    throw ValidationError(fmt::format("unknown suite '{}' (identities, solvers, all)", name));
  }
  std::vector<const SuiteEntry*> out;
  for (const SuiteEntry& e : standard_checks()) {
    if (e.number >= lo && e.number <= hi) out.push_back(&e);
  }
  return out;
}

const SuiteEntry& find_check(const std::string& name) {
  for (const SuiteEntry& e : standard_checks()) {
    if (e.name == name) return e;
  }
  throw ValidationError(fmt::format("unknown check '{}'", name));
}

}  // namespace pmllab
