#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pmllab/geometry.hpp"
#include "pmllab/stretching.hpp"

namespace pmllab {

struct CheckOptions {
  std::uint64_t seed = 1;
  /// Multiplies every residual tolerance (not convergence orders or ratios).
  double tolerance_scale = 1.0;
  int threads = 1;
};

struct Verdict {
  std::string criterion;
  double value = 0.0;
  std::string relation;  // "<=", ">=", "<" or ">"
  double bound = 0.0;
  bool pass = false;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

/// Outcome of one named check. Text form (see docs/report_schema.md):
///   check: NAME
///   status: pass|fail
///   parameter KEY: VALUE
///   measured KEY: NUMBER
///   constant KEY: NUMBER
///   order KEY: NUMBER
///   verdict CRITERION: VALUE RELATION BOUND pass|fail
///   note: TEXT
///   table NAME
///   CSV header and rows
///   end table
class CheckReport {
 public:
  CheckReport() = default;
  CheckReport(std::string name, const CheckOptions& opts);

  const std::string& name() const { return name_; }
  double tolerance_scale() const { return tolerance_scale_; }

  void parameter(const std::string& key, const std::string& value);
  void parameter(const std::string& key, double value);
  void parameter(const std::string& key, cplx value);
  void measure(const std::string& key, double value) { measured_.emplace_back(key, value); }
  void constant(const std::string& key, double value) { constants_.emplace_back(key, value); }
  void order(const std::string& key, double value) { orders_.emplace_back(key, value); }
  void note(const std::string& text) { notes_.push_back(text); }
  Table& table(const std::string& name) { return tables_[name]; }

  /// value <= tol * tolerance_scale.
  bool require_small(const std::string& criterion, double value, double tol);
  /// Unscaled comparisons for orders, ratios and structural bounds.
  bool require_at_most(const std::string& criterion, double value, double bound);
  bool require_at_least(const std::string& criterion, double value, double bound);
  bool require_positive(const std::string& criterion, double value);
  bool require_below(const std::string& criterion, double value, double bound);
  /// Absorb another report's verdicts and numbers under a key prefix.
  void merge(const CheckReport& other, const std::string& prefix);

  /// True when there is at least one verdict and all pass.
  bool passed() const;
  const std::vector<Verdict>& verdicts() const { return verdicts_; }
  const std::vector<std::pair<std::string, std::string>>& parameters() const { return parameters_; }
  const std::vector<std::pair<std::string, double>>& measured() const { return measured_; }
  const std::vector<std::pair<std::string, double>>& constants() const { return constants_; }
  const std::vector<std::pair<std::string, double>>& orders() const { return orders_; }
  const std::vector<std::string>& notes() const { return notes_; }
  const std::map<std::string, Table>& tables() const { return tables_; }
  /// Looks up a measured quantity, constant or order by key.
  double value(const std::string& key) const;

  std::string to_text() const;
  /// Throws ParseError on malformed input.
  static CheckReport from_text(const std::string& text);

 private:
  bool add(const std::string& criterion, double value, const std::string& relation, double bound, bool pass);

  std::string name_;
  double tolerance_scale_ = 1.0;
  std::vector<std::pair<std::string, std::string>> parameters_;
  std::vector<std::pair<std::string, double>> measured_;
  std::vector<std::pair<std::string, double>> constants_;
  std::vector<std::pair<std::string, double>> orders_;
  std::vector<Verdict> verdicts_;
  std::vector<std::string> notes_;
  std::map<std::string, Table> tables_;
};

/// Box, inner fraction and absorption shared by the experiments.
struct DeskSetup {
  Vec3 half_lengths = Vec3(1.0, 1.0, 1.0);
  double inner_fraction = 0.5;
  ProfileKind profile = ProfileKind::polynomial;
  double sigma0 = 20.0;
  int order = 3;

  BoxDomain box() const { return {half_lengths, inner_fraction}; }
  Profiles profiles() const;
  Profiles profiles(double amplitude) const;
};

/// Smallest Re tau such that nu_tilde stays in the holomorphy domain at every
/// boundary node of the grid for all |Im tau| <= aspect * Re tau (bisection).
/// Zero when the profiles vanish on the boundary.
double holomorphy_threshold(const Profiles& profiles, const BoxDomain& box, int nodes, double aspect);

/// Anticommutation, det L, spectral calculus, pi A pi and partial-inverse
/// relations over random samples.
CheckReport check_algebra(int n_samples, const CheckOptions& opts = {});

/// projector_derivative against central differences at h = 1e-3, 1e-4, 1e-5.
CheckReport check_perturbation(int n_samples, const CheckOptions& opts = {});

/// Pi L(-tau, d~) L(tau, d~) w by nested fourth-order differences against
/// (p - tau^2 Pi) w from exact derivatives, random trigonometric w.
CheckReport check_helmholtz_identity(const StretchContext& ctx, const BoxDomain& box, int n_samples,
                                     const CheckOptions& opts = {});

struct NeumannSurface {
  enum Kind { sphere, rounded_box } kind = sphere;
  double radius = 1.0;  // sphere
  DeskSetup box;        // rounded box: parent box
  double delta = 0.3;   // rounded box smoothing
};

/// pi^+(nu) sum_j A_j d_j u against pi^+(nu)(nu . d + H) u on the surface
/// for u = pi^+(nu) w, second-order central differences.
CheckReport check_neumann_identity(const NeumannSurface& surface, int n_points, const CheckOptions& opts = {});

/// pi^+(nu~) sum_j A_j d~_j u against pi^+(nu~)(V + H(X)) u on the rounded
/// box for u = pi^+(nu~) w and each tau in the set.
CheckReport check_transverse_identity(const DeskSetup& setup, double delta, const std::vector<cplx>& taus,
                                      int n_points, const CheckOptions& opts = {});

/// Support, sup-norm and tangential-gradient bounds of the m matrix for each
/// delta and Re tau, taking the sup over Im tau = aspect * Re tau.
CheckReport check_m_bounds(const DeskSetup& setup, const std::vector<double>& deltas,
                           const std::vector<double>& re_taus, const std::vector<double>& aspects, double density,
                           const CheckOptions& opts = {});

struct CoercivityConfig {
  DeskSetup setup;
  std::vector<int> grids{16, 24};
  int n_fields = 100;
  /// Re tau in {re_factors * M}, Im tau / Re tau in aspects.
  std::vector<double> re_factors{1.0, 2.0};
  std::vector<double> aspects{0.0, 0.25, -0.25, 1.0, -1.0, 4.0};
  double stability = 0.2;
};

/// min over random smooth u of |A(u, conj u)| / bundle, per tau and grid.
CheckReport check_coercivity(const CoercivityConfig& config, const CheckOptions& opts = {});

struct EstimateConfig {
  DeskSetup setup;
  std::vector<int> grids{16, 24};
  double source_radius = 0.45;
  /// Re tau in {1, 2, 4} M and Im tau in {-4, 0, 4} M.
  std::vector<double> re_factors{1.0, 2.0, 4.0};
  std::vector<double> im_factors{-4.0, 0.0, 4.0};
  int threshold_grid = 12;
  double stability = 0.25;
};

/// (Re tau)||u||, (Re tau)^{1/2}||u||_bdry and (Re tau/|tau|)||grad u|| over
/// ||F|| for the stretched solve; fitted constants per grid.
CheckReport check_estimates(const EstimateConfig& config, const CheckOptions& opts = {});

struct SecondBcConfig {
  DeskSetup setup;
  std::vector<int> grids{25, 33, 41};
  cplx tau{2.0, 1.0};
  double source_radius = 0.45;
  double min_order = 1.5;
};

CheckReport check_second_bc(const SecondBcConfig& config, const CheckOptions& opts = {});

struct LaplaceConfig {
  DeskSetup setup;
  int nodes = 24;
  double cfl = 0.5;
  double lambda = 2.5;       // weight rate of the run; Re tau = 2 lambda
  double final_time = 4.0;   // lambda * T >= 10
  double source_radius = 0.5;
  double source_duration = 1.0;
  std::vector<double> im_parts{0.0, 2.0, -4.0};
  double tolerance = 0.05;
};

/// Laplace transform of a time-domain run against the stretched solve with
/// F = sum_j tau f^_j / (tau + sigma_j); also rebuilds V^j from the
/// frequency-domain solution and checks sum_j V^j = v.
CheckReport laplace_consistency(const LaplaceConfig& config, const CheckOptions& opts = {});

struct StabilityConfig {
  DeskSetup setup;
  int nodes = 24;
  double cfl = 0.5;
  double transits = 10.0;
  double source_radius = 0.45;
  double source_duration = 1.0;
  int ladder = 6;  // lambda = lambda0 * 2^k
};

/// Weighted-norm ratio lambda ||e^{-lambda t} u|| / ||e^{-lambda t} f|| over a
/// lambda ladder, plus the long-run bound on max |u| after switch-off.
CheckReport check_stability(const StabilityConfig& config, const CheckOptions& opts = {});

struct ReflectionConfig {
  double inner_half = 0.5;
  std::vector<double> widths{0.25, 0.5, 1.0};
  double default_width = 0.5;
  double sigma0 = 20.0;
  ProfileKind profile = ProfileKind::polynomial;
  int order = 3;
  double h = 1.0 / 16.0;
  double cfl = 0.5;
  double final_time = 4.0;
  double source_radius = 0.3;
  double source_duration = 1.0;
};

/// max_t ||u_run - u_ref||_{L2(inner box)} / peak for PML and bare runs;
/// the reference box is large enough that nothing returns from its walls.
CheckReport reflection_experiment(const ReflectionConfig& config, const CheckOptions& opts = {});

}  // namespace pmllab
