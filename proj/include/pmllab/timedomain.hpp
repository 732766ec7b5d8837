#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "pmllab/field.hpp"
#include "pmllab/stretching.hpp"

namespace pmllab {

/// f(t, x) = amplitude * w(t) * phi(|x - center| / radius) * polarization with
/// the C-infinity bump phi(rho) = exp(1 - 1/(1 - rho^2)) and the window
/// w(t) = sin^4(pi t / duration) on [0, duration], zero elsewhere.
/// Split evenly: f_j = f / 3.
struct SourceSpec {
  Vec3 center = Vec3::Zero();
  double radius = 0.3;
  double duration = 1.0;
  Spinor polarization = Spinor(1.0, 0.0);
  double amplitude = 1.0;

  double window(double t) const;
  double bump(const Vec3& x) const;
  /// int_0^duration e^{-tau t} w(t) dt in closed form.
  cplx window_laplace(cplx tau) const;
  /// Throws DomainError unless the support lies in the closed inner box.
  void validate(const BoxDomain& box) const;
  /// amplitude * phi(x) * polarization on the grid (no time factor).
  SpinorField spatial(const Grid& g) const;
};

struct SimConfig {
  std::array<int, 3> n{24, 24, 24};
  double cfl = 0.5;
  double final_time = 1.0;
  std::vector<Vec3> probes;
  int snapshot_stride = 0;  // 0: no snapshots
  bool snapshot_split = false;  // also keep U^1, U^2, U^3 in snapshots
  int dual_stride = 0;          // 0: no dual norms
  int threads = 1;

  /// Throws DomainError with the violated bound.
  void validate() const;
};

struct SplitState {
  std::array<SpinorField, 3> U;
  double t = 0.0;

  explicit SplitState(const Grid& g) : U{SpinorField(g), SpinorField(g), SpinorField(g)} {}
  SpinorField total() const;
};

/// Fourth-order first derivative along one axis of one interleaved complex
/// array: central in the interior, one-sided on the two nodes next to each
/// end.
/// Lines are distributed over `threads` OpenMP threads; the result does not
/// depend on the thread count.
void grid_derivative(const Grid& g, int axis, const double* in, double* out, int threads = 1);

/// A boundary grid node with pi^-(nu) for the normalised sum nu of its
/// face normals and the axes of those faces.
struct BoundaryNode {
  std::size_t node;
  Matrix2C minus;
  std::vector<int> axes;
};

/// Semidiscrete Berenger split system with the dissipative boundary
/// condition sum_j U^j in E+(nu), advanced by classical RK4.
class SplitSolver {
 public:
  SplitSolver(const BoxDomain& box, const Grid& grid, Profiles profiles, SourceSpec source, int threads = 1);

  const Grid& grid() const { return grid_; }
  const SourceSpec& source() const { return source_; }
  const Profiles& profiles() const { return profiles_; }

  /// d/dt U^j = -sigma_j U^j - A_j d_j (sum U) + f_j.
  void rhs(const SplitState& s, double t, SplitState& out) const;
  /// Removes pi^-(nu) sum U at boundary nodes, shared equally among the
  /// components U^a of the adjacent face axes.
  void apply_boundary(SplitState& s) const;
  void step(SplitState& s, double dt);
  /// Source f(t, .) on the grid.
  SpinorField source_at(double t) const;
  double max_sigma() const;

 private:
  BoxDomain box_;
  Grid grid_;
  Profiles profiles_;
  SourceSpec source_;
  SpinorField source_shape_;
  std::array<std::vector<double>, 3> sigma_;
  std::vector<BoundaryNode> boundary_;
  int threads_;
  // RK4 scratch
  SplitState k1_, k2_, k3_, k4_, stage_;
  mutable SpinorField total_, d0_, d1_;
};

/// The unsplit Pauli system d/dt u = -sum A_j d_j u + f on the same grid and
/// with the same boundary projection; the reference for the sigma = 0
/// reduction.
class UnsplitSolver {
 public:
  UnsplitSolver(const BoxDomain& box, const Grid& grid, SourceSpec source);
  void rhs(const SpinorField& u, double t, SpinorField& out) const;
  void apply_boundary(SpinorField& u) const;
  void step(SpinorField& u, double& t, double dt);

 private:
  Grid grid_;
  SourceSpec source_;
  SpinorField source_shape_;
  std::vector<BoundaryNode> boundary_;
  SpinorField k1_, k2_, k3_, k4_, stage_;
  mutable SpinorField d0_, d1_;
};

struct Snapshot {
  double t;
  SpinorField total;                 // sum_j U^j
  std::vector<SpinorField> split;  // U^j when requested, else empty
};

struct Recording {
  Grid grid;
  double dt = 0.0;
  double source_off = 0.0;
  std::vector<double> times;
  std::vector<Vec3> probe_points;
  std::vector<std::size_t> probe_nodes;
  std::vector<std::vector<Spinor>> probe_series;  // [probe][step]
  std::vector<double> l2;           // ||sum U||_{L2(Q)}
  std::vector<double> boundary_l2;  // ||sum U||_{L2(dQ)}
  std::vector<double> source_l2;    // ||f||_{L2(Q)}
  std::vector<double> max_abs;
  std::vector<double> energy;       // sum_j ||U^j||^2
  int snapshot_stride = 0;
  std::vector<Snapshot> snapshots;
  std::vector<double> dual_times;
  std::vector<double> dual_u;   // sum_j ||U^j||_{-1}^2
  std::vector<double> dual_dt;  // sum_j ||d_t U^j||_{-1}^2

  /// CSV columns t, re(u1), im(u1), re(u2), im(u2), one file per probe.
  void write_probe_csv(const std::string& path, std::size_t probe) const;
};

struct RunResult {
  Recording recording;
  SplitState final_state;
};

RunResult run(const SimConfig& config, const BoxDomain& box, const Profiles& profiles, const SourceSpec& source);

struct WeightedNorms {
  double volume;    // ||e^{-lambda t} sum U||_{L2(R x Q)}
  double boundary;  // ||e^{-lambda t} sum U||_{L2(R x dQ)}
  double dual;      // ||e^{-lambda t} (lambda U^j, d_t U^j)|| in H^{-1}
  double source;    // ||e^{-lambda t} f||_{L2(R x Q)}
};

/// Trapezoidal time quadrature of the recorded series.
WeightedNorms weighted_norms(const Recording& rec, double lambda);

struct LaplaceTrace {
  SpinorField total;
  std::vector<SpinorField> split;  // empty unless the snapshots carry U^j
  double tail_estimate = 0.0;  // relative to ||total||
  bool truncated = false;
};

/// int_0^T e^{-tau t} u(t) dt over the recorded snapshots (composite
/// Simpson, 3/8 rule for an odd interval count). Warns when the tail bound
/// e^{-Re tau T} ||u(T)|| / Re tau exceeds 1% of the result.
LaplaceTrace laplace_of_trace(const Recording& rec, cplx tau);

/// ||w||_{H^{-1}}^2 = <w, (I - Delta_h)^{-1} w> with the Dirichlet
/// Laplacian on interior nodes; factorised once per grid.
class DualNorm {
 public:
  explicit DualNorm(const Grid& g);
  ~DualNorm();
  DualNorm(const DualNorm&) = delete;
  DualNorm& operator=(const DualNorm&) = delete;
  double squared(const SpinorField& w) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pmllab
