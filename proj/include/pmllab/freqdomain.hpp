#pragma once

#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "pmllab/field.hpp"
#include "pmllab/stretching.hpp"

namespace pmllab {

using SparseC = Eigen::SparseMatrix<cplx>;
using SparseR = Eigen::SparseMatrix<double>;

/// Unknown index of component c at a node (node-major, two per node).
inline std::size_t dof(std::size_t node, int c) { return 2 * node + static_cast<std::size_t>(c); }
Eigen::VectorXcd to_vector(const SpinorField& f);
SpinorField to_field(const Grid& g, const Eigen::VectorXcd& x);

struct BoundaryConstraint {
  std::size_t node;
  Vec3 normal;
};

struct SparseComplexOperator {
  Grid grid;
  std::size_t dimension = 0;
  std::vector<Eigen::Triplet<cplx>> triplets;
  Eigen::VectorXcd rhs;
  /// Boundary nodes whose rows were replaced by projector conditions.
  std::vector<BoundaryConstraint> constraints;

  SparseC matrix() const;
};

struct SolveOptions {
  std::size_t direct_limit = 70000;   // unknowns; above this use GMRES + ILUT
  double tolerance = 1e-10;           // iterative stopping tolerance
  double accept = 1e-8;               // relative residual required of any solve
  int restart = 60;
  int max_iterations = 4000;
};

struct SolveResult {
  Eigen::VectorXcd x;
  double residual = 0.0;  // ||A x - b|| / ||b||
  bool iterative = false;
  int iterations = 0;
};

/// Direct sparse LU at desk scale, restarted GMRES with an incomplete LU
/// preconditioner above the size limit. Throws SingularOperatorError when
/// the factorisation fails or the residual exceeds opts.accept, and
/// NonConvergenceError when GMRES stalls.
SolveResult solve(const SparseC& a, const Eigen::VectorXcd& b, const SolveOptions& opts = {});
SolveResult solve(const SparseComplexOperator& op, const SolveOptions& opts = {});

/// tau u + sum_j A_j tau/(tau + sigma_j) d_j u = F with second-order central
/// differences (one-sided second order at the ends of each grid line). At a
/// boundary node the two equations are replaced by pi^-(nu) u = 0 and the
/// pi^+(nu)-projected interior equation.
SparseComplexOperator assemble_stretched(const StretchContext& ctx, const Grid& g, const SpinorField& F);
SpinorField solve_stretched(const StretchContext& ctx, const Grid& g, const SpinorField& F,
                            const SolveOptions& opts = {}, SolveResult* info = nullptr);

/// d_a f with the difference taps of assemble_stretched.
SpinorField scheme_derivative(const SpinorField& f, int axis);

/// Which kernel the boundary test functions are taken from.
enum class TestSpace {
  minus_transpose,  // pi^-(nu_tilde)^T v = 0: annihilates (V + beta) u whenever pi^+(nu_tilde)(V + beta) u = 0
  plus_transpose,   // pi^+(nu_tilde)^T v = 0
};

/// Trilinear elements on the grid cells. `form` is the scalar matrix of
/// A(tau, u, v) = a(u, v) + int tau^2 Pi u.v + int_faces Phi beta u.v
/// (the same for both spinor components); `mass`, `stiffness` and
/// `boundary_mass` are the scalar L2, H1-seminorm and face L2 Gram matrices.
struct HelmholtzAssembly {
  Grid grid;
  cplx tau;
  TestSpace test_space = TestSpace::minus_transpose;
  SparseC form;
  SparseR mass;
  SparseR stiffness;
  SparseR boundary_mass;
  Eigen::VectorXcd load;  // int f . phi_i, node-major, f = Pi (tau - sum A_j d~_j) F
  SparseC trial;          // 2N x m: face nodes restricted to range pi^+(nu_tilde)
  SparseC test;           // 2N x m: face nodes restricted to the chosen kernel

  /// A(tau, u, v) for node-major vectors of length 2N.
  cplx bilinear(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v) const;
  SparseC reduced() const;
  Eigen::VectorXcd reduced_load() const;
  double l2_squared(const Eigen::VectorXcd& u) const;
  double gradient_squared(const Eigen::VectorXcd& u) const;
  double boundary_squared(const Eigen::VectorXcd& u) const;
};

HelmholtzAssembly assemble_helmholtz(const StretchContext& ctx, const Grid& g, const SpinorField& F,
                                     TestSpace test_space = TestSpace::minus_transpose);
SpinorField solve_helmholtz(const HelmholtzAssembly& h, const SolveOptions& opts = {}, SolveResult* info = nullptr);

struct NodeResidual {
  std::vector<std::size_t> nodes;
  std::vector<double> values;
  double max = 0.0;
};

/// |pi^+(nu)(V u + tau u)| at face-interior nodes, V = tau/(tau+sigma_a) nu_a d_a
/// on the face with normal axis a; d_a by the fourth-order one-sided stencil.
NodeResidual second_bc_residual(const SpinorField& u, const StretchContext& ctx);

/// |(p - tau^2 Pi) u - Pi (sum_j A_j d~_j - tau) F| at nodes two or more
/// cells from the boundary, with p u = sum_j d_j (c_j d_j u) and every d_j the
/// central difference of the first-order scheme.
NodeResidual helmholtz_vs_stretched(const SpinorField& u, const StretchContext& ctx, const SpinorField& F);

/// Coordinate format: one "row col re im" line per stored entry (0-based).
void write_matrix_coo(const std::string& path, const SparseC& a);

}  // namespace pmllab
