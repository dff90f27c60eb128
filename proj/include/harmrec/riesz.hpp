#pragma once

// Discrete Riesz representers of point evaluations on the space of discrete
// harmonic functions with the H¹(Γ) inner product of their traces.
//
// For a functional ν on V_h, the boundary datum ψ solves
//     ⟨ψ, g⟩_{H¹(Γ)} = ν(E_h g)   for every boundary nodal function g,
// and the representer is φ = E_h ψ. Splitting e = (e_I, e_B) for the
// coefficient vector of ν, ν(E_h g) = (e_B − A_BI A_II⁻¹ e_I)·g, so one
// interior solve builds the load, one boundary solve gives ψ and a second
// interior solve extends it.

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "harmrec/fem.hpp"
#include "harmrec/linalg.hpp"
#include "harmrec/mesh.hpp"

namespace harmrec {

/// Operators shared by every representer on one mesh: the stiffness matrix,
/// the boundary H¹ forms, and the factorizations of A_II and M_Γ + S_Γ.
/// Immutable after construction.
class RieszContext {
 public:
  explicit RieszContext(MeshPtr mesh, SpdSolver::Options opts = {});

  const MeshPtr& mesh() const { return dirichlet_.mesh(); }
  const SymSparse& stiffness() const { return stiffness_; }
  const BoundaryForms& boundary_forms() const { return boundary_; }
  const SparseMatrix& boundary_gram() const { return gram_; }
  const DofPartition& partition() const { return dirichlet_.partition(); }
  const DirichletOperator& dirichlet() const { return dirichlet_; }
  const SpdSolver& boundary_solver() const { return *boundary_solver_; }

  Eigen::Index num_vertices() const { return static_cast<Eigen::Index>(mesh()->num_vertices()); }

 private:
  SymSparse stiffness_;
  BoundaryForms boundary_;
  SparseMatrix gram_;
  DirichletOperator dirichlet_;
  std::shared_ptr<const SpdSolver> boundary_solver_;
};

/// max_i |(A v)_i| over interior rows, relative to ‖A‖∞‖v‖∞; zero for
/// discrete harmonic v.
double harmonic_defect(const RieszContext& ctx, const Eigen::VectorXd& v);

struct RieszDiagnostics {
  double interior_residual = 0.0;  // A_II z = e_I
  double boundary_residual = 0.0;  // (M_Γ+S_Γ) ψ = rhs
  double harmonic_residual = 0.0;  // max |(Aφ)_I| / (‖A‖∞‖φ‖∞)
};

struct RieszPair {
  Point point;
  Eigen::VectorXd psi;  // boundary-loop order
  CoeffVec phi;
  RieszDiagnostics diagnostics;
};

/// Two interior solves and one boundary solve.
RieszPair representer_schur(const RieszContext& ctx, Point x);

/// Same, for an arbitrary functional given by its coefficient vector over
/// all vertices; `label` is stored as the pair's point.
RieszPair representer_schur(const RieszContext& ctx, const Eigen::VectorXd& functional, Point label);

/// Builds the load by harmonically extending every boundary nodal basis
/// function. Throws GeometryError above `max_boundary_dofs`.
RieszPair representer_dense_oracle(const RieszContext& ctx, Point x, Eigen::Index max_boundary_dofs = 2000);

/// Load vector rhs_j = (E_h g_j)(x) of the dense oracle.
Eigen::VectorXd dense_oracle_load(const RieszContext& ctx, Point x, Eigen::Index max_boundary_dofs = 2000);

struct SaddleSolution {
  RieszPair pair;
  Eigen::VectorXd multiplier;  // π over interior DOFs
};

/// Solves the coupled indefinite system in (φ, π):
///     [ B        A_{:,I} ] [φ]   [e]
///     [ A_{I,:}  0       ] [π] = [0]
/// with B the H¹(Γ) Gram matrix acting on traces. Throws GeometryError above
/// `max_dofs` unknowns and SolverError if the factorization fails.
SaddleSolution representer_saddle_oracle(const RieszContext& ctx, Point x, Eigen::Index max_dofs = 20000);

/// Ĝ_ij = φ_j(x_i). Throws GeometryError if the pairs live on different
/// meshes or counts differ.
Eigen::MatrixXd assemble_observation_entries(std::span<const RieszPair> pairs, std::span<const Point> points);
ObservationMatrix assemble_observation(std::span<const RieszPair> pairs, std::span<const Point> points,
                                       double tau_rel = kDefaultThreshold);

/// Computes representers for all points, `threads` at a time (0 = hardware
/// concurrency). Results are in input order.
std::vector<RieszPair> compute_representers(const RieszContext& ctx, std::span<const Point> points, int threads = 1);

}  // namespace harmrec
