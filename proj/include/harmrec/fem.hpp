#pragma once

// Piecewise-linear finite element operators on a TriMesh.

#include <array>
#include <memory>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Sparse>

#include "harmrec/common.hpp"
#include "harmrec/expr.hpp"
#include "harmrec/mesh.hpp"

namespace harmrec {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Symmetric sparse operator. Element contributions are accumulated in the
/// same order for (i, j) and (j, i), so the stored matrix is bitwise
/// symmetric.
struct SymSparse {
  SparseMatrix matrix;
  bool symmetric = true;

  Eigen::Index dim() const { return matrix.rows(); }
};

/// Interior vertices (sorted) and boundary vertices (in boundary-loop order).
struct DofPartition {
  std::vector<int> interior_ids;
  std::vector<int> boundary_ids;
  std::vector<int> local_index;  // vertex -> position within its own block
  std::vector<bool> on_boundary;

  Eigen::Index num_interior() const { return static_cast<Eigen::Index>(interior_ids.size()); }
  Eigen::Index num_boundary() const { return static_cast<Eigen::Index>(boundary_ids.size()); }
};

DofPartition make_partition(const TriMesh& mesh);

/// The P1 point-evaluation functional v -> v(target).
struct PointEval {
  Point target;
  int triangle = -1;
  std::array<int, 3> vertex{};
  std::array<double, 3> weight{};

  double apply(const Eigen::VectorXd& coeffs) const {
    return weight[0] * coeffs[vertex[0]] + weight[1] * coeffs[vertex[1]] + weight[2] * coeffs[vertex[2]];
  }
  /// Dense representation over all vertices.
  Eigen::VectorXd as_vector(Eigen::Index n) const;
};

PointEval point_eval(const TriMesh& mesh, Point p);

/// A[i][j] = ∫ ∇N_i·∇N_j. Throws GeometryError on a degenerate triangle.
SymSparse assemble_volume_stiffness(const TriMesh& mesh);

/// M[i][j] = ∫ N_i N_j.
SymSparse assemble_volume_mass(const TriMesh& mesh);

/// Mass and stiffness of the closed boundary curve parametrized by arc
/// length, indexed by boundary-loop position. ⟨u, v⟩_{H¹(Γ)} = uᵀ(M+S)v.
struct BoundaryForms {
  SymSparse mass;
  SymSparse stiffness;

  SparseMatrix h1_gram() const { return mass.matrix + stiffness.matrix; }
};

BoundaryForms assemble_boundary_h1(const TriMesh& mesh);

/// Load vector ∫ f N_i by the edge-midpoint rule on each triangle.
Eigen::VectorXd assemble_load(const TriMesh& mesh, const FieldExpr& f);

/// Maximum absolute row sum.
double inf_norm(const SparseMatrix& a);

/// Sub-block rows × cols of a sparse matrix.
SparseMatrix extract_block(const SparseMatrix& a, const std::vector<int>& rows, const std::vector<int>& cols);

/// Solves SPD systems to a fixed backward-error tolerance. The default
/// policy factorizes with sparse Cholesky and switches to Jacobi-
/// preconditioned conjugate gradients above `cholesky_max_dim`. The solver
/// is read-only after construction and can be shared between threads.
enum class SpdMethod { automatic, cholesky, conjugate_gradient };

struct SpdOptions {
  SpdMethod method = SpdMethod::automatic;
  Eigen::Index cholesky_max_dim = 2'000'000;
  double rel_tol = 1e-12;
};

class SpdSolver {
 public:
  using Method = SpdMethod;
  using Options = SpdOptions;

  explicit SpdSolver(const SparseMatrix& a, Options opts = {});
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  /// Throws SolverError if the normwise backward error
  /// ‖b − Ax‖ / (‖A‖‖x‖ + ‖b‖) stays above the tolerance.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  /// Normwise backward error of x for the system Ax = b.
  double backward_error(const Eigen::VectorXd& x, const Eigen::VectorXd& b) const;

  Method method() const;
  Eigen::Index dim() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Discrete harmonic extension and homogeneous Dirichlet solves on one mesh,
/// sharing one factorization of the interior stiffness block A_II.
class DirichletOperator {
 public:
  DirichletOperator(MeshPtr mesh, const SymSparse& stiffness, DofPartition partition,
                    SpdSolver::Options opts = {});

  const MeshPtr& mesh() const { return mesh_; }
  const DofPartition& partition() const { return partition_; }
  const SparseMatrix& interior_block() const { return a_ii_; }
  const SparseMatrix& interior_boundary_block() const { return a_ib_; }
  const SparseMatrix& boundary_interior_block() const { return a_bi_; }
  const SpdSolver& interior_solver() const { return *solver_; }

  /// u with u_B = g and A_II u_I = −A_IB g.
  Eigen::VectorXd extend(const Eigen::VectorXd& g) const;

  /// Solution z of A_II z = rhs over interior DOFs.
  Eigen::VectorXd solve_interior(const Eigen::VectorXd& rhs) const;

  Eigen::VectorXd gather_interior(const Eigen::VectorXd& full) const;
  Eigen::VectorXd gather_boundary(const Eigen::VectorXd& full) const;

 private:
  MeshPtr mesh_;
  DofPartition partition_;
  SparseMatrix a_ii_;
  SparseMatrix a_ib_;
  SparseMatrix a_bi_;
  std::shared_ptr<const SpdSolver> solver_;
};

/// One-shot harmonic extension of boundary data g (boundary-loop order).
Eigen::VectorXd harmonic_extend(const MeshPtr& mesh, const SymSparse& stiffness, const DofPartition& part,
                                const Eigen::VectorXd& g);

/// P1 Galerkin solution of −Δu = f with u = 0 on the boundary.
CoeffVec solve_u0(const MeshPtr& mesh, const FieldExpr& f, SpdSolver::Options opts = {});
CoeffVec solve_u0(const DirichletOperator& op, const FieldExpr& f);

}  // namespace harmrec
