#include "harmrec/riesz.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/SparseLU>

#include "harmrec/parallel.hpp"

namespace harmrec {

namespace {

RieszPair finish_pair(const RieszContext& ctx, Point label, Eigen::VectorXd psi, const Eigen::VectorXd& rhs,
                      double interior_residual) {
  RieszPair pair;
  pair.point = label;
  pair.diagnostics.interior_residual = interior_residual;
  pair.diagnostics.boundary_residual = ctx.boundary_solver().backward_error(psi, rhs);
  pair.phi = {ctx.mesh(), ctx.dirichlet().extend(psi)};
  pair.psi = std::move(psi);
  pair.diagnostics.harmonic_residual = harmonic_defect(ctx, pair.phi.values);
  return pair;
}

}  // namespace

double harmonic_defect(const RieszContext& ctx, const Eigen::VectorXd& v) {
  const auto& op = ctx.dirichlet();
  if (op.partition().num_interior() == 0) return 0.0;
  const Eigen::VectorXd r = op.interior_block() * op.gather_interior(v) +
                            op.interior_boundary_block() * op.gather_boundary(v);
  const double denom = inf_norm(ctx.stiffness().matrix) * v.lpNorm<Eigen::Infinity>();
  return denom == 0.0 ? 0.0 : r.lpNorm<Eigen::Infinity>() / denom;
}

RieszContext::RieszContext(MeshPtr mesh, SpdSolver::Options opts)
    : stiffness_(assemble_volume_stiffness(*mesh)),
      boundary_(assemble_boundary_h1(*mesh)),
      gram_(boundary_.h1_gram()),
      dirichlet_(mesh, stiffness_, make_partition(*mesh), opts),
      boundary_solver_(std::make_shared<const SpdSolver>(gram_, opts)) {}

RieszPair representer_schur(const RieszContext& ctx, const Eigen::VectorXd& functional, Point label) {
  if (functional.size() != ctx.num_vertices()) throw GeometryError("functional has the wrong length");
  const auto& op = ctx.dirichlet();
  const Eigen::VectorXd e_i = op.gather_interior(functional);
  const Eigen::VectorXd e_b = op.gather_boundary(functional);
  const Eigen::VectorXd z = op.solve_interior(e_i);
  const double interior_residual = op.interior_solver().backward_error(z, e_i);
  const Eigen::VectorXd rhs = e_b - op.boundary_interior_block() * z;
  Eigen::VectorXd psi = ctx.boundary_solver().solve(rhs);
  return finish_pair(ctx, label, std::move(psi), rhs, interior_residual);
}

RieszPair representer_schur(const RieszContext& ctx, Point x) {
  const PointEval pe = point_eval(*ctx.mesh(), x);
  return representer_schur(ctx, pe.as_vector(ctx.num_vertices()), x);
}

Eigen::VectorXd dense_oracle_load(const RieszContext& ctx, Point x, Eigen::Index max_boundary_dofs) {
  const Eigen::Index nb = ctx.partition().num_boundary();
  if (nb > max_boundary_dofs) {
    throw GeometryError("dense oracle limited to " + std::to_string(max_boundary_dofs) + " boundary DOFs, mesh has " +
                        std::to_string(nb));
  }
  const PointEval pe = point_eval(*ctx.mesh(), x);
  Eigen::VectorXd rhs(nb);
  for (Eigen::Index j = 0; j < nb; ++j) {
    rhs[j] = pe.apply(ctx.dirichlet().extend(Eigen::VectorXd::Unit(nb, j)));
  }
  return rhs;
}

RieszPair representer_dense_oracle(const RieszContext& ctx, Point x, Eigen::Index max_boundary_dofs) {
  const Eigen::VectorXd rhs = dense_oracle_load(ctx, x, max_boundary_dofs);
  Eigen::VectorXd psi = ctx.boundary_solver().solve(rhs);
  return finish_pair(ctx, x, std::move(psi), rhs, 0.0);
}

SaddleSolution representer_saddle_oracle(const RieszContext& ctx, Point x, Eigen::Index max_dofs) {
  const DofPartition& part = ctx.partition();
  const Eigen::Index n = ctx.num_vertices();
  const Eigen::Index ni = part.num_interior();
  if (n + ni > max_dofs) {
    throw GeometryError("saddle-point oracle limited to " + std::to_string(max_dofs) + " unknowns");
  }

  std::vector<Eigen::Triplet<double>> triplets;
  // Boundary Gram block on the trace unknowns.
  const SparseMatrix& gram = ctx.boundary_gram();
  for (Eigen::Index r = 0; r < gram.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(gram, r); it; ++it) {
      triplets.emplace_back(part.boundary_ids[it.row()], part.boundary_ids[it.col()], it.value());
    }
  }
  // Stiffness columns for interior multipliers, and its transpose as the
  // discrete harmonicity constraint.
  const SparseMatrix& a = ctx.stiffness().matrix;
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) {
      const int c = static_cast<int>(it.col());
      if (part.on_boundary[c]) continue;
      const Eigen::Index mult = n + part.local_index[c];
      triplets.emplace_back(it.row(), mult, it.value());
      triplets.emplace_back(mult, it.row(), it.value());
    }
  }
  Eigen::SparseMatrix<double> k(n + ni, n + ni);
  k.setFromTriplets(triplets.begin(), triplets.end());

  const PointEval pe = point_eval(*ctx.mesh(), x);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + ni);
  rhs.head(n) = pe.as_vector(n);

  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(k);
  if (lu.info() != Eigen::Success) throw SolverError("saddle-point factorization failed: " + lu.lastErrorMessage(), 0.0);
  const Eigen::VectorXd sol = lu.solve(rhs);
  const double residual = (k * sol - rhs).lpNorm<Eigen::Infinity>();

  SaddleSolution out;
  out.pair.point = x;
  out.pair.phi = {ctx.mesh(), sol.head(n)};
  out.pair.psi = ctx.dirichlet().gather_boundary(out.pair.phi.values);
  out.pair.diagnostics.boundary_residual = residual;
  out.pair.diagnostics.harmonic_residual = harmonic_defect(ctx, out.pair.phi.values);
  out.multiplier = sol.tail(ni);
  return out;
}

Eigen::MatrixXd assemble_observation_entries(std::span<const RieszPair> pairs, std::span<const Point> points) {
  if (pairs.size() != points.size()) throw GeometryError("observation matrix: pair and point counts differ");
  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd g(m, m);
  if (m == 0) return g;
  const MeshPtr& mesh = pairs.front().phi.mesh;
  std::vector<PointEval> evals;
  evals.reserve(points.size());
  for (const Point& p : points) evals.push_back(point_eval(*mesh, p));
  for (Eigen::Index j = 0; j < m; ++j) {
    const RieszPair& pj = pairs[static_cast<std::size_t>(j)];
    if (pj.phi.mesh != mesh) throw GeometryError("observation matrix: representers live on different meshes");
    for (Eigen::Index i = 0; i < m; ++i) g(i, j) = evals[static_cast<std::size_t>(i)].apply(pj.phi.values);
  }
  return g;
}

ObservationMatrix assemble_observation(std::span<const RieszPair> pairs, std::span<const Point> points,
                                       double tau_rel) {
  return ObservationMatrix(assemble_observation_entries(pairs, points), tau_rel);
}

std::vector<RieszPair> compute_representers(const RieszContext& ctx, std::span<const Point> points, int threads) {
  std::vector<RieszPair> pairs(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) { pairs[i] = representer_schur(ctx, points[i]); });
  return pairs;
}

}  // namespace harmrec
