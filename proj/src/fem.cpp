#include "harmrec/fem.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

namespace harmrec {

namespace {

using Triplet = Eigen::Triplet<double>;

SparseMatrix from_triplets(Eigen::Index n, const std::vector<Triplet>& triplets) {
  SparseMatrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

void check_area(std::size_t t, double area) {
  if (!(area > 0.0)) {
    throw GeometryError("degenerate or inverted triangle " + std::to_string(t) +
                        " (signed area " + std::to_string(area) + ")");
  }
}

}  // namespace

Eigen::VectorXd PointEval::as_vector(Eigen::Index n) const {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < 3; ++i) e[vertex[i]] += weight[i];
  return e;
}

DofPartition make_partition(const TriMesh& mesh) {
  DofPartition part;
  const std::size_t n = mesh.num_vertices();
  part.on_boundary.assign(n, false);
  part.local_index.assign(n, -1);
  for (int id : mesh.boundary_loop()) {
    part.local_index[id] = static_cast<int>(part.boundary_ids.size());
    part.boundary_ids.push_back(id);
    part.on_boundary[id] = true;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (part.on_boundary[i]) continue;
    part.local_index[i] = static_cast<int>(part.interior_ids.size());
    part.interior_ids.push_back(static_cast<int>(i));
  }
  return part;
}

PointEval point_eval(const TriMesh& mesh, Point p) {
  const Location loc = locate(mesh, p);
  PointEval pe;
  pe.target = p;
  pe.triangle = loc.triangle;
  pe.vertex = mesh.triangles()[static_cast<std::size_t>(loc.triangle)];
  pe.weight = loc.bary;
  return pe;
}

SymSparse assemble_volume_stiffness(const TriMesh& mesh) {
  std::vector<Triplet> triplets;
  triplets.reserve(9 * mesh.num_triangles());
  const auto v = mesh.vertices();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double area = mesh.signed_area(t);
    check_area(t, area);
    // Edge opposite vertex i; ∫∇λ_i·∇λ_j = (e_i·e_j) / (4|T|).
    std::array<Point, 3> e;
    for (int i = 0; i < 3; ++i) {
      const Point a = v[tri[(i + 1) % 3]];
      const Point b = v[tri[(i + 2) % 3]];
      e[i] = {b.x - a.x, b.y - a.y};
    }
    double k[3][3];
    for (int i = 0; i < 3; ++i) {
      for (int j = i; j < 3; ++j) {
        k[i][j] = k[j][i] = (e[i].x * e[j].x + e[i].y * e[j].y) / (4.0 * area);
      }
    }
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) triplets.emplace_back(tri[i], tri[j], k[i][j]);
    }
  }
  return {from_triplets(static_cast<Eigen::Index>(mesh.num_vertices()), triplets), true};
}

SymSparse assemble_volume_mass(const TriMesh& mesh) {
  std::vector<Triplet> triplets;
  triplets.reserve(9 * mesh.num_triangles());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double area = mesh.signed_area(t);
    check_area(t, area);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) triplets.emplace_back(tri[i], tri[j], area / 12.0 * (i == j ? 2.0 : 1.0));
    }
  }
  return {from_triplets(static_cast<Eigen::Index>(mesh.num_vertices()), triplets), true};
}

BoundaryForms assemble_boundary_h1(const TriMesh& mesh) {
  const auto loop = mesh.boundary_loop();
  const auto v = mesh.vertices();
  const auto nb = static_cast<Eigen::Index>(loop.size());
  if (nb < 3) throw GeometryError("boundary loop has fewer than three vertices");
  std::vector<Triplet> mass;
  std::vector<Triplet> stiff;
  mass.reserve(4 * loop.size());
  stiff.reserve(4 * loop.size());
  for (Eigen::Index k = 0; k < nb; ++k) {
    const Eigen::Index next = (k + 1) % nb;
    const Point a = v[loop[k]];
    const Point b = v[loop[next]];
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (!(len > 0.0)) throw GeometryError("zero-length boundary segment at loop position " + std::to_string(k));
    const std::array<Eigen::Index, 2> idx{k, next};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        mass.emplace_back(idx[i], idx[j], len / 6.0 * (i == j ? 2.0 : 1.0));
        stiff.emplace_back(idx[i], idx[j], (i == j ? 1.0 : -1.0) / len);
      }
    }
  }
  return {{from_triplets(nb, mass), true}, {from_triplets(nb, stiff), true}};
}

Eigen::VectorXd assemble_load(const TriMesh& mesh, const FieldExpr& f) {
  Eigen::VectorXd load = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.num_vertices()));
  const auto v = mesh.vertices();
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double area = mesh.signed_area(t);
    // f at the midpoint of the edge opposite vertex i; N_i is 1/2 at the
    // other two midpoints and 0 at its opposite one.
    std::array<double, 3> fm;
    for (int i = 0; i < 3; ++i) {
      const Point a = v[tri[(i + 1) % 3]];
      const Point b = v[tri[(i + 2) % 3]];
      fm[i] = f.eval({0.5 * (a.x + b.x), 0.5 * (a.y + b.y)});
    }
    for (int i = 0; i < 3; ++i) load[tri[i]] += area / 6.0 * (fm[(i + 1) % 3] + fm[(i + 2) % 3]);
  }
  return load;
}

double inf_norm(const SparseMatrix& a) {
  double best = 0.0;
  for (Eigen::Index r = 0; r < a.outerSize(); ++r) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) row += std::abs(it.value());
    best = std::max(best, row);
  }
  return best;
}

SparseMatrix extract_block(const SparseMatrix& a, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<int> col_map(static_cast<std::size_t>(a.cols()), -1);
  for (std::size_t j = 0; j < cols.size(); ++j) col_map[cols[j]] = static_cast<int>(j);
  std::vector<Triplet> triplets;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (SparseMatrix::InnerIterator it(a, rows[r]); it; ++it) {
      const int c = col_map[it.col()];
      if (c >= 0) triplets.emplace_back(static_cast<int>(r), c, it.value());
    }
  }
  SparseMatrix block(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  block.setFromTriplets(triplets.begin(), triplets.end());
  return block;
}

// ---------------------------------------------------------------------------

struct SpdSolver::Impl {
  using ColMatrix = Eigen::SparseMatrix<double>;
  SparseMatrix a;
  double a_norm = 0.0;
  Options opts;
  Method method = Method::cholesky;
  std::optional<Eigen::SimplicialLLT<ColMatrix, Eigen::Lower, Eigen::AMDOrdering<int>>> llt;
  std::optional<Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>>>
      cg;
};

SpdSolver::SpdSolver(const SparseMatrix& a, Options opts) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) throw SolverError("SPD solver needs a square matrix", 0.0);
  impl_->a = a;
  impl_->a_norm = inf_norm(a);
  impl_->opts = opts;
  Method m = opts.method;
  if (m == Method::automatic) m = a.rows() <= opts.cholesky_max_dim ? Method::cholesky : Method::conjugate_gradient;
  impl_->method = m;
  if (a.rows() == 0) return;
  if (m == Method::cholesky) {
    impl_->llt.emplace(Impl::ColMatrix(a));
    if (impl_->llt->info() != Eigen::Success) {
      throw SolverError("sparse Cholesky factorization failed (matrix not SPD?)", 0.0);
    }
  } else {
    impl_->cg.emplace();
    impl_->cg->setTolerance(opts.rel_tol);
    impl_->cg->setMaxIterations(10 * a.rows());
    impl_->cg->compute(impl_->a);
  }
}

SpdSolver::~SpdSolver() = default;
SpdSolver::SpdSolver(SpdSolver&&) noexcept = default;
SpdSolver& SpdSolver::operator=(SpdSolver&&) noexcept = default;

SpdSolver::Method SpdSolver::method() const { return impl_->method; }
Eigen::Index SpdSolver::dim() const { return impl_->a.rows(); }

double SpdSolver::backward_error(const Eigen::VectorXd& x, const Eigen::VectorXd& b) const {
  const double denom = impl_->a_norm * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
  if (denom == 0.0) return 0.0;
  const Eigen::VectorXd r = b - impl_->a * x;
  return r.lpNorm<Eigen::Infinity>() / denom;
}

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& b) const {
  if (b.size() != dim()) throw SolverError("right-hand side has the wrong dimension", 0.0);
  if (dim() == 0 || b.isZero(0.0)) return Eigen::VectorXd::Zero(dim());
  const double tol = impl_->opts.rel_tol;
  if (impl_->method == Method::cholesky) {
    Eigen::VectorXd x = impl_->llt->solve(b);
    double err = backward_error(x, b);
    for (int step = 0; step < 2 && err > tol; ++step) {
      x += impl_->llt->solve(Eigen::VectorXd(b - impl_->a * x));
      err = backward_error(x, b);
    }
    if (!(err <= tol)) throw SolverError("Cholesky solve residual above tolerance", err);
    return x;
  }
  Eigen::VectorXd x = impl_->cg->solve(b);
  const double err = backward_error(x, b);
  if (impl_->cg->info() != Eigen::Success && !(err <= tol)) {
    throw SolverError("conjugate gradients did not converge in " + std::to_string(impl_->cg->iterations()) +
                          " iterations",
                      err);
  }
  if (!(err <= tol)) throw SolverError("conjugate gradient residual above tolerance", err);
  return x;
}

// ---------------------------------------------------------------------------

DirichletOperator::DirichletOperator(MeshPtr mesh, const SymSparse& stiffness, DofPartition partition,
                                     SpdSolver::Options opts)
    : mesh_(std::move(mesh)), partition_(std::move(partition)) {
  a_ii_ = extract_block(stiffness.matrix, partition_.interior_ids, partition_.interior_ids);
  a_ib_ = extract_block(stiffness.matrix, partition_.interior_ids, partition_.boundary_ids);
  a_bi_ = extract_block(stiffness.matrix, partition_.boundary_ids, partition_.interior_ids);
  solver_ = std::make_shared<const SpdSolver>(a_ii_, opts);
}

Eigen::VectorXd DirichletOperator::gather_interior(const Eigen::VectorXd& full) const {
  Eigen::VectorXd out(partition_.num_interior());
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = full[partition_.interior_ids[i]];
  return out;
}

Eigen::VectorXd DirichletOperator::gather_boundary(const Eigen::VectorXd& full) const {
  Eigen::VectorXd out(partition_.num_boundary());
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = full[partition_.boundary_ids[i]];
  return out;
}

Eigen::VectorXd DirichletOperator::solve_interior(const Eigen::VectorXd& rhs) const { return solver_->solve(rhs); }

Eigen::VectorXd DirichletOperator::extend(const Eigen::VectorXd& g) const {
  if (g.size() != partition_.num_boundary()) throw GeometryError("boundary data has the wrong length");
  const Eigen::VectorXd u_i = solver_->solve(Eigen::VectorXd(-(a_ib_ * g)));
  Eigen::VectorXd u(static_cast<Eigen::Index>(mesh_->num_vertices()));
  for (Eigen::Index i = 0; i < u_i.size(); ++i) u[partition_.interior_ids[i]] = u_i[i];
  for (Eigen::Index i = 0; i < g.size(); ++i) u[partition_.boundary_ids[i]] = g[i];
  return u;
}

Eigen::VectorXd harmonic_extend(const MeshPtr& mesh, const SymSparse& stiffness, const DofPartition& part,
                                const Eigen::VectorXd& g) {
  return DirichletOperator(mesh, stiffness, part).extend(g);
}

CoeffVec solve_u0(const DirichletOperator& op, const FieldExpr& f) {
  const Eigen::VectorXd load = assemble_load(*op.mesh(), f);
  const Eigen::VectorXd u_i = op.solve_interior(op.gather_interior(load));
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(op.mesh()->num_vertices()));
  for (Eigen::Index i = 0; i < u_i.size(); ++i) u[op.partition().interior_ids[i]] = u_i[i];
  return {op.mesh(), std::move(u)};
}

CoeffVec solve_u0(const MeshPtr& mesh, const FieldExpr& f, SpdSolver::Options opts) {
  const DirichletOperator op(mesh, assemble_volume_stiffness(*mesh), make_partition(*mesh), opts);
  return solve_u0(op, f);
}

}  // namespace harmrec
