#include "harmrec/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "harmrec/parallel.hpp"
#include "harmrec/riesz.hpp"

namespace harmrec {

namespace {

Point centroid(const TriMesh& mesh, const Triangle& t) {
  const auto v = mesh.vertices();
  return {(v[t[0]].x + v[t[1]].x + v[t[2]].x) / 3.0, (v[t[0]].y + v[t[1]].y + v[t[2]].y) / 3.0};
}

void check_levels(const StudyOptions& opts) {
  if (opts.k_min < 0 || opts.k_min > opts.k_max) {
    throw std::invalid_argument("levels: need 0 <= k_min <= k_max");
  }
  if (opts.k_max >= opts.surrogate_level) throw std::invalid_argument("levels: need k_max < K");
  if (opts.surrogate_level - opts.k_max < opts.min_gap) {
    throw std::invalid_argument("levels: surrogate level K must exceed k_max by at least " +
                                std::to_string(opts.min_gap));
  }
}

CoeffVec solve_target(const MeshPtr& mesh, const StudyTarget& target, const StudyOptions& opts) {
  const RieszContext ctx(mesh, opts.solver);
  if (const auto* rep = std::get_if<RepresenterTarget>(&target)) return representer_schur(ctx, rep->point).phi;
  const auto& rec = std::get<RecoveryTarget>(target);
  RecoveryOptions ropts;
  ropts.tau_rel = rec.tau_rel;
  ropts.threads = 1;
  return run_recovery(ctx, rec.f, rec.measurements, ropts).ustar;
}

}  // namespace

ErrorNorms::ErrorNorms(MeshPtr fine) : fine_(std::move(fine)) {
  h1_gram_ = assemble_volume_stiffness(*fine_).matrix + assemble_volume_mass(*fine_).matrix;
  sample_dist_.reserve(fine_->num_vertices() + fine_->num_triangles());
  for (const Point& p : fine_->vertices()) sample_dist_.push_back(dist_to_boundary(*fine_, p));
  for (const auto& t : fine_->triangles()) sample_dist_.push_back(dist_to_boundary(*fine_, centroid(*fine_, t)));
}

Eigen::VectorXd ErrorNorms::difference(const CoeffVec& a, const CoeffVec& b) const {
  return prolong(a, fine_).values - prolong(b, fine_).values;
}

double ErrorNorms::max_abs(const Eigen::VectorXd& e, double d) const {
  const std::size_t nv = fine_->num_vertices();
  double best = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < nv; ++i) {
    if (d > 0.0 && sample_dist_[i] < d) continue;
    any = true;
    best = std::max(best, std::abs(e[static_cast<Eigen::Index>(i)]));
  }
  const auto tris = fine_->triangles();
  for (std::size_t t = 0; t < tris.size(); ++t) {
    if (d > 0.0 && sample_dist_[nv + t] < d) continue;
    any = true;
    best = std::max(best, std::abs((e[tris[t][0]] + e[tris[t][1]] + e[tris[t][2]]) / 3.0));
  }
  if (!any) throw GeometryError("no evaluation point at distance >= " + std::to_string(d) + " from the boundary");
  return best;
}

double ErrorNorms::h1(const CoeffVec& a, const CoeffVec& b) const {
  const Eigen::VectorXd e = difference(a, b);
  return std::sqrt(std::max(0.0, e.dot(h1_gram_ * e)));
}

double ErrorNorms::linf(const CoeffVec& a, const CoeffVec& b) const { return max_abs(difference(a, b), 0.0); }

double ErrorNorms::linf_d(const CoeffVec& a, const CoeffVec& b, double d) const {
  return max_abs(difference(a, b), d);
}

double h1_error(const MeshPtr& fine, const CoeffVec& a, const CoeffVec& b) { return ErrorNorms(fine).h1(a, b); }
double linf_error(const MeshPtr& fine, const CoeffVec& a, const CoeffVec& b) { return ErrorNorms(fine).linf(a, b); }
double linf_d_error(const MeshPtr& fine, const CoeffVec& a, const CoeffVec& b, double d) {
  return ErrorNorms(fine).linf_d(a, b, d);
}

double linf_error_to_field(const CoeffVec& u, const FieldExpr& exact, double d) {
  const TriMesh& mesh = *u.mesh;
  double best = 0.0;
  bool any = false;
  const auto v = mesh.vertices();
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (d > 0.0 && dist_to_boundary(mesh, v[i]) < d) continue;
    any = true;
    best = std::max(best, std::abs(u.values[static_cast<Eigen::Index>(i)] - exact.eval(v[i])));
  }
  for (const auto& t : mesh.triangles()) {
    const Point c = centroid(mesh, t);
    if (d > 0.0 && dist_to_boundary(mesh, c) < d) continue;
    any = true;
    const double uc = (u.values[t[0]] + u.values[t[1]] + u.values[t[2]]) / 3.0;
    best = std::max(best, std::abs(uc - exact.eval(c)));
  }
  if (!any) throw GeometryError("no evaluation point at distance >= " + std::to_string(d) + " from the boundary");
  return best;
}

void fill_rates(ErrorReport& report) {
  auto rate = [](double coarse, double fine) -> std::optional<double> {
    if (!(coarse > 0.0) || !(fine > 0.0)) return std::nullopt;
    return std::log2(coarse / fine);
  };
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    ErrorRow& row = report.rows[i];
    if (i == 0) {
      row.rate_h1 = row.rate_linf = row.rate_linf_d = std::nullopt;
      continue;
    }
    const ErrorRow& prev = report.rows[i - 1];
    row.rate_h1 = rate(prev.err_h1, row.err_h1);
    row.rate_linf = rate(prev.err_linf, row.err_linf);
    row.rate_linf_d = rate(prev.err_linf_d, row.err_linf_d);
  }
}

double fit_rate(std::span<const int> levels, std::span<const double> errors) {
  if (levels.size() != errors.size() || levels.size() < 2) {
    throw std::invalid_argument("fit_rate: need at least two (level, error) pairs");
  }
  const double n = static_cast<double>(levels.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double x = levels[i];
    const double y = -std::log2(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ErrorReport convergence_study(const DomainSpec& spec, const StudyTarget& target, const StudyOptions& opts) {
  check_levels(opts);
  const MeshPtr fine = generate(spec, opts.surrogate_level, opts.mesh);
  const CoeffVec surrogate = solve_target(fine, target, opts);
  const ErrorNorms norms(fine);

  ErrorReport report;
  report.surrogate_level = opts.surrogate_level;
  report.d = opts.d;
  report.rows.resize(static_cast<std::size_t>(opts.k_max - opts.k_min + 1));
  parallel_for(report.rows.size(), opts.threads, [&](std::size_t i) {
    const int k = opts.k_min + static_cast<int>(i);
    const MeshPtr mesh = hierarchy_level(fine, k);
    const CoeffVec u = solve_target(mesh, target, opts);
    ErrorRow& row = report.rows[i];
    row.level = k;
    row.h = mesh->mesh_size();
    row.err_h1 = norms.h1(surrogate, u);
    row.err_linf = norms.linf(surrogate, u);
    row.err_linf_d = norms.linf_d(surrogate, u, opts.d);
  });
  fill_rates(report);
  return report;
}

std::vector<ProximityRow> boundary_proximity_study(const DomainSpec& spec, std::span<const Point> points, int k,
                                                   int surrogate_level, const StudyOptions& opts) {
  if (k < 0 || k >= surrogate_level) throw std::invalid_argument("levels: need 0 <= k < K");
  const MeshPtr fine = generate(spec, surrogate_level, opts.mesh);
  const MeshPtr coarse = hierarchy_level(fine, k);
  const RieszContext fine_ctx(fine, opts.solver);
  const RieszContext coarse_ctx(coarse, opts.solver);
  const ErrorNorms norms(fine);

  std::vector<ProximityRow> rows(points.size());
  parallel_for(points.size(), opts.threads, [&](std::size_t i) {
    const Point p = points[i];
    const CoeffVec phi_fine = representer_schur(fine_ctx, p).phi;
    const CoeffVec phi_coarse = representer_schur(coarse_ctx, p).phi;
    rows[i] = {p, dist_to_boundary(*fine, p), norms.h1(phi_fine, phi_coarse), norms.linf(phi_fine, phi_coarse)};
  });
  return rows;
}

std::vector<RecoveryRow> recovery_study(const DomainSpec& spec, const FieldExpr& f, const MeasurementSet& meas,
                                        const FieldExpr* exact, double tau_rel, const StudyOptions& opts) {
  if (opts.k_min < 0 || opts.k_min > opts.k_max) throw std::invalid_argument("levels: need 0 <= k_min <= k_max");
  const MeshPtr fine = generate(spec, opts.k_max, opts.mesh);
  std::vector<RecoveryRow> rows(static_cast<std::size_t>(opts.k_max - opts.k_min + 1));
  parallel_for(rows.size(), opts.threads, [&](std::size_t i) {
    const int k = opts.k_min + static_cast<int>(i);
    const MeshPtr mesh = hierarchy_level(fine, k);
    const RieszContext ctx(mesh, opts.solver);
    RecoveryOptions ropts;
    ropts.tau_rel = tau_rel;
    const RecoveryResult res = run_recovery(ctx, f, meas, ropts);
    RecoveryRow& row = rows[i];
    row.level = k;
    row.h = mesh->mesh_size();
    if (exact) {
      row.err_linf = linf_error_to_field(res.ustar, *exact, 0.0);
      row.err_linf_d = linf_error_to_field(res.ustar, *exact, opts.d);
    }
    row.max_residual = res.diagnostics.max_residual;
    row.discarded = res.diagnostics.discarded;
    row.condition = res.diagnostics.condition;
    row.warnings = res.diagnostics.warnings;
  });
  return rows;
}

}  // namespace harmrec
