// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Tolerances are fixed here and not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "harmrec/metrics.hpp"
#include "harmrec/parallel.hpp"
#include "harmrec/recovery.hpp"
#include "harmrec/riesz.hpp"
#include "oracles.hpp"

using namespace harmrec;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[violated: " << what << "] ";
    }
  }
};

const int kThreads = static_cast<int>(resolve_threads(0));

double max_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).lpNorm<Eigen::Infinity>(); }

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

// 1. schur / dense / saddle agreement
void oracle_triple(Outcome& out) {
  const double tol = 1e-9;
  const MeshPtr fine = generate(DomainSpec::unit_square(), 3);
  double worst = 0.0;
  for (int k = 1; k <= 3; ++k) {
    const RieszContext ctx(hierarchy_level(fine, k));
    for (const Point x : {Point{0.5, 0.5}, Point{0.3, 0.8}}) {
      const RieszPair s = representer_schur(ctx, x);
      const RieszPair d = representer_dense_oracle(ctx, x);
      const SaddleSolution p = representer_saddle_oracle(ctx, x);
      worst = std::max({worst, max_diff(s.psi, d.psi), max_diff(s.psi, p.pair.psi), max_diff(d.psi, p.pair.psi)});
    }
  }
  out.detail << "max |psi_a - psi_b| = " << worst << " (tol " << tol << ") ";
  out.require(worst <= tol, "psi agreement");
}

// 2. Gram structure of the observation matrix
void gram_structure(Outcome& out) {
  const RieszContext ctx(generate(DomainSpec::unit_square(), 5));
  const auto pts = box_formation(16);
  const Eigen::MatrixXd g = assemble_observation_entries(compute_representers(ctx, pts, kThreads), pts);
  const double gn = g.lpNorm<Eigen::Infinity>();
  const double asym = (g - g.transpose()).lpNorm<Eigen::Infinity>() / gn;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()));
  const double lmin = es.eigenvalues().minCoeff();
  out.detail << "asymmetry " << asym << " (tol 1e-8), min eigenvalue / |G| = " << lmin / gn << " (>= -1e-10) ";
  out.require(asym <= 1e-8, "symmetry");
  out.require(lmin >= -1e-10 * gn, "positive semidefinite");
}

// 3. harmonic extension: Galerkin orthogonality and energy minimality
void harmonic_extension(Outcome& out) {
  std::mt19937 rng(31);
  std::normal_distribution<double> g01;
  double worst_orth = 0.0;
  int energy_violations = 0;
  for (const DomainSpec spec : {DomainSpec::unit_square(), DomainSpec::l_shape(), DomainSpec::polygon_disc(6)}) {
    const MeshPtr m = generate(spec, 4);
    const SymSparse a = assemble_volume_stiffness(*m);
    const DofPartition part = make_partition(*m);
    Eigen::VectorXd g(part.num_boundary());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = g01(rng);
    const Eigen::VectorXd u = harmonic_extend(m, a, part, g);
    const Eigen::VectorXd au = a.matrix * u;
    const double scale = inf_norm(a.matrix) * u.lpNorm<Eigen::Infinity>();
    for (int i : part.interior_ids) worst_orth = std::max(worst_orth, std::abs(au[i]) / scale);
    const double e0 = u.dot(au);
    for (int t = 0; t < 20; ++t) {
      Eigen::VectorXd w = u;
      const double amp = std::pow(10.0, -(t % 5));
      for (int i : part.interior_ids) w[i] += amp * g01(rng);
      if (!(e0 <= w.dot(a.matrix * w))) ++energy_violations;
    }
  }
  out.detail << "max relative interior residual " << worst_orth << " (tol 1e-10), energy violations "
             << energy_violations << "/60 ";
  out.require(worst_orth <= 1e-10, "orthogonality");
  out.require(energy_violations == 0, "energy minimality");
}

// 4. interpolation constraint
void measurement_consistency(Outcome& out) {
  const RieszContext ctx(generate(DomainSpec::unit_square(), 6));
  const FieldExpr field = FieldExpr::parse("exp(x)*cos(y)");
  for (int m : {4, 16}) {
    const MeasurementSet meas = synthesize_measurements(field, box_formation(m));
    RecoveryOptions opts;
    opts.threads = kThreads;
    const RecoveryResult r = run_recovery(ctx, FieldExpr::parse("0"), meas, opts);
    double winf = 0.0;
    for (double w : meas.values) winf = std::max(winf, std::abs(w));
    out.detail << "m=" << m << ": max residual " << r.diagnostics.max_residual << ", discarded "
               << r.diagnostics.discarded << "; ";
    out.require(r.diagnostics.discarded == 0, "no discarded singular values at m=" + std::to_string(m));
    out.require(r.diagnostics.max_residual <= 1e-8 * (1.0 + winf), "residual at m=" + std::to_string(m));
  }
}

// 5. Moore-Penrose identities
void moore_penrose(Outcome& out) {
  std::mt19937 rng(5);
  std::normal_distribution<double> g01;
  double worst = 0.0;
  for (int m = 1; m <= 64; ++m) {
    Eigen::MatrixXd b(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) b(i, j) = g01(rng);
    const Eigen::MatrixXd a = b * b.transpose() + 1e-2 * Eigen::MatrixXd::Identity(m, m);
    const Eigen::MatrixXd p = pinv_threshold(a, 0.0).matrix;
    auto rel = [](const Eigen::MatrixXd& e, const Eigen::MatrixXd& r) { return e.norm() / r.norm(); };
    worst = std::max({worst, rel(a * p * a - a, a), rel(p * a * p - p, p),
                      rel((a * p).transpose() - a * p, a * p), rel((p * a).transpose() - p * a, p * a)});
  }
  out.detail << "worst relative identity defect over m = 1..64: " << worst << " (tol 1e-9) ";
  out.require(worst <= 1e-9, "Moore-Penrose identities");
}

// 6. Poisson solution against the sine series
void poisson_oracle(Outcome& out) {
  const double ref = oracle::square_poisson_center(2.0);
  const MeshPtr fine = generate(DomainSpec::unit_square(), 6);
  const FieldExpr f = FieldExpr::parse("2");
  out.detail << "series value " << ref << "; ";
  for (const auto& [k, tol] : {std::pair{5, 3e-3}, std::pair{6, 1e-3}}) {
    const CoeffVec u = solve_u0(hierarchy_level(fine, k), f);
    const double err = std::abs(point_eval(*u.mesh, {0.5, 0.5}).apply(u.values) - ref);
    out.detail << "level " << k << " error " << err << " (tol " << tol << "); ";
    out.require(err <= tol, "level " + std::to_string(k));
  }
}

struct Slopes {
  double h1, linf, linf_d;
};

Slopes rate_study(const DomainSpec& spec, Point x, double d, std::ostringstream& detail) {
  StudyOptions opts;
  opts.k_min = 3;
  opts.k_max = 6;
  opts.surrogate_level = 8;
  opts.d = d;
  opts.threads = kThreads;
  const ErrorReport rep = convergence_study(spec, RepresenterTarget{x}, opts);
  std::vector<int> levels;
  std::vector<double> h1, linf, linf_d;
  for (const ErrorRow& r : rep.rows) {
    if (r.level < 4) continue;
    levels.push_back(r.level);
    h1.push_back(r.err_h1);
    linf.push_back(r.err_linf);
    linf_d.push_back(r.err_linf_d);
  }
  const Slopes s{fit_rate(levels, h1), fit_rate(levels, linf), fit_rate(levels, linf_d)};
  detail << "slopes k=4..6 (K=8, d=" << d << "): H1 " << s.h1 << ", Linf " << s.linf << ", Linf_d " << s.linf_d
         << "; ";
  return s;
}

// 7. square, interior point
void square_interior(Outcome& out) {
  const Slopes s = rate_study(DomainSpec::unit_square(), {0.5, 0.5}, 0.25, out.detail);
  out.require(within(s.h1, 0.85, 1.15), "H1 in [0.85, 1.15]");
  out.require(within(s.linf, 1.6, 2.2), "Linf in [1.6, 2.2]");
  out.require(within(s.linf_d, 1.7, 2.3), "Linf_d in [1.7, 2.3]");
}

// 8. square, boundary point
void square_boundary(Outcome& out) {
  const Slopes s = rate_study(DomainSpec::unit_square(), {0.0, std::sqrt(2.0) / 2.0}, 0.25, out.detail);
  out.require(within(s.h1, 0.8, 1.3), "H1 in [0.8, 1.3]");
  out.require(within(s.linf, 0.8, 1.3), "Linf in [0.8, 1.3]");
  out.require(within(s.linf_d, 1.6, 2.3), "Linf_d in [1.6, 2.3]");
}

// 9. L-shape
void l_shape(Outcome& out) {
  // Omega_d is set by the measurement: d is the distance from the point to the boundary.
  const Point x{-0.47, 0.47};
  const double d = dist_to_boundary(*generate(DomainSpec::l_shape(), 0), x);
  const Slopes s = rate_study(DomainSpec::l_shape(), x, d, out.detail);
  out.require(s.h1 >= 0.6, "H1 >= 0.6");
  out.require(s.linf >= 0.6, "Linf >= 0.6");
  out.require(s.linf_d >= 1.2, "Linf_d >= 1.2");
}

// 10. deterioration towards the boundary
void boundary_proximity(Outcome& out) {
  const std::vector<Point> pts{{0.9, 0.5}, {0.95, 0.5}, {0.975, 0.5}, {0.9875, 0.5}};
  StudyOptions opts;
  opts.threads = kThreads;
  const auto rows = boundary_proximity_study(DomainSpec::unit_square(), pts, 6, 8, opts);
  for (const auto& r : rows) out.detail << "d=" << r.d << ": H1 " << r.err_h1 << ", Linf " << r.err_linf << "; ";
  for (std::size_t i = 1; i < rows.size(); ++i) {
    out.require(rows[i].err_h1 > rows[i - 1].err_h1, "H1 increases at d=" + std::to_string(rows[i].d));
    out.require(rows[i].err_linf > rows[i - 1].err_linf, "Linf increases at d=" + std::to_string(rows[i].d));
  }
}

// 11. recovery trend with the box formation
void recovery_trend(Outcome& out) {
  const FieldExpr exact = FieldExpr::parse("exp(x)*cos(y)");
  const FieldExpr f = FieldExpr::parse("0");
  StudyOptions opts;
  opts.k_min = 6;
  opts.k_max = 7;
  opts.d = 0.45;
  opts.threads = kThreads;
  double at7[2] = {0, 0};
  for (int which = 0; which < 2; ++which) {
    const int m = which == 0 ? 4 : 16;
    const auto rows = recovery_study(DomainSpec::unit_square(), f, synthesize_measurements(exact, box_formation(m)),
                                     &exact, kDefaultThreshold, opts);
    const double e6 = *rows[0].err_linf_d;
    const double e7 = *rows[1].err_linf_d;
    at7[which] = e7;
    out.detail << "m=" << m << ": Linf(Omega_0.45) level 6 " << e6 << ", level 7 " << e7 << "; ";
    if (m == 4) {
      out.detail << "plateau ratio " << e7 / e6 << " (>= 0.5); ";
      out.require(e7 / e6 >= 0.5, "m=4 plateau");
    }
  }
  out.require(at7[1] < at7[0], "m=16 error below m=4 error");
  // Non-blocking: order-of-magnitude comparison with the published plateaus.
  const bool m4_close = at7[0] / 2e-2 <= 10.0 && at7[0] / 2e-2 >= 0.1;
  const bool m16_close = at7[1] / 1e-4 <= 10.0 && at7[1] / 1e-4 >= 0.1;
  out.detail << "reference plateaus 2e-2 (m=4), 1e-4 (m=16): within x10 " << (m4_close ? "yes" : "no") << " / "
             << (m16_close ? "yes" : "no") << " (informational) ";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"oracle triple-equality", oracle_triple},
      {"Gram structure", gram_structure},
      {"harmonic extension orthogonality and minimality", harmonic_extension},
      {"measurement consistency", measurement_consistency},
      {"pseudo-inverse Moore-Penrose identities", moore_penrose},
      {"Poisson solution vs sine series", poisson_oracle},
      {"square interior point rates", square_interior},
      {"square boundary point rates", square_boundary},
      {"L-shape rates", l_shape},
      {"boundary proximity deterioration", boundary_proximity},
      {"recovery trend with box formation", recovery_trend},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(out);
    } catch (const std::exception& e) {
      out.pass = false;
      out.detail << "[exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!out.pass) ++failures;
    std::printf("%s %2zu %s: %s(%.1fs)\n", out.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                out.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
