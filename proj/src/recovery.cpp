#include "harmrec/recovery.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace harmrec {

void MeasurementSet::validate() const {
  if (points.size() != values.size()) {
    throw GeometryError("measurement set has " + std::to_string(points.size()) + " points but " +
                        std::to_string(values.size()) + " values");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (std::hypot(points[i].x - points[j].x, points[i].y - points[j].y) <= 1e-10) {
        throw GeometryError("measurement points " + std::to_string(i) + " and " + std::to_string(j) +
                            " coincide");
      }
    }
  }
}

std::vector<Point> box_formation(int m) {
  if (m <= 0 || m % 4 != 0 || m / 4 > 16) {
    throw std::invalid_argument("box formation needs m = 4n with 1 <= n <= 16, got " + std::to_string(m));
  }
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m / 4; ++i) {
    const double t = (i + 1) / 17.0;
    pts.push_back({0.9, t});
    pts.push_back({0.1, t});
    pts.push_back({t, 0.1});
    pts.push_back({t, 0.9});
  }
  return pts;
}

std::vector<Point> grid_formation(int m) {
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(std::max(m, 0)))));
  if (m <= 0 || n * n != m) throw std::invalid_argument("grid formation needs a perfect square m, got " + std::to_string(m));
  std::vector<Point> pts;
  pts.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) pts.push_back({(i + 1.0) / (n + 1.0), (j + 1.0) / (n + 1.0)});
  }
  return pts;
}

MeasurementSet synthesize_measurements(const FieldExpr& field, std::span<const Point> points, double noise,
                                       std::uint64_t seed) {
  MeasurementSet meas;
  meas.points.assign(points.begin(), points.end());
  meas.provenance = Provenance::synthetic;
  meas.field = field.source();
  meas.noise = noise;
  meas.values.reserve(points.size());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (const Point& p : points) {
    double v = field.eval(p);
    if (noise > 0.0) v += noise * unit(rng);
    meas.values.push_back(v);
  }
  return meas;
}

RecoveryResult run_recovery(const RieszContext& ctx, const FieldExpr& f, const MeasurementSet& meas,
                            const RecoveryOptions& opts) {
  meas.validate();
  const MeshPtr& mesh = ctx.mesh();
  const auto m = static_cast<Eigen::Index>(meas.size());

  CoeffVec u0h = solve_u0(ctx.dirichlet(), f);

  std::vector<PointEval> evals;
  evals.reserve(meas.size());
  for (const Point& p : meas.points) evals.push_back(point_eval(*mesh, p));
  Eigen::VectorXd omega_hat(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    omega_hat[i] = meas.values[static_cast<std::size_t>(i)] - evals[static_cast<std::size_t>(i)].apply(u0h.values);
  }

  std::vector<RieszPair> pairs = compute_representers(ctx, meas.points, opts.threads);
  ObservationMatrix ghat = assemble_observation(pairs, meas.points, opts.tau_rel);
  Eigen::VectorXd uhat = ghat.solve(omega_hat);

  Eigen::VectorXd harmonic = Eigen::VectorXd::Zero(ctx.num_vertices());
  for (Eigen::Index i = 0; i < m; ++i) harmonic += uhat[i] * pairs[static_cast<std::size_t>(i)].phi.values;
  Eigen::VectorXd ustar = u0h.values + harmonic;

  RecoveryDiagnostics diag;
  diag.condition = ghat.condition();
  diag.rank = ghat.pinv().rank;
  diag.discarded = ghat.discarded();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double r = evals[static_cast<std::size_t>(i)].apply(ustar) - meas.values[static_cast<std::size_t>(i)];
    diag.residuals.push_back(r);
    diag.max_residual = std::max(diag.max_residual, std::abs(r));
  }
  diag.harmonic_residual = harmonic_defect(ctx, harmonic);
  if (diag.discarded > 0) {
    diag.warnings.push_back("rank deficiency: " + std::to_string(diag.discarded) + " of " + std::to_string(m) +
                            " singular values of the observation matrix fall below tau_rel * sigma_max and were "
                            "discarded");
  }

  return RecoveryResult{std::move(u0h),
                        std::move(pairs),
                        std::move(ghat),
                        std::move(omega_hat),
                        std::move(uhat),
                        CoeffVec{mesh, std::move(harmonic)},
                        CoeffVec{mesh, std::move(ustar)},
                        std::move(diag)};
}

RecoveryResult run_recovery(const MeshPtr& mesh, const FieldExpr& f, const MeasurementSet& meas,
                            const RecoveryOptions& opts) {
  const RieszContext ctx(mesh);
  return run_recovery(ctx, f, meas, opts);
}

NearOptimalityReport near_optimality_report(const RecoveryResult& result, const NearOptimalityInputs& in) {
  NearOptimalityReport rep;
  rep.m = static_cast<int>(result.ghat.m());
  rep.g_inv_norm = l1_opnorm(result.ghat.pinv().matrix);
  if (in.c_x) {
    rep.c_x = *in.c_x;
  } else {
    for (const auto& pair : result.pairs) rep.c_x = std::max(rep.c_x, pair.phi.values.lpNorm<Eigen::Infinity>());
  }
  rep.delta = delta_bound(rep.g_inv_norm, rep.m, in.eps2);
  if (!rep.delta) {
    rep.message = "eps2 exceeds the admissible bound: m * |G^-1| * eps2 >= 1";
    return rep;
  }
  const double m = rep.m;
  const double g = rep.g_inv_norm;
  rep.epsilon = in.eps1 + m * g * (2.0 * in.lambda0_f + in.lambda_sd_cb) * in.eps2 +
                (rep.c_x + in.eps2) * (m * g * in.eps1 + m * (in.lambda_sd_cb + in.lambda0_f + in.eps1) * *rep.delta);
  if (result.ghat.discarded() > 0) {
    rep.message = "observation matrix is rank deficient after thresholding; the bound assumes an invertible G";
  }
  return rep;
}

}  // namespace harmrec
