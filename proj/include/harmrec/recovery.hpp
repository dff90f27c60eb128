#pragma once

// Recovery of u = u₀ + u_H from point values: u₀ is the homogeneous
// Dirichlet solution for the source f, and u_H is approximated by the
// minimal-norm harmonic interpolant Σ Û_i φ_i with Û = Ĝ⁺ (ω − u₀(x_i)).

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "harmrec/expr.hpp"
#include "harmrec/linalg.hpp"
#include "harmrec/mesh.hpp"
#include "harmrec/riesz.hpp"

namespace harmrec {

enum class Provenance { synthetic, external };

struct MeasurementSet {
  std::vector<Point> points;
  std::vector<double> values;
  Provenance provenance = Provenance::external;
  std::string field;   // source expression when synthetic
  double noise = 0.0;  // amplitude of the additive uniform noise

  std::size_t size() const { return points.size(); }

  /// Throws GeometryError if counts differ or two points are closer than
  /// 1e-10.
  void validate() const;
};

/// Ring of m points at distance 0.1 from the unit square boundary:
/// (0.9, t), (0.1, t), (t, 0.1), (t, 0.9) with t = (i+1)/17, i < m/4.
/// Throws std::invalid_argument unless m is a positive multiple of 4 with
/// m/4 <= 16.
std::vector<Point> box_formation(int m);

/// Uniform n×n lattice ((i+1)/(n+1), (j+1)/(n+1)) for m = n².
std::vector<Point> grid_formation(int m);

/// ω_i = field(x_i), evaluated analytically, plus uniform noise in
/// [−noise, noise] drawn from a generator seeded with `seed`.
MeasurementSet synthesize_measurements(const FieldExpr& field, std::span<const Point> points, double noise = 0.0,
                                       std::uint64_t seed = 0);

struct RecoveryOptions {
  double tau_rel = kDefaultThreshold;
  int threads = 1;
};

struct RecoveryDiagnostics {
  double condition = 0.0;
  int rank = 0;
  int discarded = 0;
  std::vector<double> residuals;  // λ_i(u*) − ω_i
  double max_residual = 0.0;
  double harmonic_residual = 0.0;  // relative interior residual of u*_H
  std::vector<std::string> warnings;
};

struct RecoveryResult {
  CoeffVec u0h;
  std::vector<RieszPair> pairs;
  ObservationMatrix ghat;
  Eigen::VectorXd omega_hat;  // ω − û₀(x_i)
  Eigen::VectorXd uhat;
  CoeffVec harmonic;  // û*_H
  CoeffVec ustar;     // û₀ + û*_H
  RecoveryDiagnostics diagnostics;
};

RecoveryResult run_recovery(const RieszContext& ctx, const FieldExpr& f, const MeasurementSet& meas,
                            const RecoveryOptions& opts = {});
RecoveryResult run_recovery(const MeshPtr& mesh, const FieldExpr& f, const MeasurementSet& meas,
                            const RecoveryOptions& opts = {});

/// Stand-ins for the analytic constants of the near-optimality bound; none
/// of them can be computed from a single run.
struct NearOptimalityInputs {
  double eps1 = 0.0;
  double eps2 = 0.0;
  double lambda0_f = 0.0;     // Λ₀‖f‖
  double lambda_sd_cb = 0.0;  // Λ_{s,d} C_B
  std::optional<double> c_x;  // max_j |φ_j|_X; defaults to max_j ‖φ̂_j‖_∞
};

struct NearOptimalityReport {
  int m = 0;
  double g_inv_norm = 0.0;  // ‖Ĝ⁻¹‖_{ℓ¹→ℓ¹} of the thresholded pseudo-inverse
  double c_x = 0.0;
  std::optional<double> delta;
  std::optional<double> epsilon;  // empty when ε₂ exceeds ε̄₂
  std::string message;
};

/// Diagnostic evaluation of
///   ε₁ + m‖G⁻¹‖(2Λ₀‖f‖ + Λ_{s,d}C_B)ε₂
///      + (C_X + ε₂)(m‖G⁻¹‖ε₁ + m(Λ_{s,d}C_B + Λ₀‖f‖ + ε₁)δ).
NearOptimalityReport near_optimality_report(const RecoveryResult& result, const NearOptimalityInputs& in);

}  // namespace harmrec
