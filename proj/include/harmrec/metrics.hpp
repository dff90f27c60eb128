#pragma once

// Error norms between finite element fields of one hierarchy and the
// overrefinement studies built on them.

#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "harmrec/expr.hpp"
#include "harmrec/fem.hpp"
#include "harmrec/mesh.hpp"
#include "harmrec/recovery.hpp"

namespace harmrec {

/// Norms of differences of P1 fields, evaluated on one fine mesh. The max
/// norms sample the fine vertices and triangle centroids. Immutable after
/// construction.
class ErrorNorms {
 public:
  explicit ErrorNorms(MeshPtr fine);

  const MeshPtr& mesh() const { return fine_; }

  /// √(eᵀ(A+M)e) with e = prolong(a) − prolong(b).
  double h1(const CoeffVec& a, const CoeffVec& b) const;
  double linf(const CoeffVec& a, const CoeffVec& b) const;
  /// Max over sample points with dist_to_boundary >= d (all points when
  /// d <= 0). Throws GeometryError if no sample point qualifies.
  double linf_d(const CoeffVec& a, const CoeffVec& b, double d) const;

 private:
  Eigen::VectorXd difference(const CoeffVec& a, const CoeffVec& b) const;
  double max_abs(const Eigen::VectorXd& e, double d) const;

  MeshPtr fine_;
  SparseMatrix h1_gram_;
  std::vector<double> sample_dist_;  // vertices first, then centroids
};

double h1_error(const MeshPtr& fine, const CoeffVec& a, const CoeffVec& b);
double linf_error(const MeshPtr& fine, const CoeffVec& a, const CoeffVec& b);
double linf_d_error(const MeshPtr& fine, const CoeffVec& a, const CoeffVec& b, double d);

/// max |u − exact| over the vertices and centroids of u's own mesh,
/// restricted to dist_to_boundary >= d when d > 0.
double linf_error_to_field(const CoeffVec& u, const FieldExpr& exact, double d = 0.0);

struct ErrorRow {
  int level = 0;
  double h = 0.0;
  double err_h1 = 0.0;
  double err_linf = 0.0;
  double err_linf_d = 0.0;
  std::optional<double> rate_h1;
  std::optional<double> rate_linf;
  std::optional<double> rate_linf_d;
};

struct ErrorReport {
  std::vector<ErrorRow> rows;
  int surrogate_level = 0;
  double d = 0.0;
};

/// log₂(err_{k−1} / err_k) for consecutive rows; the first row has none.
void fill_rates(ErrorReport& report);

/// Least-squares slope of −log₂(err) against level.
double fit_rate(std::span<const int> levels, std::span<const double> errors);

struct RepresenterTarget {
  Point point;
};

struct RecoveryTarget {
  FieldExpr f;
  MeasurementSet measurements;
  double tau_rel = kDefaultThreshold;
};

using StudyTarget = std::variant<RepresenterTarget, RecoveryTarget>;

struct StudyOptions {
  int k_min = 2;
  int k_max = 5;
  int surrogate_level = 7;
  int min_gap = 2;
  double d = 0.0;
  int threads = 1;
  MeshOptions mesh;
  SpdSolver::Options solver;
};

/// ‖u_K − u_k‖ for k = k_min..k_max against the level-K surrogate, where u
/// is either one representer or a full recovery. Throws
/// std::invalid_argument on inconsistent levels.
ErrorReport convergence_study(const DomainSpec& spec, const StudyTarget& target, const StudyOptions& opts);

struct ProximityRow {
  Point point;
  double d = 0.0;
  double err_h1 = 0.0;
  double err_linf = 0.0;
};

/// ‖φ_K − φ_k‖ in H¹ and L∞ for each point at fixed levels k < K.
std::vector<ProximityRow> boundary_proximity_study(const DomainSpec& spec, std::span<const Point> points, int k,
                                                   int surrogate_level, const StudyOptions& opts = {});

struct RecoveryRow {
  int level = 0;
  double h = 0.0;
  std::optional<double> err_linf;    // against the exact field, when known
  std::optional<double> err_linf_d;
  double max_residual = 0.0;
  int discarded = 0;
  double condition = 0.0;
  std::vector<std::string> warnings;
};

/// Runs the recovery at every level k_min..k_max of one hierarchy.
std::vector<RecoveryRow> recovery_study(const DomainSpec& spec, const FieldExpr& f, const MeasurementSet& meas,
                                        const FieldExpr* exact, double tau_rel, const StudyOptions& opts);

}  // namespace harmrec
