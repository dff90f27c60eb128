#pragma once

// Small dense linear algebra for the m×m observation matrix.

#include <optional>
#include <span>

#include <Eigen/Core>

#include "harmrec/common.hpp"

namespace harmrec {

/// mat = U · diag(sigma) · Vᵀ with sigma sorted descending.
struct Svd {
  Eigen::MatrixXd u;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd v;
  int sweeps = 0;
};

struct SvdOptions {
  int max_sweeps = 30;
  double rotation_tol = 1e-15;
};

/// One-sided (Hestenes) Jacobi SVD of a square matrix. Throws SolverError if
/// the off-diagonal measure does not drop below the tolerance within the
/// sweep limit, or if the input has non-finite entries.
Svd svd(const Eigen::MatrixXd& mat, const SvdOptions& opts = {});

struct PseudoInverse {
  Eigen::MatrixXd matrix;
  int rank = 0;
  int discarded = 0;
};

/// Moore-Penrose inverse keeping only singular values σ_i > tau_rel·σ_1.
PseudoInverse pinv_threshold(const Svd& decomposition, double tau_rel);
PseudoInverse pinv_threshold(const Eigen::MatrixXd& mat, double tau_rel);

/// ℓ¹ → ℓ¹ operator norm (maximum absolute column sum).
double l1_opnorm(const Eigen::MatrixXd& mat);

/// δ = m‖G⁻¹‖²ε₂ / (1 − m‖G⁻¹‖ε₂), or nullopt when m‖G⁻¹‖ε₂ ≥ 1 and the
/// Neumann-series bound no longer applies.
std::optional<double> delta_bound(double g_inv_norm, int m, double eps2);

/// (m⁻¹ Σ z_i²)^{1/2}. Throws std::invalid_argument on an empty vector.
double weighted_l2(std::span<const double> z);
double weighted_l2(const Eigen::VectorXd& z);

inline constexpr double kDefaultThreshold = 1e-14;

/// Dense observation matrix Ĝ together with its SVD and the thresholded
/// pseudo-inverse used to solve for the recovery coefficients.
class ObservationMatrix {
 public:
  explicit ObservationMatrix(Eigen::MatrixXd entries, double tau_rel = kDefaultThreshold);

  Eigen::Index m() const { return entries_.rows(); }
  const Eigen::MatrixXd& entries() const { return entries_; }
  const Svd& decomposition() const { return svd_; }
  const PseudoInverse& pinv() const { return pinv_; }
  double tau_rel() const { return tau_rel_; }

  /// σ_1 / σ_rank (infinite if everything was discarded).
  double condition() const;
  int discarded() const { return pinv_.discarded; }

  /// ‖Ĝ − Ĝᵀ‖_∞ / ‖Ĝ‖_∞.
  double symmetry_defect() const;

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return pinv_.matrix * rhs; }

 private:
  Eigen::MatrixXd entries_;
  double tau_rel_;
  Svd svd_;
  PseudoInverse pinv_;
};

}  // namespace harmrec
