#include "harmrec/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace harmrec {

namespace {

// Replaces zero columns of u (flagged in `zero`) by unit vectors orthogonal
// to every other column.
void complete_basis(Eigen::MatrixXd& u, const std::vector<bool>& zero) {
  const Eigen::Index n = u.rows();
  Eigen::Index candidate = 0;
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    if (!zero[static_cast<std::size_t>(j)]) continue;
    for (; candidate < n; ++candidate) {
      Eigen::VectorXd w = Eigen::VectorXd::Unit(n, candidate);
      for (int pass = 0; pass < 2; ++pass) {
        for (Eigen::Index k = 0; k < u.cols(); ++k) {
          if (k == j || (zero[static_cast<std::size_t>(k)] && k > j)) continue;
          w -= u.col(k).dot(w) * u.col(k);
        }
      }
      const double norm = w.norm();
      if (norm > 0.5) {
        u.col(j) = w / norm;
        ++candidate;
        break;
      }
    }
  }
}

}  // namespace

Svd svd(const Eigen::MatrixXd& mat, const SvdOptions& opts) {
  if (mat.rows() != mat.cols()) throw std::invalid_argument("svd: square matrix expected");
  if (!mat.allFinite()) throw SolverError("svd: matrix has non-finite entries", 0.0);
  const Eigen::Index n = mat.cols();
  Eigen::MatrixXd w = mat;
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

  int sweep = 0;
  bool converged = n <= 1;
  while (!converged && sweep < opts.max_sweeps) {
    ++sweep;
    converged = true;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double alpha = w.col(p).squaredNorm();
        const double beta = w.col(q).squaredNorm();
        const double gamma = w.col(p).dot(w.col(q));
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= opts.rotation_tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (Eigen::Index i = 0; i < n; ++i) {
          const double wp = w(i, p);
          const double wq = w(i, q);
          w(i, p) = c * wp - s * wq;
          w(i, q) = s * wp + c * wq;
          const double vp = v(i, p);
          const double vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
  }
  if (!converged) {
    double worst = 0.0;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double denom = w.col(p).norm() * w.col(q).norm();
        if (denom > 0.0) worst = std::max(worst, std::abs(w.col(p).dot(w.col(q))) / denom);
      }
    }
    throw SolverError("svd: Jacobi iteration did not converge in " + std::to_string(opts.max_sweeps) + " sweeps",
                      worst);
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Eigen::VectorXd norms(n);
  for (Eigen::Index j = 0; j < n; ++j) norms[j] = w.col(j).norm();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return norms[a] > norms[b]; });

  Svd out;
  out.sweeps = sweep;
  out.sigma.resize(n);
  out.u.resize(n, n);
  out.v.resize(n, n);
  std::vector<bool> zero(static_cast<std::size_t>(n), false);
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.sigma[j] = norms[src];
    out.v.col(j) = v.col(src);
    if (norms[src] > 0.0) {
      out.u.col(j) = w.col(src) / norms[src];
    } else {
      out.u.col(j).setZero();
      zero[static_cast<std::size_t>(j)] = true;
    }
  }
  if (std::find(zero.begin(), zero.end(), true) != zero.end()) complete_basis(out.u, zero);
  return out;
}

PseudoInverse pinv_threshold(const Svd& d, double tau_rel) {
  if (!(tau_rel >= 0.0 && tau_rel < 1.0)) throw std::invalid_argument("pinv_threshold: tau_rel must lie in [0, 1)");
  const Eigen::Index n = d.sigma.size();
  PseudoInverse out;
  out.matrix = Eigen::MatrixXd::Zero(n, n);
  const double cutoff = n > 0 ? tau_rel * d.sigma[0] : 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (d.sigma[i] > cutoff) {
      out.matrix.noalias() += (d.v.col(i) / d.sigma[i]) * d.u.col(i).transpose();
      ++out.rank;
    }
  }
  out.discarded = static_cast<int>(n) - out.rank;
  return out;
}

PseudoInverse pinv_threshold(const Eigen::MatrixXd& mat, double tau_rel) { return pinv_threshold(svd(mat), tau_rel); }

double l1_opnorm(const Eigen::MatrixXd& mat) {
  if (mat.size() == 0) return 0.0;
  return mat.cwiseAbs().colwise().sum().maxCoeff();
}

std::optional<double> delta_bound(double g_inv_norm, int m, double eps2) {
  const double q = m * g_inv_norm * eps2;
  if (!(q < 1.0)) return std::nullopt;
  return m * g_inv_norm * g_inv_norm * eps2 / (1.0 - q);
}

double weighted_l2(std::span<const double> z) {
  if (z.empty()) throw std::invalid_argument("weighted_l2: empty vector");
  double sum = 0.0;
  for (double zi : z) sum += zi * zi;
  return std::sqrt(sum / static_cast<double>(z.size()));
}

double weighted_l2(const Eigen::VectorXd& z) {
  return weighted_l2(std::span<const double>(z.data(), static_cast<std::size_t>(z.size())));
}

ObservationMatrix::ObservationMatrix(Eigen::MatrixXd entries, double tau_rel)
    : entries_(std::move(entries)), tau_rel_(tau_rel), svd_(svd(entries_)), pinv_(pinv_threshold(svd_, tau_rel)) {}

double ObservationMatrix::condition() const {
  if (pinv_.rank == 0) return std::numeric_limits<double>::infinity();
  return svd_.sigma[0] / svd_.sigma[pinv_.rank - 1];
}

double ObservationMatrix::symmetry_defect() const {
  const double norm = entries_.cwiseAbs().rowwise().sum().maxCoeff();
  if (norm == 0.0) return 0.0;
  return (entries_ - entries_.transpose()).cwiseAbs().rowwise().sum().maxCoeff() / norm;
}

}  // namespace harmrec
