#pragma once

// Reference computations used by the tests. They deliberately avoid the
// library's own code paths.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "harmrec/mesh.hpp"

namespace oracle {

using harmrec::Point;

/// u(1/2, 1/2) for −Δu = c on the unit square with u = 0 on the boundary,
/// by the double sine series.
inline double square_poisson_center(double c, int terms = 4001) {
  const double pi = std::numbers::pi;
  double sum = 0.0;
  for (int m = 1; m <= terms; m += 2) {
    const double sm = (m % 4 == 1) ? 1.0 : -1.0;
    for (int n = 1; n <= terms; n += 2) {
      const double sn = (n % 4 == 1) ? 1.0 : -1.0;
      sum += sm * sn / (static_cast<double>(m) * n * (static_cast<double>(m) * m + static_cast<double>(n) * n));
    }
  }
  return 16.0 * c / std::pow(pi, 4) * sum;
}

/// Value at p of the P1 field with nodal values `v`, by a linear scan and
/// area ratios.
inline double interpolate(const harmrec::TriMesh& mesh, const Eigen::VectorXd& v, Point p) {
  auto area = [](Point a, Point b, Point c) { return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)); };
  const auto verts = mesh.vertices();
  for (const auto& t : mesh.triangles()) {
    const Point a = verts[t[0]], b = verts[t[1]], c = verts[t[2]];
    const double full = area(a, b, c);
    const double la = area(p, b, c) / full;
    const double lb = area(a, p, c) / full;
    const double lc = area(a, b, p) / full;
    if (la >= -1e-12 && lb >= -1e-12 && lc >= -1e-12) return la * v[t[0]] + lb * v[t[1]] + lc * v[t[2]];
  }
  return std::nan("");
}

/// Element stiffness and mass by explicit gradients and the three-point
/// edge-midpoint rule.
struct ElementMatrices {
  Eigen::Matrix3d stiffness;
  Eigen::Matrix3d mass;
};

inline ElementMatrices element_by_quadrature(Point a, Point b, Point c) {
  Eigen::Matrix3d coords;
  coords << 1, a.x, a.y, 1, b.x, b.y, 1, c.x, c.y;
  const Eigen::Matrix3d coef = coords.inverse();  // column i: N_i = c0 + c1 x + c2 y
  const double area = 0.5 * std::abs(coords.determinant());
  ElementMatrices out;
  const Eigen::Vector3d mids[3] = {{1, 0.5 * (a.x + b.x), 0.5 * (a.y + b.y)},
                                   {1, 0.5 * (b.x + c.x), 0.5 * (b.y + c.y)},
                                   {1, 0.5 * (c.x + a.x), 0.5 * (c.y + a.y)}};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double ks = 0.0, ms = 0.0;
      for (const auto& q : mids) {
        ks += coef(1, i) * coef(1, j) + coef(2, i) * coef(2, j);
        ms += q.dot(coef.col(i)) * q.dot(coef.col(j));
      }
      out.stiffness(i, j) = area * ks / 3.0;
      out.mass(i, j) = area * ms / 3.0;
    }
  }
  return out;
}

/// Global matrices assembled densely from element_by_quadrature.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> dense_stiffness_mass(const harmrec::TriMesh& mesh) {
  const auto n = static_cast<Eigen::Index>(mesh.num_vertices());
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n), m = Eigen::MatrixXd::Zero(n, n);
  const auto v = mesh.vertices();
  for (const auto& t : mesh.triangles()) {
    const auto e = element_by_quadrature(v[t[0]], v[t[1]], v[t[2]]);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        k(t[i], t[j]) += e.stiffness(i, j);
        m(t[i], t[j]) += e.mass(i, j);
      }
    }
  }
  return {k, m};
}

/// Copy of `mesh` with interior vertices displaced by up to `amount` times
/// the local spacing, keeping the connectivity.
inline harmrec::MeshPtr jitter(const harmrec::MeshPtr& mesh, double amount, unsigned seed) {
  std::vector<Point> verts(mesh->vertices().begin(), mesh->vertices().end());
  std::vector<bool> boundary(verts.size(), false);
  for (int b : mesh->boundary_loop()) boundary[b] = true;
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-amount, amount);
  const double h = mesh->mesh_size();
  for (std::size_t i = 0; i < verts.size(); ++i) {
    if (boundary[i]) continue;
    verts[i].x += u(rng) * h;
    verts[i].y += u(rng) * h;
  }
  return std::make_shared<const harmrec::TriMesh>(
      mesh->domain(), mesh->level(), std::move(verts),
      std::vector<harmrec::Triangle>(mesh->triangles().begin(), mesh->triangles().end()),
      std::vector<int>(mesh->boundary_loop().begin(), mesh->boundary_loop().end()), nullptr,
      std::vector<harmrec::VertexOrigin>(mesh->provenance().begin(), mesh->provenance().end()));
}

inline Eigen::VectorXd sample(const harmrec::TriMesh& mesh, double (*f)(Point)) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(mesh.num_vertices()));
  for (std::size_t i = 0; i < mesh.num_vertices(); ++i) v[static_cast<Eigen::Index>(i)] = f(mesh.vertices()[i]);
  return v;
}

}  // namespace oracle
