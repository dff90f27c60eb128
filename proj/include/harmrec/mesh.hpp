#pragma once

// Nested uniform triangulations and the geometric queries built on them.
//
// Level k+1 is obtained from level k by red refinement: every edge gets a
// midpoint vertex and every triangle splits into four. Vertex indices of
// level k are preserved at level k+1 (new midpoints are appended), and the
// children of parent triangle t are triangles 4t..4t+3.

#include <array>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "harmrec/common.hpp"

namespace harmrec {

enum class DomainKind { unit_square, l_shape, polygon_disc };

struct DomainSpec {
  DomainKind kind = DomainKind::unit_square;
  int n_sides = 6;  // polygon_disc: sides of the level-0 polygon

  static DomainSpec unit_square() { return {DomainKind::unit_square, 0}; }
  static DomainSpec l_shape() { return {DomainKind::l_shape, 0}; }
  static DomainSpec polygon_disc(int n_sides) { return {DomainKind::polygon_disc, n_sides}; }
};

const char* domain_name(DomainKind kind);

/// Provenance of a vertex relative to the parent level: either the parent
/// vertex `a` (b < 0) or the midpoint of the parent edge (a, b).
struct VertexOrigin {
  int a = -1;
  int b = -1;
  bool is_midpoint() const { return b >= 0; }
};

using Triangle = std::array<int, 3>;

class TriMesh;
using MeshPtr = std::shared_ptr<const TriMesh>;

class TriMesh {
 public:
  TriMesh(DomainSpec domain, int level, std::vector<Point> vertices, std::vector<Triangle> triangles,
          std::vector<int> boundary_loop, MeshPtr parent, std::vector<VertexOrigin> provenance);

  const DomainSpec& domain() const { return domain_; }
  int level() const { return level_; }
  std::span<const Point> vertices() const { return vertices_; }
  std::span<const Triangle> triangles() const { return triangles_; }
  std::span<const int> boundary_loop() const { return boundary_loop_; }
  std::span<const VertexOrigin> provenance() const { return provenance_; }
  const MeshPtr& parent() const { return parent_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }

  /// Signed area of triangle t (positive for counter-clockwise ordering).
  double signed_area(std::size_t t) const;

  /// Longest edge length of the level-0 mesh of this hierarchy.
  double coarse_mesh_size() const { return coarse_h_; }

  /// Mesh size 2^-level times the level-0 mesh size.
  double mesh_size() const;

 private:
  DomainSpec domain_;
  int level_;
  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<int> boundary_loop_;
  MeshPtr parent_;
  std::vector<VertexOrigin> provenance_;
  double coarse_h_ = 0.0;
};

/// Level-k mesh of the hierarchy ending at `fine` (k <= fine->level()).
/// Throws GeometryError when k is out of range.
MeshPtr hierarchy_level(const MeshPtr& fine, int k);

struct MeshOptions {
  int max_level = 10;
};

/// Level-k mesh of `spec`, keeping the whole hierarchy down to level 0.
/// Throws GeometryError if k < 0 or k exceeds `opts.max_level`.
MeshPtr generate(const DomainSpec& spec, int k, const MeshOptions& opts = {});

struct Location {
  int triangle = -1;
  std::array<double, 3> bary{};
};

/// Barycentric coordinates of p in triangle t.
std::array<double, 3> barycentric(const TriMesh& mesh, std::size_t t, Point p);

/// Lowest-index triangle whose barycentric coordinates for p are all
/// >= -1e-12. Throws GeometryError (with the distance to the nearest
/// triangle) if p lies outside the triangulated domain.
Location locate(const TriMesh& mesh, Point p);

/// Exact Euclidean distance from p to the boundary polygon.
double dist_to_boundary(const TriMesh& mesh, Point p);

double point_segment_distance(Point p, Point a, Point b);

/// Finite element coefficient vector over the vertices of one mesh level.
struct CoeffVec {
  MeshPtr mesh;
  Eigen::VectorXd values;
};

/// Nodal interpolant of `coarse` on `target`, a finer level of the same
/// hierarchy. Throws GeometryError on hierarchy mismatch.
CoeffVec prolong(const CoeffVec& coarse, const MeshPtr& target);

/// Plain-text dump: "nv nt nb", vertex lines, triangle lines, boundary loop.
void write_mesh(std::ostream& os, const TriMesh& mesh);

}  // namespace harmrec
