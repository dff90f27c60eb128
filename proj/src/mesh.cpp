#include "harmrec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

namespace harmrec {

namespace {

constexpr double kBaryTol = 1e-12;

double cross(Point o, Point a, Point b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

TriMesh make_coarse(const DomainSpec& spec) {
  std::vector<Point> v;
  std::vector<Triangle> t;
  std::vector<int> loop;
  switch (spec.kind) {
    case DomainKind::unit_square:
      v = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
      t = {{0, 1, 2}, {0, 2, 3}};
      loop = {0, 1, 2, 3};
      break;
    case DomainKind::l_shape:
      // (-1,1)^2 minus the quadrant [0,1]x[-1,0]; reentrant corner at the origin.
      v = {{-1, -1}, {0, -1}, {-1, 0}, {0, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1}};
      t = {{0, 1, 3}, {0, 3, 2}, {2, 3, 6}, {2, 6, 5}, {3, 4, 7}, {3, 7, 6}};
      loop = {0, 1, 3, 4, 7, 6, 5, 2};
      break;
    case DomainKind::polygon_disc: {
      if (spec.n_sides < 3) throw GeometryError("polygon_disc needs at least 3 sides");
      v.push_back({0, 0});
      for (int j = 0; j < spec.n_sides; ++j) {
        const double a = 2.0 * std::numbers::pi * j / spec.n_sides;
        v.push_back({std::cos(a), std::sin(a)});
        loop.push_back(j + 1);
      }
      for (int j = 0; j < spec.n_sides; ++j) t.push_back({0, j + 1, (j + 1) % spec.n_sides + 1});
      break;
    }
  }
  std::vector<VertexOrigin> origin(v.size());
  return TriMesh(spec, 0, std::move(v), std::move(t), std::move(loop), nullptr, std::move(origin));
}

MeshPtr refine(const MeshPtr& coarse) {
  const TriMesh& m = *coarse;
  const bool project_boundary = m.domain().kind == DomainKind::polygon_disc;

  std::vector<Point> v(m.vertices().begin(), m.vertices().end());
  std::vector<VertexOrigin> origin(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) origin[i] = {static_cast<int>(i), -1};

  std::unordered_set<std::uint64_t> boundary_edges;
  const auto loop = m.boundary_loop();
  for (std::size_t i = 0; i < loop.size(); ++i) {
    boundary_edges.insert(edge_key(loop[i], loop[(i + 1) % loop.size()]));
  }

  std::unordered_map<std::uint64_t, int> midpoint;
  midpoint.reserve(m.num_triangles() * 2);
  auto mid = [&](int a, int b) {
    const auto key = edge_key(a, b);
    if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
    Point p{0.5 * (v[a].x + v[b].x), 0.5 * (v[a].y + v[b].y)};
    if (project_boundary && boundary_edges.contains(key)) {
      const double r = std::hypot(p.x, p.y);
      p = {p.x / r, p.y / r};
    }
    const int id = static_cast<int>(v.size());
    v.push_back(p);
    origin.push_back({std::min(a, b), std::max(a, b)});
    midpoint.emplace(key, id);
    return id;
  };

  std::vector<Triangle> t;
  t.reserve(4 * m.num_triangles());
  for (const auto& [a, b, c] : m.triangles()) {
    const int ab = mid(a, b);
    const int bc = mid(b, c);
    const int ca = mid(c, a);
    t.push_back({a, ab, ca});
    t.push_back({ab, b, bc});
    t.push_back({ca, bc, c});
    t.push_back({ab, bc, ca});
  }

  std::vector<int> new_loop;
  new_loop.reserve(2 * loop.size());
  for (std::size_t i = 0; i < loop.size(); ++i) {
    new_loop.push_back(loop[i]);
    new_loop.push_back(midpoint.at(edge_key(loop[i], loop[(i + 1) % loop.size()])));
  }

  return std::make_shared<const TriMesh>(m.domain(), m.level() + 1, std::move(v), std::move(t),
                                         std::move(new_loop), coarse, std::move(origin));
}

}  // namespace

const char* domain_name(DomainKind kind) {
  switch (kind) {
    case DomainKind::unit_square:
      return "unit_square";
    case DomainKind::l_shape:
      return "l_shape";
    case DomainKind::polygon_disc:
      return "polygon_disc";
  }
  return "unknown";
}

TriMesh::TriMesh(DomainSpec domain, int level, std::vector<Point> vertices, std::vector<Triangle> triangles,
                 std::vector<int> boundary_loop, MeshPtr parent, std::vector<VertexOrigin> provenance)
    : domain_(domain),
      level_(level),
      vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_loop_(std::move(boundary_loop)),
      parent_(std::move(parent)),
      provenance_(std::move(provenance)) {
  if (parent_) {
    coarse_h_ = parent_->coarse_h_;
    return;
  }
  for (const auto& tri : triangles_) {
    for (int e = 0; e < 3; ++e) {
      coarse_h_ = std::max(coarse_h_, distance(vertices_[tri[e]], vertices_[tri[(e + 1) % 3]]));
    }
  }
}

double TriMesh::signed_area(std::size_t t) const {
  const auto& [a, b, c] = triangles_[t];
  return 0.5 * cross(vertices_[a], vertices_[b], vertices_[c]);
}

double TriMesh::mesh_size() const { return std::ldexp(coarse_h_, -level_); }

MeshPtr hierarchy_level(const MeshPtr& fine, int k) {
  if (!fine || k < 0 || k > fine->level()) {
    throw GeometryError("hierarchy level " + std::to_string(k) + " is not available");
  }
  MeshPtr m = fine;
  while (m->level() > k) m = m->parent();
  return m;
}

MeshPtr generate(const DomainSpec& spec, int k, const MeshOptions& opts) {
  if (k < 0) throw GeometryError("refinement level must be non-negative");
  if (k > opts.max_level) {
    throw GeometryError("refinement level " + std::to_string(k) + " exceeds the configured maximum " +
                        std::to_string(opts.max_level));
  }
  MeshPtr mesh = std::make_shared<const TriMesh>(make_coarse(spec));
  for (int level = 0; level < k; ++level) mesh = refine(mesh);
  return mesh;
}

std::array<double, 3> barycentric(const TriMesh& mesh, std::size_t t, Point p) {
  const auto& [ia, ib, ic] = mesh.triangles()[t];
  const Point a = mesh.vertices()[ia];
  const Point b = mesh.vertices()[ib];
  const Point c = mesh.vertices()[ic];
  const double det = cross(a, b, c);
  const double lb = cross(a, p, c) / det;
  const double lc = cross(a, b, p) / det;
  return {1.0 - lb - lc, lb, lc};
}

double point_segment_distance(Point p, Point a, Point b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double s = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return distance(p, {a.x + s * dx, a.y + s * dy});
}

Location locate(const TriMesh& mesh, Point p) {
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto bary = barycentric(mesh, t, p);
    if (bary[0] >= -kBaryTol && bary[1] >= -kBaryTol && bary[2] >= -kBaryTol) {
      return {static_cast<int>(t), bary};
    }
  }
  double nearest = std::numeric_limits<double>::infinity();
  const auto v = mesh.vertices();
  for (const auto& [a, b, c] : mesh.triangles()) {
    nearest = std::min({nearest, point_segment_distance(p, v[a], v[b]), point_segment_distance(p, v[b], v[c]),
                        point_segment_distance(p, v[c], v[a])});
  }
  throw GeometryError("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                      ") lies outside the domain; distance to nearest triangle " + std::to_string(nearest));
}

double dist_to_boundary(const TriMesh& mesh, Point p) {
  const auto loop = mesh.boundary_loop();
  const auto v = mesh.vertices();
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < loop.size(); ++i) {
    best = std::min(best, point_segment_distance(p, v[loop[i]], v[loop[(i + 1) % loop.size()]]));
  }
  return best;
}

CoeffVec prolong(const CoeffVec& coarse, const MeshPtr& target) {
  if (!coarse.mesh || !target) throw GeometryError("prolong: missing mesh");
  if (static_cast<std::size_t>(coarse.values.size()) != coarse.mesh->num_vertices()) {
    throw GeometryError("prolong: coefficient vector does not match its mesh");
  }
  std::vector<const TriMesh*> chain;
  for (const TriMesh* m = target.get(); m != nullptr; m = m->parent().get()) {
    if (m == coarse.mesh.get()) break;
    chain.push_back(m);
    if (m->level() <= coarse.mesh->level()) {
      throw GeometryError("prolong: target is not a refinement of the source mesh");
    }
  }
  if (chain.empty() ? target.get() != coarse.mesh.get() : chain.back()->parent() != coarse.mesh) {
    throw GeometryError("prolong: meshes belong to different hierarchies");
  }

  Eigen::VectorXd values = coarse.values;
  for (auto it = chain.rbegin(); it != chain.rend(); ++it) {
    const auto origin = (*it)->provenance();
    Eigen::VectorXd next(static_cast<Eigen::Index>(origin.size()));
    for (std::size_t i = 0; i < origin.size(); ++i) {
      const auto& o = origin[i];
      next[static_cast<Eigen::Index>(i)] = o.is_midpoint() ? 0.5 * (values[o.a] + values[o.b]) : values[o.a];
    }
    values = std::move(next);
  }
  return {target, std::move(values)};
}

void write_mesh(std::ostream& os, const TriMesh& mesh) {
  const auto old_precision = os.precision(17);
  os << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << mesh.boundary_loop().size() << '\n';
  for (const auto& p : mesh.vertices()) os << p.x << ' ' << p.y << '\n';
  for (const auto& [a, b, c] : mesh.triangles()) os << a << ' ' << b << ' ' << c << '\n';
  for (int i : mesh.boundary_loop()) os << i << '\n';
  os.precision(old_precision);
}

}  // namespace harmrec
