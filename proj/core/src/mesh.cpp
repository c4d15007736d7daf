#include "lanecarto/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <utility>

#include "lanecarto/errors.hpp"

namespace lanecarto {
namespace {

constexpr double kDedupEps = 1e-6;

// > 0 when p lies strictly inside the circumcircle of CCW triangle (a, b, c).
double in_circumcircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
  const double ax = a.x - p.x, ay = a.y - p.y;
  const double bx = b.x - p.x, by = b.y - p.y;
  const double cx = c.x - p.x, cy = c.y - p.y;
  const double a2 = ax * ax + ay * ay;
  const double b2 = bx * bx + by * by;
  const double c2 = cx * cx + cy * cy;
  return ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
}

double orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

struct Tri {
  std::uint32_t v[3];
  bool dead = false;
};

}  // namespace

GroundMesh delaunay_triangulate(const std::vector<Vec3>& points) {
  // Deduplicate x-y sites, keeping the first z seen for each location.
  std::vector<Vec3> sites;
  sites.reserve(points.size());
  for (const Vec3& p : points) {
    bool dup = false;
    for (const Vec3& q : sites) {
      if (std::abs(p.x - q.x) < kDedupEps && std::abs(p.y - q.y) < kDedupEps) {
        dup = true;
        break;
      }
    }
    if (!dup) sites.push_back(p);
  }
  if (sites.size() < 3) {
    throw DegenerateInputError("ground mesh needs at least 3 distinct points, got " +
                               std::to_string(sites.size()));
  }
  bool collinear = true;
  for (std::size_t i = 2; i < sites.size() && collinear; ++i) {
    if (std::abs(orient2d(sites[0].xy(), sites[1].xy(), sites[i].xy())) > 1e-9) {
      collinear = false;
    }
  }
  if (collinear) throw DegenerateInputError("ground mesh points are collinear");

  // Super-triangle comfortably containing the bounding box.
  Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Vec2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (const Vec3& p : sites) {
    lo.x = std::min(lo.x, p.x);
    lo.y = std::min(lo.y, p.y);
    hi.x = std::max(hi.x, p.x);
    hi.y = std::max(hi.y, p.y);
  }
  const Vec2 mid{(lo.x + hi.x) * 0.5, (lo.y + hi.y) * 0.5};
  const double span = std::max({hi.x - lo.x, hi.y - lo.y, 1.0}) * 20.0;

  std::vector<Vec2> verts;
  verts.reserve(sites.size() + 3);
  for (const Vec3& p : sites) verts.push_back(p.xy());
  const std::uint32_t s0 = static_cast<std::uint32_t>(verts.size());
  verts.push_back({mid.x - span, mid.y - span});
  verts.push_back({mid.x + span, mid.y - span});
  verts.push_back({mid.x, mid.y + span});

  std::vector<Tri> tris;
  tris.push_back({{s0, s0 + 1, s0 + 2}, false});

  std::vector<std::size_t> bad;
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> edge_count;
  std::vector<std::array<std::uint32_t, 2>> cavity;
  for (std::uint32_t pi = 0; pi < s0; ++pi) {
    const Vec2& p = verts[pi];
    bad.clear();
    for (std::size_t t = 0; t < tris.size(); ++t) {
      if (tris[t].dead) continue;
      const Vec2 &a = verts[tris[t].v[0]], &b = verts[tris[t].v[1]], &c = verts[tris[t].v[2]];
      if (in_circumcircle(a, b, c, p) > 0.0) bad.push_back(t);
    }
    // Cavity boundary = edges referenced by exactly one bad triangle.
    edge_count.clear();
    for (std::size_t t : bad) {
      for (int e = 0; e < 3; ++e) {
        std::uint32_t u = tris[t].v[e], w = tris[t].v[(e + 1) % 3];
        edge_count[{std::min(u, w), std::max(u, w)}]++;
      }
    }
    cavity.clear();
    for (std::size_t t : bad) {
      for (int e = 0; e < 3; ++e) {
        std::uint32_t u = tris[t].v[e], w = tris[t].v[(e + 1) % 3];
        if (edge_count[{std::min(u, w), std::max(u, w)}] == 1) cavity.push_back({u, w});
      }
      tris[t].dead = true;
    }
    for (const auto& edge : cavity) {
      Tri nt{{edge[0], edge[1], pi}, false};
      // Keep CCW orientation so the incircle predicate's sign stays meaningful.
      if (orient2d(verts[nt.v[0]], verts[nt.v[1]], verts[nt.v[2]]) < 0.0) {
        std::swap(nt.v[1], nt.v[2]);
      }
      tris.push_back(nt);
    }
  }

  GroundMesh mesh;
  mesh.vertices = std::move(sites);
  for (const Tri& t : tris) {
    if (t.dead) continue;
    if (t.v[0] >= s0 || t.v[1] >= s0 || t.v[2] >= s0) continue;  // touches super-triangle
    mesh.triangles.push_back({t.v[0], t.v[1], t.v[2]});
  }
  mesh.build_index();
  return mesh;
}

GroundMesh build_ground_mesh(const std::vector<Vec3>& points, const GroundFilter& filter) {
  std::vector<Vec3> kept;
  kept.reserve(points.size());
  for (const Vec3& p : points) {
    if (filter.keep(p)) kept.push_back(p);
  }
  return delaunay_triangulate(kept);
}

void GroundMesh::build_index(double cell) {
  index_cell_ = cell;
  index_bins_.clear();
  index_w_ = index_h_ = 0;
  if (triangles.empty()) return;

  Vec2 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Vec2 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
  for (const Vec3& v : vertices) {
    lo.x = std::min(lo.x, v.x);
    lo.y = std::min(lo.y, v.y);
    hi.x = std::max(hi.x, v.x);
    hi.y = std::max(hi.y, v.y);
  }
  index_origin_ = lo;
  index_w_ = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x) / cell)));
  index_h_ = std::max(1, static_cast<int>(std::ceil((hi.y - lo.y) / cell)));
  index_bins_.assign(static_cast<std::size_t>(index_w_) * index_h_, {});

  for (std::uint32_t t = 0; t < triangles.size(); ++t) {
    const auto& tri = triangles[t];
    double tx0 = vertices[tri[0]].x, tx1 = tx0, ty0 = vertices[tri[0]].y, ty1 = ty0;
    for (int k = 1; k < 3; ++k) {
      tx0 = std::min(tx0, vertices[tri[k]].x);
      tx1 = std::max(tx1, vertices[tri[k]].x);
      ty0 = std::min(ty0, vertices[tri[k]].y);
      ty1 = std::max(ty1, vertices[tri[k]].y);
    }
    int cx0 = std::clamp(static_cast<int>((tx0 - lo.x) / cell), 0, index_w_ - 1);
    int cx1 = std::clamp(static_cast<int>((tx1 - lo.x) / cell), 0, index_w_ - 1);
    int cy0 = std::clamp(static_cast<int>((ty0 - lo.y) / cell), 0, index_h_ - 1);
    int cy1 = std::clamp(static_cast<int>((ty1 - lo.y) / cell), 0, index_h_ - 1);
    for (int cy = cy0; cy <= cy1; ++cy) {
      for (int cx = cx0; cx <= cx1; ++cx) {
        index_bins_[static_cast<std::size_t>(cy) * index_w_ + cx].push_back(t);
      }
    }
  }
}

std::optional<double> GroundMesh::height_at(const Vec2& p) const {
  if (triangles.empty()) return std::nullopt;

  auto try_triangle = [&](std::uint32_t t) -> std::optional<double> {
    const auto& tri = triangles[t];
    const Vec2 a = vertices[tri[0]].xy(), b = vertices[tri[1]].xy(), c = vertices[tri[2]].xy();
    const double det = orient2d(a, b, c);
    if (std::abs(det) < 1e-12) return std::nullopt;
    const double l0 = orient2d(b, c, p) / det;
    const double l1 = orient2d(c, a, p) / det;
    const double l2 = 1.0 - l0 - l1;
    if (l0 < -1e-9 || l1 < -1e-9 || l2 < -1e-9) return std::nullopt;
    return l0 * vertices[tri[0]].z + l1 * vertices[tri[1]].z + l2 * vertices[tri[2]].z;
  };

  if (!index_bins_.empty()) {
    int cx = static_cast<int>((p.x - index_origin_.x) / index_cell_);
    int cy = static_cast<int>((p.y - index_origin_.y) / index_cell_);
    if (cx < 0 || cy < 0 || cx >= index_w_ || cy >= index_h_) return std::nullopt;
    for (std::uint32_t t : index_bins_[static_cast<std::size_t>(cy) * index_w_ + cx]) {
      if (auto z = try_triangle(t)) return z;
    }
    return std::nullopt;
  }
  for (std::uint32_t t = 0; t < triangles.size(); ++t) {
    if (auto z = try_triangle(t)) return z;
  }
  return std::nullopt;
}

}  // namespace lanecarto
