#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

#include "lanecarto/geometry.hpp"

namespace lanecarto {

// Ground topography mesh in the vehicle frame: a 2D Delaunay triangulation of
// point x-y locations with z lifted onto the vertices.
struct GroundMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;

  // z at (x, y) via barycentric interpolation; empty outside the hull.
  std::optional<double> height_at(const Vec2& p) const;

  // Builds the triangle spatial index used by height_at; called by
  // build_ground_mesh, call again after manual edits.
  void build_index(double cell = 2.0);

 private:
  double index_cell_ = 2.0;
  Vec2 index_origin_;
  int index_w_ = 0, index_h_ = 0;
  std::vector<std::vector<std::uint32_t>> index_bins_;
};

struct GroundFilter {
  // Keep points with z in [camera_height - 3, camera_height - 0.5] (vehicle
  // frame), i.e. near the road surface and below mounted sensors.
  double camera_height = 1.5;
  double band_below = 3.0;
  double band_above = 0.5;
  // x-y crop, percentile of the projection region
  double x_min = -5.0, x_max = 45.0;
  double y_min = -20.0, y_max = 20.0;

  bool keep(const Vec3& p) const {
    return p.z >= camera_height - band_below && p.z <= camera_height - band_above &&
           p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
};

// Incremental Bowyer-Watson triangulation of the filtered cloud. Points
// closer than 1e-6 m are deduplicated. Throws DegenerateInputError when
// fewer than 3 usable points remain or all are collinear.
GroundMesh build_ground_mesh(const std::vector<Vec3>& points,
                             const GroundFilter& filter = {});

// Triangulation of pre-filtered 2D sites (z = 0); the core of
// build_ground_mesh, exposed for geometry tests.
GroundMesh delaunay_triangulate(const std::vector<Vec3>& points);

}  // namespace lanecarto
