#pragma once

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <string>

#include "lanecarto/bev.hpp"
#include "lanecarto/geometry.hpp"
#include "lanecarto/lane.hpp"
#include "lanecarto/semantics.hpp"
#include "lanecarto/spline.hpp"

namespace lanecarto::test {

// Votes `cls` into every cell whose center lies in [x0,x1) x [y0,y1).
inline void paint_rect(BEVMap& bev, double x0, double x1, double y0, double y1,
                       SemanticClass cls) {
  const double cell = bev.cell_size();
  const CellIndex lo = bev.world_to_cell({x0, y0});
  const CellIndex hi = bev.world_to_cell({x1, y1});
  for (std::int32_t i = lo.i; i <= hi.i; ++i) {
    for (std::int32_t j = lo.j; j <= hi.j; ++j) {
      const Vec2 c = bev.cell_center({i, j});
      if (c.x >= x0 && c.x < x1 && c.y >= y0 && c.y < y1) {
        bev.add_vote({i, j}, cls);
      }
    }
  }
  (void)cell;
}

// Straight corridor along +x: a drivable band of the given width centered on
// y_center with one-cell solid markings hugging both sides.
inline BEVMap make_corridor(double x0, double x1, double y_center, double width,
                            double cell = 0.1) {
  BEVMap bev(cell);
  const double half = width / 2.0;
  paint_rect(bev, x0, x1, y_center - half, y_center + half, SemanticClass::DaCenter);
  paint_rect(bev, x0, x1, y_center + half, y_center + half + cell,
             SemanticClass::LmSolid);
  paint_rect(bev, x0, x1, y_center - half - cell, y_center - half,
             SemanticClass::LmSolid);
  return bev;
}

// Centerline of a straight lane along +x at the given lateral position.
inline CenterLine make_straight_centerline(double x0, double x1, double y,
                                           double spacing = 1.0) {
  CenterLine center;
  center.frame.origin = {x0, y};
  center.frame.bearing = 0.0;
  center.s_begin = 0.0;
  center.s_end = x1 - x0;
  center.waypoint_spacing = spacing;
  center.profile = NaturalSpline({center.s_begin, center.s_end}, {0.0, 0.0});
  for (double s : center.sample_abscissae(spacing)) {
    center.waypoints.push_back(center.map_point(s));
  }
  return center;
}

// Fresh scratch directory under the system temp root, wiped on construction
// and removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("lanecarto_test_" + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace lanecarto::test
