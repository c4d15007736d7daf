#include "lanecarto/projection.hpp"

#include <algorithm>
#include <cmath>

#include "lanecarto/errors.hpp"

namespace lanecarto {
namespace {

BEVPatch project_impl(const SemanticFrame& frame, const Pose& pose,
                      const CameraModel& camera, const GroundMesh* mesh,
                      const ProjectionConfig& cfg) {
  if (std::abs(frame.timestamp - pose.timestamp) > cfg.sync_tolerance) {
    throw SyncError("frame at t=" + std::to_string(frame.timestamp) +
                    " and pose at t=" + std::to_string(pose.timestamp) +
                    " exceed sync tolerance of " + std::to_string(cfg.sync_tolerance) +
                    " s");
  }

  const PlanarPose planar = pose.planar();
  const double cy = std::cos(planar.yaw), sy = std::sin(planar.yaw);
  auto to_map = [&](const Vec2& v) -> Vec2 {
    return {planar.position.x + cy * v.x - sy * v.y,
            planar.position.y + sy * v.x + cy * v.y};
  };
  auto to_vehicle = [&](const Vec2& m) -> Vec2 {
    const Vec2 d = m - planar.position;
    return {cy * d.x + sy * d.y, -sy * d.x + cy * d.y};
  };

  // Map-frame AABB of the forward region decides the patch extent.
  const Vec2 corners[4] = {to_map({cfg.forward_min, -cfg.lateral_half}),
                           to_map({cfg.forward_min, cfg.lateral_half}),
                           to_map({cfg.forward_max, -cfg.lateral_half}),
                           to_map({cfg.forward_max, cfg.lateral_half})};
  Vec2 lo = corners[0], hi = corners[0];
  for (const Vec2& c : corners) {
    lo.x = std::min(lo.x, c.x);
    lo.y = std::min(lo.y, c.y);
    hi.x = std::max(hi.x, c.x);
    hi.y = std::max(hi.y, c.y);
  }

  BEVPatch patch;
  patch.origin = {static_cast<std::int32_t>(std::floor(lo.x / cfg.cell_size)),
                  static_cast<std::int32_t>(std::floor(lo.y / cfg.cell_size))};
  const CellIndex max_cell{static_cast<std::int32_t>(std::floor(hi.x / cfg.cell_size)),
                           static_cast<std::int32_t>(std::floor(hi.y / cfg.cell_size))};
  patch.width = max_cell.i - patch.origin.i + 1;
  patch.height = max_cell.j - patch.origin.j + 1;
  patch.labels.assign(static_cast<std::size_t>(patch.width) * patch.height, 0);

  for (std::int32_t r = 0; r < patch.height; ++r) {
    for (std::int32_t c = 0; c < patch.width; ++c) {
      const Vec2 center{(patch.origin.i + c + 0.5) * cfg.cell_size,
                        (patch.origin.j + r + 0.5) * cfg.cell_size};
      const Vec2 v = to_vehicle(center);
      if (v.x < cfg.forward_min || v.x > cfg.forward_max ||
          std::abs(v.y) > cfg.lateral_half) {
        continue;
      }
      double z = 0.0;
      if (mesh) {
        if (auto h = mesh->height_at(v)) z = *h;
      }
      const Vec3 cam_pt = camera.to_camera({v.x, v.y, z});
      if (cam_pt.z < cfg.min_depth) continue;
      const long u = std::lround(camera.fx * cam_pt.x / cam_pt.z + camera.cx);
      const long vpix = std::lround(camera.fy * cam_pt.y / cam_pt.z + camera.cy);
      if (!frame.contains(static_cast<int>(u), static_cast<int>(vpix))) continue;
      const SemanticClass label = frame.at(static_cast<int>(u), static_cast<int>(vpix));
      if (label == SemanticClass::Unknown ||
          static_cast<int>(label) >= kSemanticClassCount)
        continue;
      patch.set(c, r, label);
    }
  }
  return patch;
}

}  // namespace

BEVPatch project_flat(const SemanticFrame& frame, const Pose& pose,
                      const CameraModel& camera, const ProjectionConfig& config) {
  return project_impl(frame, pose, camera, nullptr, config);
}

BEVPatch project_mesh(const SemanticFrame& frame, const Pose& pose,
                      const CameraModel& camera, const GroundMesh& mesh,
                      const ProjectionConfig& config) {
  return project_impl(frame, pose, camera, &mesh, config);
}

std::optional<Vec2> project_point(const CameraModel& camera, const Vec3& vehicle_point,
                                  double min_depth) {
  const Vec3 cam_pt = camera.to_camera(vehicle_point);
  if (cam_pt.z < min_depth) return std::nullopt;
  return Vec2{camera.fx * cam_pt.x / cam_pt.z + camera.cx,
              camera.fy * cam_pt.y / cam_pt.z + camera.cy};
}

}  // namespace lanecarto
