#pragma once

#include "lanecarto/bev.hpp"
#include "lanecarto/camera.hpp"
#include "lanecarto/mesh.hpp"

namespace lanecarto {

struct ProjectionConfig {
  // Vehicle-frame region unprojected per frame: x in [forward_min,
  // forward_max], |y| <= lateral_half (meters).
  double forward_min = 3.0;
  double forward_max = 40.0;
  double lateral_half = 15.0;
  double cell_size = 0.1;
  // Maximum |frame.timestamp - pose.timestamp| before the pair is rejected.
  double sync_tolerance = 0.05;
  // Ground samples closer than this to the image plane are skipped.
  double min_depth = 0.5;
};

// Unprojects one semantic frame onto the ground via inverse mapping: every
// map cell in the forward region is transformed into the image and sampled
// (nearest pixel). The ground is the plane z = 0 in the vehicle frame.
// Throws SyncError when frame and pose timestamps disagree beyond tolerance.
BEVPatch project_flat(const SemanticFrame& frame, const Pose& pose,
                      const CameraModel& camera, const ProjectionConfig& config = {});

// Same, but ground height comes from a vehicle-frame topography mesh;
// cells outside the mesh hull fall back to the flat plane.
BEVPatch project_mesh(const SemanticFrame& frame, const Pose& pose,
                      const CameraModel& camera, const GroundMesh& mesh,
                      const ProjectionConfig& config = {});

// Pixel of a vehicle-frame point, or empty when behind the image plane.
// Exposed for calibration checks.
std::optional<Vec2> project_point(const CameraModel& camera, const Vec3& vehicle_point,
                                  double min_depth = 0.5);

}  // namespace lanecarto
