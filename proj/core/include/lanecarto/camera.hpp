#pragma once

#include <cstdint>
#include <vector>

#include "lanecarto/geometry.hpp"
#include "lanecarto/semantics.hpp"

namespace lanecarto {

// Vehicle pose in the map frame. Vehicle axes: +x forward, +y left, +z up;
// the z value is the ground height under the vehicle origin.
struct Pose {
  double timestamp = 0.0;
  Vec3 position;
  double yaw = 0.0, pitch = 0.0, roll = 0.0;

  Mat3 rotation() const { return Mat3::from_ypr(yaw, pitch, roll); }
  Vec3 to_map(const Vec3& p_vehicle) const { return rotation() * p_vehicle + position; }
  Vec3 to_vehicle(const Vec3& p_map) const {
    return rotation().transposed() * (p_map - position);
  }
  PlanarPose planar() const { return {position.xy(), yaw}; }
};

// Pinhole camera with a rigid camera-to-vehicle transform. Camera axes are
// +z forward, +x right, +y down.
struct CameraModel {
  double fx = 0.0, fy = 0.0, cx = 0.0, cy = 0.0;
  Mat3 rotation;  // camera -> vehicle
  Vec3 translation;

  Vec3 to_vehicle(const Vec3& p_camera) const { return rotation * p_camera + translation; }
  Vec3 to_camera(const Vec3& p_vehicle) const {
    return rotation.transposed() * (p_vehicle - translation);
  }
  // Conventional forward-looking mounting at the given offset.
  static CameraModel forward_facing(double fx, double fy, double cx, double cy,
                                    const Vec3& position_in_vehicle);
};

// One segmented camera frame: class codes per pixel, row major.
struct SemanticFrame {
  double timestamp = 0.0;
  int width = 0, height = 0;
  std::vector<std::uint8_t> classes;

  SemanticClass at(int u, int v) const {
    return static_cast<SemanticClass>(classes[static_cast<std::size_t>(v) * width + u]);
  }
  void set(int u, int v, SemanticClass c) {
    classes[static_cast<std::size_t>(v) * width + u] = static_cast<std::uint8_t>(c);
  }
  bool contains(int u, int v) const { return u >= 0 && u < width && v >= 0 && v < height; }
};

}  // namespace lanecarto
