#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lanecarto/bev.hpp"
#include "lanecarto/camera.hpp"
#include "lanecarto/geometry.hpp"

namespace lanecarto {

// Raw indexed label image, row 0 at the top. Values are SemanticClass codes.
struct LabelImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> labels;  // row-major, size width*height
  std::vector<std::pair<std::string, std::string>> text;  // PNG tEXt pairs

  std::uint8_t at(int u, int v) const { return labels[static_cast<std::size_t>(v) * width + u]; }
};

// Indexed 8-bit PNG with the semantic palette. `text` pairs are stored as
// tEXt chunks and round-trip through read_label_png.
void write_label_png(const std::string& path, const LabelImage& image);
LabelImage read_label_png(const std::string& path);

// BEV rasters carry their grid metadata (cell size and origin cell) in tEXt
// chunks. Image row 0 corresponds to the maximum-j cell row so the picture
// reads north-up.
void write_bev_png(const std::string& path, const BEVRaster& raster);
BEVRaster read_bev_png(const std::string& path);

// Semantic camera frames; the timestamp is not stored in the file and is
// left at zero by the reader (callers pair frames with poses by index).
void write_frame_png(const std::string& path, const SemanticFrame& frame);
SemanticFrame read_frame_png(const std::string& path);

// Point clouds: binary records of three little-endian floats after an
// 8-byte "LCPC0001" magic. Paths ending in .csv use one "x,y,z" line per
// point instead.
void write_point_cloud(const std::string& path, const std::vector<Vec3>& points);
std::vector<Vec3> read_point_cloud(const std::string& path);

// Pose list: CSV columns timestamp,x,y,z,yaw,pitch,roll; a header line is
// written and tolerated on read.
void write_poses_csv(const std::string& path, const std::vector<Pose>& poses);
std::vector<Pose> read_poses_csv(const std::string& path);

// Camera calibration: key=value lines (fx, fy, cx, cy) plus an `extrinsic`
// line of 12 row-major values for the camera-to-vehicle [R|t].
void write_camera_txt(const std::string& path, const CameraModel& camera);
CameraModel read_camera_txt(const std::string& path);

// Whole-file text helpers used by the config and network loaders.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace lanecarto
