#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lanecarto/bev.hpp"
#include "lanecarto/camera.hpp"
#include "lanecarto/geometry.hpp"
#include "lanecarto/intersection.hpp"
#include "lanecarto/skeleton.hpp"

namespace lanecarto {

enum class ScenarioLayout {
  Straight,  // single one-way road
  Curved,    // quarter-circle one-way road
  Fork,      // one-way road splitting into two branch lanes
  Merge,     // two branch lanes joining into one
  Narrow,    // straight road with a custom lane width
  Grid4,     // four-way crossing, two-way arms
  Star6,     // six-way star, two-way arms
};

enum class MarkingStyle { None, Solid, Dashed };

struct Topography {
  enum class Kind { Flat, Sine };
  Kind kind = Kind::Flat;
  double amplitude = 0.2;    // meters, sine only
  double wavelength = 30.0;  // meters, sine only

  // Ground height; the sine profile varies along map x only.
  double height(double x) const;
  // Slope dh/dx at x.
  double slope(double x) const;
};

struct ScenarioSpec {
  ScenarioLayout layout = ScenarioLayout::Straight;
  double length = 100.0;        // road extent (straight/narrow/fork/merge)
  double radius = 40.0;         // curved: arc radius
  double fork_angle = 0.3;      // fork/merge: branch divergence (radians)
  double fork_position = 50.0;  // fork/merge: split point along the road
  double block = 60.0;          // grid4/star6: arm length
  double narrow_width = 2.2;    // narrow: lane width override
  int lanes_per_direction = 1;
  double lane_width = 3.0;
  MarkingStyle marking_left = MarkingStyle::Solid;
  MarkingStyle marking_right = MarkingStyle::Solid;
  MarkingStyle marking_center = MarkingStyle::Solid;  // between directions
  double dropout = 0.0;  // fraction of marking run length removed
  Topography topography;
  bool emit_frames = false;  // also render camera frames + point clouds
  std::uint64_t seed = 1;

  // The lane width actually used (narrow_width for the narrow layout).
  double effective_lane_width() const;
  void validate() const;  // throws ValidationError
};

// Parse a scenario description from JSON. Unknown keys and keys that do not
// apply to the chosen layout (e.g. "radius" for straight) are rejected.
ScenarioSpec parse_scenario_spec(const std::string& json_text);

struct GroundTruthLane {
  Polyline center;
  Polyline left;   // left boundary in driving direction
  Polyline right;  // right boundary
};

struct GroundTruthEdge {
  EdgeId edge_id = 0;
  NodeId source = 0;
  NodeId target = 0;
  std::vector<GroundTruthLane> lanes;  // ordered left-to-right
};

struct GroundTruthBundle {
  ScenarioSpec spec;
  RawRoadNetwork network;
  SkeletonMap skeleton;  // build_skeleton(network), for convenience
  BEVMap bev;            // rasterized truth semantics
  std::vector<GroundTruthEdge> edges;
  std::vector<ConnectionTuple> connections;
  std::vector<Pose> poses;  // one traversal per directed edge
  CameraModel camera;
  int frame_width = 320;
  int frame_height = 200;
  std::vector<SemanticFrame> frames;        // emit_frames only, one per pose
  std::vector<std::vector<Vec3>> clouds;    // emit_frames only, vehicle frame
};

// Build the full deterministic oracle bundle for a scenario.
GroundTruthBundle generate(const ScenarioSpec& spec);

// Ground-truth lanes/connections as JSON (the bundle's truth.json).
std::string truth_to_json(const GroundTruthBundle& bundle);

// Write skeleton.json, bev.png, truth.json, poses.csv, camera.txt and, when
// frames were emitted, frames/NNNN.png and cloud_NNNN.bin under `dir`.
void write_bundle(const GroundTruthBundle& bundle, const std::string& dir);

// Segmentation-noise model: each labeled cell is flipped to a uniformly
// chosen other class with probability flip_rate. flip_rate must lie in
// [0, 0.2]. Deterministic in `seed`.
BEVMap corrupt(const BEVMap& bev, double flip_rate, std::uint64_t seed);

}  // namespace lanecarto
