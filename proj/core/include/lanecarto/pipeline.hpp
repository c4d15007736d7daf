#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lanecarto/evaluation.hpp"
#include "lanecarto/explorer.hpp"
#include "lanecarto/intersection.hpp"
#include "lanecarto/lane.hpp"
#include "lanecarto/projection.hpp"
#include "lanecarto/skeleton.hpp"

namespace lanecarto {

enum class ProjectionMode { Flat, Mesh };

struct PipelinePaths {
  std::string skeleton;  // road network, .osm XML or plain JSON
  std::string bev;       // prebuilt BEV raster PNG (alternative to frames)
  std::string frames;    // directory of per-pose frame PNGs
  std::string poses;     // poses.csv
  std::string clouds;    // directory of cloud_*.bin files (mesh mode)
  std::string camera;    // camera.txt
  std::string output;    // map document destination (optional)
};

struct PipelineConfig {
  PipelinePaths paths;
  ExplorationConfig exploration;
  RegressorConfig regression;
  ProjectionMode projection_mode = ProjectionMode::Flat;
  ProjectionConfig projection;
  GateConfig gate;
  std::uint64_t seed = 1;         // base seed; per-road seeds are forked from it
  std::uint64_t config_hash = 0;  // FNV-1a of the config text, for provenance

  // Throws ValidationError: missing/unknown inputs are rejected before any
  // work starts (mesh mode requires clouds; bev and frames are alternatives).
  void validate() const;
};

// Parse the TOML-like config: [paths] / [exploration] / [regression] /
// [projection] / [gate] sections of key = value lines, # comments. Unknown
// sections or keys are rejected. Does not touch the filesystem.
PipelineConfig parse_pipeline_config(const std::string& text);

struct HDMapDocument {
  struct SkeletonEdge {
    EdgeId id = 0;
    NodeId source = 0;
    NodeId target = 0;
    Polyline polyline;
  };
  struct SkeletonNode {
    NodeId id = 0;
    Vec2 center;
    bool pseudo = false;
  };
  struct DocLane {
    Polyline center;  // way points along the fitted center line
    Polyline left;    // probed left boundary
    Polyline right;
    double start_offset = 0.0;
    std::vector<double> breakpoints;
  };
  struct DocRoad {
    EdgeId edge_id = -1;
    std::vector<DocLane> lanes;  // left-to-right
  };

  std::string version;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  bool has_provenance = true;
  std::vector<SkeletonEdge> skeleton_edges;
  std::vector<SkeletonNode> skeleton_nodes;
  std::vector<DocRoad> roads;  // traversed edges only
  std::vector<Intersection> intersections;
  std::vector<std::string> warnings;
};

// Canonical serialization (sorted keys, shortest-round-trip doubles); a
// document round-trips byte-exactly through from_json/to_json.
std::string map_document_to_json(const HDMapDocument& doc);
HDMapDocument map_document_from_json(const std::string& text);

// Full build: ingest network + sensor data, accumulate the BEV, explore each
// traversed directed edge, regress lanes, connect intersections. Per-road
// extinction is recorded in doc.warnings and the road left empty.
HDMapDocument cmd_build(const PipelineConfig& config);

// Ground truth as written by the synthetic generator (truth.json).
struct TruthLane {
  Polyline center, left, right;
};
struct TruthEdge {
  EdgeId edge_id = -1;
  std::vector<TruthLane> lanes;
};
struct TruthDocument {
  std::vector<TruthEdge> edges;
  std::vector<ConnectionTuple> connections;
};
TruthDocument parse_truth_json(const std::string& text);

struct EvalOptions {
  GateConfig gate;
  bool force = false;   // evaluate documents without a provenance block
  bool rectify = true;  // global rectification before scoring
};

// Score a map document against ground truth: per-road lane matching,
// aggregate precision/recall/RMS/mIOU, connection topology, and curve RMS of
// each matched connection against its analytic arc reference.
// Throws ValidationError when the document carries edge ids the truth lacks.
EvaluationReport cmd_eval(const HDMapDocument& doc, const TruthDocument& truth,
                          const EvalOptions& options);

}  // namespace lanecarto
