#pragma once

#include <string>
#include <vector>

#include "lanecarto/geometry.hpp"
#include "lanecarto/intersection.hpp"
#include "lanecarto/lane.hpp"

namespace lanecarto {

struct RigidTransform2D {
  double theta = 0.0;
  Vec2 translation;
  // Set when the correspondences could not determine a transform (fewer than
  // 2 pairs or coincident points); the transform is then the identity.
  bool degenerate = false;

  Vec2 apply(const Vec2& p) const {
    const double c = std::cos(theta), s = std::sin(theta);
    return {c * p.x - s * p.y + translation.x, s * p.x + c * p.y + translation.y};
  }
};

// Least-squares rigid (no-scale) transform mapping est onto gt, given paired
// correspondences (est[i] <-> gt[i]); closed form on the 2D cross-covariance.
RigidTransform2D rigid_align(const std::vector<Vec2>& est, const std::vector<Vec2>& gt);

// RMS of perpendicular distances from the est samples to the gt polyline.
double trajectory_rms(const Polyline& est, const Polyline& gt);
double trajectory_rms(const CenterLine& est, const Polyline& gt);

// area(a intersect b) / area(a union b); 0 for a zero-area union.
double polygon_iou(const Polygon& a, const Polygon& b);

// Closed lane surface: left boundary forward, right boundary reversed.
Polygon lane_polygon(const LaneBoundarySamples& boundaries);

// One lane in evaluation form, detached from how it was produced.
struct EvalLane {
  Polyline center;
  Polygon polygon;
};

struct GateConfig {
  double min_iou = 0.7;  // pass when iou > min_iou (strict) ...
  double max_rms = 0.2;  // ... or rms < max_rms (strict)
};

struct LaneMatch {
  int est_index = -1;
  int gt_index = -1;
  double iou = 0.0;
  double rms = 0.0;
  bool passed = false;
};

struct LaneMatchResult {
  int est_count = 0;
  int gt_count = 0;
  std::vector<LaneMatch> pairs;
  std::vector<int> unmatched_est;
  std::vector<int> unmatched_gt;
};

// Greedy matching, highest IOU first (ties broken by lower RMS); pairs are
// kept whether or not they pass the gate.
LaneMatchResult match_lanes(const std::vector<EvalLane>& est,
                            const std::vector<EvalLane>& gt, const GateConfig& gate);

// precision = TP / est_count, recall = TP / gt_count with TP = passing pairs.
// Vacuous conventions: no est and no gt -> 1/1; no est -> precision 1;
// no gt -> recall 1.
std::pair<double, double> precision_recall(const LaneMatchResult& result);

// Lanes of one skeleton edge, est or truth side.
struct RoadLanes {
  EdgeId edge_id = -1;
  std::vector<EvalLane> lanes;
};

// Global rectification: iterated nearest-neighbor pairing of est center
// samples onto gt center polylines, refined by rigid_align (small fixed
// iteration count, deterministic).
RigidTransform2D global_rectification(const std::vector<RoadLanes>& est,
                                      const std::vector<RoadLanes>& gt,
                                      int iterations = 5);

struct RoadEvaluation {
  EdgeId edge_id = -1;
  LaneMatchResult matches;
  double rms_mean = 0.0;            // over matched pairs
  double miou_per_lane = 0.0;       // mean IOU over gt lanes (unmatched count 0)
  double miou_area_weighted = 0.0;  // same, weighted by gt polygon area
};

struct TopologyEval {
  int tp = 0, fp = 0, fn = 0;
  double precision = 1.0;
  double recall = 1.0;
};

// Analytic reference path between connection endpoints: straight runs joined
// by the circle tangent to the entry ray at distance min(a, b) from the
// corner (a pure arc when the corner is equidistant). Falls back to the
// straight segment for (near-)parallel tangents or a corner behind the entry.
Polyline connection_reference_arc(const Vec2& p0, const Vec2& t0, const Vec2& p2,
                                  const Vec2& t2, int arc_samples = 64);

struct ConnectionCurveEval {
  ConnectionTuple tuple;
  double rms = 0.0;
};

// Set comparison of connection tuples (exact matches).
TopologyEval evaluate_topology(const std::vector<ConnectionTuple>& est,
                               const std::vector<ConnectionTuple>& gt);

struct EvaluationReport {
  GateConfig gate;
  bool rectified = false;
  RigidTransform2D rectification;
  std::vector<RoadEvaluation> roads;
  TopologyEval topology;
  bool has_topology = false;
  std::vector<ConnectionCurveEval> connection_curves;
  double connection_rms_mean = 0.0;
  bool has_connection_curves = false;
  int true_positives = 0;
  int false_positives = 0;
  int false_negatives = 0;
  double precision = 1.0;
  double recall = 1.0;
  double rms_mean = 0.0;
  double miou_per_lane = 0.0;
  double miou_area_weighted = 0.0;

  bool passes(double gate_iou, double gate_rms) const {
    return miou_per_lane > gate_iou || rms_mean < gate_rms;
  }
};

// Full evaluation: rectify est onto gt, match lanes per edge id, aggregate.
EvaluationReport evaluate(const std::vector<RoadLanes>& est,
                          const std::vector<RoadLanes>& gt, const GateConfig& gate,
                          bool rectify = true);

std::string evaluation_report_to_json(const EvaluationReport& report);

}  // namespace lanecarto
