#pragma once

#include <vector>

#include "lanecarto/geometry.hpp"
#include "lanecarto/lane.hpp"
#include "lanecarto/skeleton.hpp"

namespace lanecarto {

// Lane-to-lane pairing across an intersection; lane indices are 0-based,
// counted left-to-right in driving direction.
struct ConnectionTuple {
  EdgeId in_edge = -1;
  int in_lane = 0;
  EdgeId out_edge = -1;
  int out_lane = 0;

  bool operator==(const ConnectionTuple& o) const {
    return in_edge == o.in_edge && in_lane == o.in_lane && out_edge == o.out_edge &&
           out_lane == o.out_lane;
  }
  bool operator<(const ConnectionTuple& o) const;
};

// A reference trajectory through the intersection: quadratic Bezier from the
// last way point of the incoming lane to the first way point of the outgoing
// lane.
struct LaneConnection {
  ConnectionTuple tuple;
  Vec2 p0;       // entry point (end of incoming lane center line)
  Vec2 control;  // Bezier control point
  Vec2 p2;       // exit point (start of outgoing lane center line)
  Polyline samples;
};

struct Intersection {
  NodeId id = 0;
  std::vector<LaneConnection> connections;
};

struct IntersectionBuildOptions {
  int curve_samples = 20;
  // Optional feasibility filter on the heading change between entry and exit
  // tangents; disabled by default.
  bool filter_heading = false;
  double max_heading_change_deg = 150.0;
};

// Algorithm: every (incoming, outgoing) road pair except the U-turn onto the
// reverse twin contributes min(N_in, N_out) connections pairing lanes
// left-to-right. Output is (in_edge, out_edge, lane) lexicographic.
std::vector<ConnectionTuple> infer_connections(const std::vector<AtomicRoad>& incoming,
                                               const std::vector<AtomicRoad>& outgoing,
                                               const SkeletonMap& skeleton);

// Control point P: intersection of the entry ray (p0, t0) with the line
// through p2 along t2. Near-parallel tangents or an intersection behind the
// entry fall back to the segment midpoint.
Vec2 control_point(const Vec2& p0, const Vec2& t0, const Vec2& p2, const Vec2& t2);

// Quadratic Bezier (1-a)^2 p0 + 2a(1-a) p + a^2 p2.
// Throws std::domain_error for alpha outside [0, 1].
Vec2 bezier_eval(const Vec2& p0, const Vec2& p, const Vec2& p2, double alpha);

Intersection build_intersection(NodeId id, const std::vector<AtomicRoad>& incoming,
                                const std::vector<AtomicRoad>& outgoing,
                                const SkeletonMap& skeleton,
                                const IntersectionBuildOptions& options = {});

}  // namespace lanecarto
