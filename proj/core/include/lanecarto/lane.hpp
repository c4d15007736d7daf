#pragma once

#include <cstddef>
#include <vector>

#include "lanecarto/bev.hpp"
#include "lanecarto/explorer.hpp"
#include "lanecarto/geometry.hpp"
#include "lanecarto/semantics.hpp"
#include "lanecarto/skeleton.hpp"
#include "lanecarto/spline.hpp"

namespace lanecarto {

// Road-aligned coordinates: s along the road's dominant direction, d the
// left-positive lateral offset.
struct RoadFrame {
  Vec2 origin;
  double bearing = 0.0;  // radians, map frame

  Vec2 to_frame(const Vec2& map_point) const;
  Vec2 to_map(const Vec2& sd) const;
};

// Frame anchored at the edge's first polyline vertex, oriented along the
// start-to-end bearing.
RoadFrame road_frame_from_edge(const AtomicRoadStub& stub);

// One lane's geometry: a smoothed lateral profile d = g(s) over [s_begin,
// s_end] in the road frame, plus fixed-spacing way points in the map frame.
struct CenterLine {
  RoadFrame frame;
  std::vector<double> breakpoints;  // interior regression breakpoints (s)
  NaturalSpline profile;            // d as a function of s
  double s_begin = 0.0, s_end = 0.0;
  double waypoint_spacing = 1.0;
  Polyline waypoints;  // map frame

  Vec2 map_point(double s) const { return frame.to_map({s, profile.evaluate(s)}); }
  // Unit map-frame tangent of the centerline at s.
  Vec2 map_tangent(double s) const;
  // Way point abscissae for a given spacing (always includes s_end).
  std::vector<double> sample_abscissae(double spacing) const;
};

struct BoundarySample {
  double left = 0.0;   // meters, >= 0
  double right = 0.0;  // meters, >= 0
  bool left_clamped = false;
  bool right_clamped = false;
  SemanticClass left_stop = SemanticClass::Unknown;   // class that ended the probe
  SemanticClass right_stop = SemanticClass::Unknown;
};

struct LaneBoundarySamples {
  std::vector<BoundarySample> samples;  // parallel to the way points probed
  Polyline left_polyline;
  Polyline right_polyline;
};

struct Lane {
  CenterLine center;
  LaneBoundarySamples boundaries;
  double start_offset = 0.0;  // signed d at s_begin; lanes sort left-to-right by it
};

struct AtomicRoad {
  EdgeId edge_id = -1;
  std::vector<Lane> lanes;  // ordered left-to-right at the road start
};

struct RegressorConfig {
  double dbscan_eps = 1.0;
  int dbscan_min_pts = 5;
  int max_breaks = 6;
  double lambda = -1.0;  // < 0: auto from the 0-break fit residuals
  double waypoint_spacing = 1.0;
  double probe_max = 8.0;
  int da_run_length = 3;  // consecutive cells of a foreign DA class that bound a lane
  std::size_t max_fit_points = 4000;
  double min_cluster_span = 1.0;  // meters of s-span below which a cluster is dropped
};

// Lateral boundary probe: from each way point march along the centerline
// normal in BEV-cell steps until a marking, curb, or a run of a different
// drivable-area class; clamp at probe_max and flag when nothing is found.
LaneBoundarySamples probe_width(const CenterLine& center, const BEVMap& bev,
                                double spacing, double probe_max = 8.0,
                                int da_run_length = 3);

// Full regression stage: DBSCAN over terminal particles, ancestor pooling per
// cluster, breakpoint regression + natural-spline smoothing in the road
// frame, width probing, left-to-right lane ordering.
AtomicRoad build_atomic_road(const ParticleHistory& history, const BEVMap& bev,
                             const RoadFrame& frame, const RegressorConfig& cfg = {});

}  // namespace lanecarto
