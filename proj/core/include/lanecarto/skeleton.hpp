#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lanecarto/geometry.hpp"

namespace lanecarto {

using NodeId = std::int64_t;
using WayId = std::int64_t;
using EdgeId = std::int32_t;

// Road network as ingested, before graph construction. Coordinates are in a
// local metric East-North frame.
struct RawRoadNetwork {
  struct Node {
    NodeId id = 0;
    Vec2 position;
  };
  struct Way {
    WayId id = 0;
    std::vector<NodeId> nodes;
    bool oneway = false;
    std::string highway_class;
  };

  std::vector<Node> nodes;
  std::vector<Way> ways;

  const Node* find_node(NodeId id) const;
};

struct OsmParseOptions {
  // Ways whose highway tag is not in this set are dropped.
  std::vector<std::string> highway_whitelist = {
      "motorway", "trunk", "primary", "secondary", "tertiary", "unclassified",
      "residential", "service", "living_street", "motorway_link", "trunk_link",
      "primary_link", "secondary_link", "tertiary_link", "road"};
  // Mean Earth radius for the equirectangular local projection.
  double earth_radius_m = 6371000.0;
};

// Parse the OSM XML subset (node id/lat/lon, way nd refs + highway/oneway
// tags). Lat/lon are projected to local meters about the bounding-box
// centroid. Throws ParseError (with line number) or ValidationError.
RawRoadNetwork parse_osm(const std::string& xml_text,
                         const OsmParseOptions& opts = {});

// Plain JSON network format used by synthetic scenarios:
//   {"nodes":[{"id":1,"x":0,"y":0},...],
//    "ways":[{"id":1,"nodes":[1,2],"oneway":true,"highway":"residential"},...]}
RawRoadNetwork parse_network_json(const std::string& json_text);
std::string serialize_network_json(const RawRoadNetwork& net);

// Directed cyclic graph of atomic roads between intersections.
struct AtomicRoadStub {
  EdgeId id = 0;
  NodeId source = 0;  // intersection id
  NodeId target = 0;
  Polyline polyline;  // first point == source center, last == target center
  std::optional<EdgeId> reverse_twin;  // the opposite direction of a two-way way
  WayId way = 0;                       // originating OSM way
};

struct IntersectionStub {
  NodeId id = 0;
  Vec2 center;
  std::vector<EdgeId> incoming;
  std::vector<EdgeId> outgoing;
  bool pseudo = false;  // dead-end way terminus, not a real junction
  // Count of geometrically distinct incident road directions.
  int degree = 0;
};

struct SkeletonMap {
  std::vector<IntersectionStub> intersections;
  std::vector<AtomicRoadStub> edges;

  const IntersectionStub* find_intersection(NodeId id) const;
  const AtomicRoadStub* find_edge(EdgeId id) const;
  const IntersectionStub& intersection_at(NodeId id) const;  // throws LookupError
  const AtomicRoadStub& edge_at(EdgeId id) const;            // throws LookupError
};

// Split ways at shared/degree>=3 nodes into directed atomic road stubs.
// Non-oneway ways emit one edge per direction; termini become pseudo
// intersections. Empty input yields an empty map.
SkeletonMap build_skeleton(const RawRoadNetwork& net);

struct RoiOptions {
  double min_radius_m = 5.0;   // square fallback half-side for degree <= 2
  double max_vertex_dist_m = 25.0;  // clamp for far-away adjacent nodes
};

struct IntersectionROI {
  NodeId intersection_id = 0;
  Polygon polygon;  // counter-clockwise
};

// Polygon from the polyline nodes adjacent to the intersection center, one
// per incident road direction, ordered by bearing. Degree <= 2 falls back to
// a 2*min_radius square. Throws LookupError for unknown ids.
IntersectionROI intersection_roi(const SkeletonMap& map, NodeId id,
                                 const RoiOptions& opts = {});

struct LocationRef {
  enum class Kind { OnEdge, InIntersection };
  Kind kind = Kind::OnEdge;
  std::int64_t element_id = 0;  // EdgeId or NodeId depending on kind
  double offset_m = 0.0;        // longitudinal offset, on-edge only
};

// Match a pose to the skeleton: inside any ROI polygon -> in-intersection,
// else the nearest edge (ties broken by heading). Throws LookupError when the
// map is empty.
LocationRef locate(const SkeletonMap& map, const PlanarPose& pose,
                   const RoiOptions& opts = {});

}  // namespace lanecarto
