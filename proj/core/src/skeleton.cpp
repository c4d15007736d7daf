#include "lanecarto/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "lanecarto/errors.hpp"

namespace lanecarto {

const RawRoadNetwork::Node* RawRoadNetwork::find_node(NodeId id) const {
  for (const auto& n : nodes)
    if (n.id == id) return &n;
  return nullptr;
}

RawRoadNetwork parse_network_json(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("network json: ") + e.what());
  }
  RawRoadNetwork net;
  for (const auto& jn : doc.value("nodes", nlohmann::json::array())) {
    RawRoadNetwork::Node n;
    n.id = jn.at("id").get<NodeId>();
    n.position = {jn.at("x").get<double>(), jn.at("y").get<double>()};
    net.nodes.push_back(n);
  }
  for (const auto& jw : doc.value("ways", nlohmann::json::array())) {
    RawRoadNetwork::Way w;
    w.id = jw.at("id").get<WayId>();
    for (const auto& ref : jw.at("nodes")) w.nodes.push_back(ref.get<NodeId>());
    w.oneway = jw.value("oneway", false);
    w.highway_class = jw.value("highway", "residential");
    if (w.nodes.size() < 2) continue;
    net.ways.push_back(std::move(w));
  }
  std::set<NodeId> known;
  for (const auto& n : net.nodes) known.insert(n.id);
  for (const auto& w : net.ways)
    for (NodeId ref : w.nodes)
      if (!known.count(ref))
        throw ValidationError("way " + std::to_string(w.id) +
                              " references missing node " + std::to_string(ref));
  return net;
}

std::string serialize_network_json(const RawRoadNetwork& net) {
  nlohmann::json doc;
  doc["nodes"] = nlohmann::json::array();
  for (const auto& n : net.nodes)
    doc["nodes"].push_back({{"id", n.id}, {"x", n.position.x}, {"y", n.position.y}});
  doc["ways"] = nlohmann::json::array();
  for (const auto& w : net.ways)
    doc["ways"].push_back({{"id", w.id},
                           {"nodes", w.nodes},
                           {"oneway", w.oneway},
                           {"highway", w.highway_class}});
  return doc.dump(2);
}

const IntersectionStub* SkeletonMap::find_intersection(NodeId id) const {
  for (const auto& i : intersections)
    if (i.id == id) return &i;
  return nullptr;
}

const AtomicRoadStub* SkeletonMap::find_edge(EdgeId id) const {
  for (const auto& e : edges)
    if (e.id == id) return &e;
  return nullptr;
}

const IntersectionStub& SkeletonMap::intersection_at(NodeId id) const {
  const auto* p = find_intersection(id);
  if (!p) throw LookupError("unknown intersection id " + std::to_string(id));
  return *p;
}

const AtomicRoadStub& SkeletonMap::edge_at(EdgeId id) const {
  const auto* p = find_edge(id);
  if (!p) throw LookupError("unknown edge id " + std::to_string(id));
  return *p;
}

SkeletonMap build_skeleton(const RawRoadNetwork& net) {
  SkeletonMap map;
  if (net.ways.empty()) return map;

  std::unordered_map<NodeId, Vec2> pos;
  for (const auto& n : net.nodes) pos[n.id] = n.position;
  for (const auto& w : net.ways)
    for (NodeId ref : w.nodes)
      if (!pos.count(ref))
        throw ValidationError("way " + std::to_string(w.id) +
                              " references missing node " + std::to_string(ref));

  // A node becomes an intersection when shared by >= 2 ways or when a single
  // way gives it >= 3 incident polyline arcs (self-junction).
  std::unordered_map<NodeId, std::set<WayId>> ways_at;
  std::unordered_map<NodeId, int> max_arcs_one_way;
  for (const auto& w : net.ways) {
    std::unordered_map<NodeId, int> arcs;
    for (std::size_t i = 0; i < w.nodes.size(); ++i) {
      NodeId n = w.nodes[i];
      ways_at[n].insert(w.id);
      if (i > 0) arcs[n] += 1;
      if (i + 1 < w.nodes.size()) arcs[n] += 1;
    }
    for (const auto& [n, a] : arcs) {
      auto [it, inserted] = max_arcs_one_way.try_emplace(n, a);
      if (!inserted) it->second = std::max(it->second, a);
    }
  }

  auto is_cut = [&](NodeId n) {
    return ways_at[n].size() >= 2 || max_arcs_one_way[n] >= 3;
  };

  struct PendingIntersection {
    Vec2 center;
    std::vector<EdgeId> incoming, outgoing;
    int degree = 0;
  };
  std::unordered_map<NodeId, PendingIntersection> pending;
  std::vector<NodeId> pending_order;
  auto touch = [&](NodeId n) -> PendingIntersection& {
    auto [it, inserted] = pending.try_emplace(n);
    if (inserted) {
      it->second.center = pos[n];
      pending_order.push_back(n);
    }
    return it->second;
  };

  EdgeId next_edge = 0;
  for (const auto& w : net.ways) {
    // split the way at cut nodes; every terminus is a cut
    std::vector<std::size_t> cuts;
    cuts.push_back(0);
    for (std::size_t i = 1; i + 1 < w.nodes.size(); ++i)
      if (is_cut(w.nodes[i])) cuts.push_back(i);
    cuts.push_back(w.nodes.size() - 1);

    for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
      std::size_t a = cuts[c], b = cuts[c + 1];
      Polyline fwd;
      for (std::size_t i = a; i <= b; ++i) fwd.push_back(pos[w.nodes[i]]);
      NodeId src = w.nodes[a], dst = w.nodes[b];

      AtomicRoadStub e;
      e.id = next_edge++;
      e.source = src;
      e.target = dst;
      e.polyline = fwd;
      e.way = w.id;
      if (!w.oneway) {
        AtomicRoadStub r;
        r.id = next_edge++;
        r.source = dst;
        r.target = src;
        r.polyline = Polyline(fwd.rbegin(), fwd.rend());
        r.way = w.id;
        e.reverse_twin = r.id;
        r.reverse_twin = e.id;
        map.edges.push_back(e);
        map.edges.push_back(r);
        touch(src).outgoing.push_back(e.id);
        touch(dst).incoming.push_back(e.id);
        touch(dst).outgoing.push_back(r.id);
        touch(src).incoming.push_back(r.id);
      } else {
        map.edges.push_back(e);
        touch(src).outgoing.push_back(e.id);
        touch(dst).incoming.push_back(e.id);
      }
      // one incident road direction per segment terminus
      touch(src).degree += 1;
      touch(dst).degree += 1;
    }
  }

  for (NodeId n : pending_order) {
    const auto& p = pending[n];
    IntersectionStub s;
    s.id = n;
    s.center = p.center;
    s.incoming = p.incoming;
    s.outgoing = p.outgoing;
    s.degree = p.degree;
    s.pseudo = p.degree <= 1;
    map.intersections.push_back(std::move(s));
  }
  return map;
}

namespace {

// ROI vertex for one incident edge: the polyline node adjacent to the
// intersection, clamped to max_vertex_dist along the polyline.
Vec2 roi_vertex(const AtomicRoadStub& e, NodeId at, double clamp_dist) {
  Polyline pl = e.polyline;
  if (e.target == at && e.source != at) std::reverse(pl.begin(), pl.end());
  if (pl.size() < 2) return pl.empty() ? Vec2{} : pl.front();
  double d = (pl[1] - pl[0]).norm();
  if (d <= clamp_dist) return pl[1];
  return polyline_point_at(pl, clamp_dist);
}

Polygon square_about(const Vec2& c, double r) {
  return {{c.x - r, c.y - r}, {c.x + r, c.y - r}, {c.x + r, c.y + r}, {c.x - r, c.y + r}};
}

}  // namespace

IntersectionROI intersection_roi(const SkeletonMap& map, NodeId id,
                                 const RoiOptions& opts) {
  const IntersectionStub& node = map.intersection_at(id);

  std::vector<Vec2> verts;
  auto add_unique = [&](const Vec2& v) {
    for (const Vec2& u : verts)
      if ((u - v).norm() < 1e-6) return;
    verts.push_back(v);
  };
  for (EdgeId eid : node.outgoing)
    add_unique(roi_vertex(map.edge_at(eid), id, opts.max_vertex_dist_m));
  for (EdgeId eid : node.incoming)
    add_unique(roi_vertex(map.edge_at(eid), id, opts.max_vertex_dist_m));

  IntersectionROI roi;
  roi.intersection_id = id;

  if (verts.size() < 3) {
    roi.polygon = square_about(node.center, opts.min_radius_m);
    return roi;
  }

  auto bearing_sort = [&](std::vector<Vec2>& vs) {
    std::sort(vs.begin(), vs.end(), [&](const Vec2& a, const Vec2& b) {
      return std::atan2(a.y - node.center.y, a.x - node.center.x) <
             std::atan2(b.y - node.center.y, b.x - node.center.x);
    });
  };
  bearing_sort(verts);
  roi.polygon = verts;

  // Degenerate bearing layouts (e.g. a T junction) leave the center on the
  // hull boundary; pad with fallback-square corners until it is interior.
  if (!point_strictly_in_polygon(roi.polygon, node.center)) {
    for (const Vec2& c : square_about(node.center, opts.min_radius_m)) {
      if (!point_in_polygon(roi.polygon, c)) add_unique(c);
    }
    bearing_sort(verts);
    roi.polygon = verts;
  }
  return roi;
}

LocationRef locate(const SkeletonMap& map, const PlanarPose& pose,
                   const RoiOptions& opts) {
  if (map.intersections.empty() && map.edges.empty())
    throw LookupError("locate: empty skeleton map");

  const IntersectionStub* best_node = nullptr;
  double best_center_dist = std::numeric_limits<double>::infinity();
  for (const auto& node : map.intersections) {
    IntersectionROI roi = intersection_roi(map, node.id, opts);
    if (point_in_polygon(roi.polygon, pose.position)) {
      double d = (node.center - pose.position).norm();
      if (d < best_center_dist) {
        best_center_dist = d;
        best_node = &node;
      }
    }
  }
  if (best_node) {
    LocationRef ref;
    ref.kind = LocationRef::Kind::InIntersection;
    ref.element_id = best_node->id;
    return ref;
  }

  if (map.edges.empty()) throw LookupError("locate: no edges to match");

  const AtomicRoadStub* best_edge = nullptr;
  PolylineProjection best_proj;
  double best_dist = std::numeric_limits<double>::infinity();
  double best_heading_diff = std::numeric_limits<double>::infinity();
  for (const auto& e : map.edges) {
    PolylineProjection proj = project_onto_polyline(e.polyline, pose.position);
    Vec2 dir = polyline_direction_at(e.polyline, proj.offset);
    double hd = std::abs(normalize_angle(pose.yaw - std::atan2(dir.y, dir.x)));
    constexpr double kTieEps = 1e-9;
    bool better = proj.distance < best_dist - kTieEps ||
                  (std::abs(proj.distance - best_dist) <= kTieEps && hd < best_heading_diff);
    if (better) {
      best_dist = proj.distance;
      best_heading_diff = hd;
      best_proj = proj;
      best_edge = &e;
    }
  }

  LocationRef ref;
  ref.kind = LocationRef::Kind::OnEdge;
  ref.element_id = best_edge->id;
  ref.offset_m = best_proj.offset;
  return ref;
}

}  // namespace lanecarto
