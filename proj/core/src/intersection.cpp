#include "lanecarto/intersection.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lanecarto {
namespace {

const AtomicRoadStub* find_stub(const SkeletonMap& skeleton, EdgeId id) {
  return skeleton.find_edge(id);
}

bool is_reverse_twin(const SkeletonMap& skeleton, EdgeId in, EdgeId out) {
  const AtomicRoadStub* stub = find_stub(skeleton, in);
  return stub && stub->reverse_twin && *stub->reverse_twin == out;
}

std::vector<const AtomicRoad*> sorted_by_edge(const std::vector<AtomicRoad>& roads) {
  std::vector<const AtomicRoad*> out;
  out.reserve(roads.size());
  for (const AtomicRoad& r : roads) out.push_back(&r);
  std::sort(out.begin(), out.end(),
            [](const AtomicRoad* a, const AtomicRoad* b) { return a->edge_id < b->edge_id; });
  return out;
}

}  // namespace

bool ConnectionTuple::operator<(const ConnectionTuple& o) const {
  if (in_edge != o.in_edge) return in_edge < o.in_edge;
  if (out_edge != o.out_edge) return out_edge < o.out_edge;
  if (in_lane != o.in_lane) return in_lane < o.in_lane;
  return out_lane < o.out_lane;
}

std::vector<ConnectionTuple> infer_connections(const std::vector<AtomicRoad>& incoming,
                                               const std::vector<AtomicRoad>& outgoing,
                                               const SkeletonMap& skeleton) {
  std::vector<ConnectionTuple> out;
  for (const AtomicRoad* in : sorted_by_edge(incoming)) {
    for (const AtomicRoad* ego : sorted_by_edge(outgoing)) {
      if (is_reverse_twin(skeleton, in->edge_id, ego->edge_id)) continue;
      const int n = static_cast<int>(
          std::min(in->lanes.size(), ego->lanes.size()));
      for (int k = 0; k < n; ++k) {
        out.push_back({in->edge_id, k, ego->edge_id, k});
      }
    }
  }
  return out;
}

Vec2 control_point(const Vec2& p0, const Vec2& t0, const Vec2& p2, const Vec2& t2) {
  // Solve p0 + a*t0 = p2 - b*t2 for the line intersection.
  const double denom = t0.cross(t2);
  if (std::abs(denom) < 1e-6) return (p0 + p2) * 0.5;
  const Vec2 d = p2 - p0;
  const double a = d.cross(t2) / denom;
  if (a < 0.0) return (p0 + p2) * 0.5;  // lines meet behind the entry
  return p0 + t0 * a;
}

Vec2 bezier_eval(const Vec2& p0, const Vec2& p, const Vec2& p2, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::domain_error("bezier_eval: alpha must lie in [0, 1]");
  }
  const double u = 1.0 - alpha;
  return p0 * (u * u) + p * (2.0 * alpha * u) + p2 * (alpha * alpha);
}

Intersection build_intersection(NodeId id, const std::vector<AtomicRoad>& incoming,
                                const std::vector<AtomicRoad>& outgoing,
                                const SkeletonMap& skeleton,
                                const IntersectionBuildOptions& options) {
  Intersection result;
  result.id = id;

  auto road_by_edge = [](const std::vector<AtomicRoad>& roads,
                         EdgeId edge) -> const AtomicRoad* {
    for (const AtomicRoad& r : roads) {
      if (r.edge_id == edge) return &r;
    }
    return nullptr;
  };

  for (const ConnectionTuple& tuple : infer_connections(incoming, outgoing, skeleton)) {
    const AtomicRoad* in = road_by_edge(incoming, tuple.in_edge);
    const AtomicRoad* out = road_by_edge(outgoing, tuple.out_edge);
    const Lane& in_lane = in->lanes[tuple.in_lane];
    const Lane& out_lane = out->lanes[tuple.out_lane];

    const Vec2 p0 = in_lane.center.map_point(in_lane.center.s_end);
    const Vec2 t0 = in_lane.center.map_tangent(in_lane.center.s_end);
    const Vec2 p2 = out_lane.center.map_point(out_lane.center.s_begin);
    const Vec2 t2 = out_lane.center.map_tangent(out_lane.center.s_begin);

    if (options.filter_heading) {
      const double change =
          std::abs(normalize_angle(std::atan2(t2.y, t2.x) - std::atan2(t0.y, t0.x)));
      if (change > options.max_heading_change_deg * kPi / 180.0) continue;
    }

    LaneConnection conn;
    conn.tuple = tuple;
    conn.p0 = p0;
    conn.p2 = p2;
    conn.control = control_point(p0, t0, p2, t2);
    const int m = std::max(2, options.curve_samples);
    conn.samples.reserve(m);
    for (int i = 0; i < m; ++i) {
      conn.samples.push_back(
          bezier_eval(conn.p0, conn.control, conn.p2, static_cast<double>(i) / (m - 1)));
    }
    result.connections.push_back(std::move(conn));
  }
  return result;
}

}  // namespace lanecarto
